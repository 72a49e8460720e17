"""Compare measured query ledgers of the exact learners against the closed-form budgets."""

import argparse
import json

import numpy as np

from cliffordlearn.learn import learn_ck, nested_query_count, query_budget
from cliffordlearn.oracle import tableau_oracle
from cliffordlearn.tableau import random_clifford


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1, 2, 3, 4, 6, 8])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for n in args.sizes:
        o = tableau_oracle(random_clifford(n, rng))
        learn_ck(o, 2, rng)
        rows.append({
            "n": n,
            "k": 2,
            "ledger": list(o.ledger.snapshot()),
            "closed_form": list(query_budget(n, 2)),
            "nested": list(nested_query_count(n, 3)),
            "closed_form_k3": list(query_budget(n, 3)),
        })
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
