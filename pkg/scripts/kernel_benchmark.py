"""Time Pauli multiplication, tableau conjugation and exact learning as n grows."""

import argparse
import json
import time

import numpy as np

from cliffordlearn.gf2pauli import PauliOperator, pauli_from_index
from cliffordlearn.learn import learn_clifford
from cliffordlearn.oracle import tableau_oracle
from cliffordlearn.tableau import conjugate_pauli, random_clifford


def random_pauli(n: int, rng) -> PauliOperator:
    return pauli_from_index(n, int.from_bytes(rng.bytes((2 * n + 7) // 8), "big") % 4**n)


def per_call(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 32, 128, 512])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for n in args.sizes:
        p, q = random_pauli(n, rng), random_pauli(n, rng)
        t = random_clifford(n, rng)
        rows.append({
            "n": n,
            "pauli_mul_s": per_call(lambda: p * q, args.reps),
            "conjugate_s": per_call(lambda: conjugate_pauli(t, p), max(1, args.reps // 10)),
            "learn_clifford_s": per_call(lambda: learn_clifford(tableau_oracle(t), rng), 1),
        })
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
