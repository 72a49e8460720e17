"""Success rate of the approximate C_2 learner on perturbed Cliffords."""

import argparse
import json

import numpy as np

from cliffordlearn.learn import LearningFailed, approx_learn_ck, approx_query_count
from cliffordlearn.oracle import make_perturbed_clifford
from cliffordlearn.tableau import random_clifford


def trial(n, eps, delta, seq):
    inst, run = seq.spawn(2)
    truth = random_clifford(n, np.random.default_rng(inst))
    o = make_perturbed_clifford(truth, eps / 4, inst)
    try:
        table = approx_learn_ck(o, 2, eps, delta, np.random.default_rng(run))
    except LearningFailed:
        return False
    return table.to_tableau() == truth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = []
    for n in args.n:
        seqs = np.random.SeedSequence(args.seed, spawn_key=(n,)).spawn(args.trials)
        wins = sum(trial(n, args.epsilon, args.delta, s) for s in seqs)
        out.append({
            "n": n,
            "epsilon": args.epsilon,
            "delta": args.delta,
            "successes": wins,
            "trials": args.trials,
            "queries": list(approx_query_count(n, 2, args.epsilon, args.delta)),
        })
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
