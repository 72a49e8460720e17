"""Run the CLOSE/FAR tester on certified instances at n <= 2."""

import argparse
import json
import math

import numpy as np

from cliffordlearn.cltest import CLOSE, FAR, LEARN_DISTANCE, certify_instance, clifford_test
from cliffordlearn.oracle import make_perturbed_clifford, trusted_unitary
from cliffordlearn.tableau import random_clifford


def sample(kind, n, eps, rng):
    truth = random_clifford(n, rng)
    if kind == CLOSE:
        target = rng.uniform(0, eps / (math.sqrt(32) * n))
    else:
        target = rng.uniform(eps, LEARN_DISTANCE)
    return make_perturbed_clifford(truth, target, rng)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--epsilon", type=float, default=0.3)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = []
    for n in args.n:
        for kind in (CLOSE, FAR):
            rng = np.random.default_rng([args.seed, n, kind == FAR])
            certified = correct = 0
            for _ in range(args.trials):
                o = sample(kind, n, args.epsilon, rng)
                cert = certify_instance(trusted_unitary(o), args.epsilon, kind)
                if not (cert.promise_holds and cert.chain_holds):
                    continue
                certified += 1
                correct += clifford_test(o, args.epsilon, args.delta, rng).verdict == kind
            out.append({"n": n, "kind": kind, "epsilon": args.epsilon,
                        "certified": certified, "correct": correct, "trials": args.trials})
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
