"""Compare the cutting-plane solver with the brute-force oracle on random targets."""

import argparse

import numpy as np

from jsdiff import fixtures
from jsdiff.oracle import brute_solve, compare
from jsdiff.solver import ExtremalProblem, solve_F


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for name in fixtures.ORACLE_SET:
        s, fam = fixtures.load(name)
        worst = {"rho": 0.0, "norm": 0.0, "b": 0.0}
        for _ in range(args.trials):
            A = tuple(rng.uniform(0.2, 2.0) * len(c) for c in fam)
            p = ExtremalProblem(s, fam, A)
            c = compare(solve_F(p), brute_solve(p))
            for k in worst:
                worst[k] = max(worst[k], getattr(c, k))
        print(f"{name:8s} E={s.E:3d}  " + "  ".join(f"{k} {v:.2e}" for k, v in worst.items()))


if __name__ == "__main__":
    main()
