"""Scan for gaps between symmetric-constrained and free optima.

For random symmetric tensors at several shapes, solve the best rank-r
approximation with and without the shared-factor constraint and report the
largest objective gap seen per (shape, class). Rank-one and the n=2 /
cross-orthogonal regimes should show gaps at solver precision only; the
interesting exception is CON at n=r=3, where the free optimum genuinely
leaves the symmetric set.

Usage: python scripts/gap_scan.py [--count 20] [--seed 0] [--starts 64]
"""

import argparse

import numpy as np

from symortho import ApproxProblem, Notion, SolverConfig, random_symmetric, solve


def scan(n, d, r, notion, count, starts, seed):
    worst = 0.0
    for i in range(count):
        rng = np.random.default_rng(seed * 1000 + i)
        t = random_symmetric(n, d, rng)
        cfg = SolverConfig(starts=starts, seed=seed + i)
        free = solve(ApproxProblem(t, notion, r, config=cfg)).objective
        sym = solve(
            ApproxProblem(t, notion, r, symmetric_constraint=True, config=cfg)
        ).objective
        worst = max(worst, free - sym)
    return worst


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--starts", type=int, default=64)
    args = ap.parse_args()

    grid = [
        (2, 3, 2, Notion.con()),
        (2, 3, 2, Notion.son()),
        (3, 3, 2, Notion.con()),
        (3, 3, 3, Notion.con()),
        (3, 4, 2, Notion.con()),
    ]
    print(f"| n | d | r | class | worst free-minus-symmetric gap ({args.count} draws) |")
    print("| --- | --- | --- | --- | --- |")
    for n, d, r, notion in grid:
        gap = scan(n, d, r, notion, args.count, args.starts, args.seed)
        print(f"| {n} | {d} | {r} | {notion} | {gap:.3e} |")


if __name__ == "__main__":
    main()
