"""Norm chain tables for the bundled reference tensors.

Prints Frobenius, spectral, and per-class best-approximation values for a
chosen case (default: all of the closed-form ones), with certification
status. The chain spectral <= A_1 <= ... <= A_r <= Frobenius and
CON <= SON <= ON at fixed rank should hold everywhere.

Usage: python scripts/norm_table.py [--case ex-coincide] [--rank-max 3]
"""

import argparse

from symortho import CASE_IDS, SolverConfig, build_case, chain_check

CLOSED_FORM = ("thm-no-son", "thm-no-on", "ex-deflation", "ex-coincide")


def show(case_id, rank_max, config):
    case = build_case(case_id)
    chain = chain_check(case.tensor, rank_max, config=config)
    rep = chain.report
    print(f"\n## {case_id}: {case.summary}")
    print("| value | rank | measured | status |")
    print("| --- | --- | --- | --- |")
    print(f"| frobenius | | {rep.frobenius:.9f} | exact |")
    print(f"| spectral | 1 | {rep.spectral:.9f} | multi-start |")
    for e in rep.entries:
        print(f"| {e.notion} | {e.rank} | {e.value:.9f} | {e.status} |")
    if chain.violations:
        print("violations: " + "; ".join(chain.violations))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--case", choices=CASE_IDS, default=None)
    ap.add_argument("--rank-max", type=int, default=3)
    ap.add_argument("--starts", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    config = SolverConfig(starts=args.starts, seed=args.seed)
    for case_id in [args.case] if args.case else CLOSED_FORM:
        show(case_id, args.rank_max, config)


if __name__ == "__main__":
    main()
