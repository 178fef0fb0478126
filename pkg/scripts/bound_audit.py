#!/usr/bin/env python3
"""Large random-matrix audit of every perturbation bound.

Usage:
    python3 scripts/bound_audit.py [--count 500] [--n-max 12] [--seed 0]

Exit status is nonzero if any bound with a satisfied condition is violated,
which would indicate a soundness bug.
"""

import argparse

from specbound.experiments import audit_random_matrices


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=500)
    parser.add_argument("--n-max", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    summary = audit_random_matrices(args.count, n_max=args.n_max, seed=args.seed)
    for key, value in summary.as_dict().items():
        print(f"{key}\t{value}")
    return 0 if summary.violations == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
