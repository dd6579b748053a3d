#!/usr/bin/env python3
"""Skeleton-recovery benchmark on random linear models.

Sweeps signal strengths at a fixed edge density and prints mean
true-positive / true-negative edge rates for both learners.
"""

import argparse
import json

from causeweave.experiments import ContinuousSimConfig, run_continuous_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--rho", type=float, default=0.04)
    ap.add_argument("--thetas", type=float, nargs="+", default=[0.25, 0.5])
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--m-ci", type=int, default=2, dest="m_ci")
    ap.add_argument("--seed", type=int, default=55)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None, help="write the full reports as JSON")
    args = ap.parse_args()

    collected = {}
    print(f"{'theta':>6} {'algorithm':<12} {'tpr':>8} {'tnr':>8}")
    for theta in args.thetas:
        cfg = ContinuousSimConfig(
            k=args.k, n=args.n, rho=args.rho, theta=theta, reps=args.reps,
            alpha=args.alpha, m_ci=args.m_ci, seed=args.seed, threads=args.threads,
        )
        reports = run_continuous_experiment(cfg)
        collected[str(theta)] = {a: r.to_json_obj() for a, r in reports.items()}
        for alg, rep in reports.items():
            print(f"{theta:>6} {alg:<12} {rep.tpr:>8.4f} {rep.tnr:>8.4f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(collected, fh, sort_keys=True, indent=2)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
