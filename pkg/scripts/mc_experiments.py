"""Monte Carlo curves for the percolation estimators.

Crossing probabilities over a range of depths for each path type, empty-path
survival, the Z-path drift and the refresh-point step statistics.  Everything
is written to one JSON file; runs are reproducible from --rng-seed.

    python3 scripts/mc_experiments.py --rng-seed 1 --trials 20000 --out results/mc.json
"""

import argparse
import json
from pathlib import Path

import numpy as np

from replicators.percolation import mc_crossing, mc_drift, mc_empty_survival, refresh_walk


def crossing_curves(depths, trials, seed):
    out = {}
    for j, path in enumerate(("diagonal", "wide", "free3", "free4")):
        rows = []
        for t in depths:
            est = mc_crossing(path, t, trials, seed + 1000 * j + t)
            rows.append({"t": t, "estimate": est.estimate, "stderr": est.stderr})
        out[path] = rows
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rng-seed", type=int, required=True)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--depths", default="4,8,16,24,32,40")
    ap.add_argument("--drift-T", type=int, default=10_000)
    ap.add_argument("--drift-trials", type=int, default=100)
    ap.add_argument("--walk-T", type=int, default=50_000)
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)

    depths = [int(v) for v in args.depths.split(",")]
    report = {"rng_seed": args.rng_seed, "trials": args.trials}
    report["crossing"] = crossing_curves(depths, args.trials, args.rng_seed)
    report["diagonal_bound"] = {t: 0.5 * (7 / 8) ** (t // 2) for t in depths}
    report["empty_survival"] = [
        {"t": t, "estimate": (e := mc_empty_survival(t, args.trials, args.rng_seed + t)).estimate, "stderr": e.stderr}
        for t in depths]
    drift = mc_drift(args.drift_T, args.drift_trials, args.rng_seed)
    report["drift"] = {k: v for k, v in drift.as_dict().items() if k != "runtime_ms"}

    walk = refresh_walk(args.walk_T, args.rng_seed)
    steps = np.array(walk.steps(), float)
    g = np.array(walk.counts[:len(steps)])
    report["refresh"] = {
        "steps": len(steps),
        "mean_step": steps.mean(axis=0).tolist(),
        "G_histogram": {int(v): int(np.sum(g == v)) for v in np.unique(g)},
    }
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    for path, rows in report["crossing"].items():
        print(path, " ".join(f"{r['t']}:{r['estimate']:.4f}" for r in rows))
    print("drift", f"{drift.mean:.4f} +- {drift.sd / np.sqrt(drift.trials):.4f}")
    print("refresh mean step", report["refresh"]["mean_step"])


if __name__ == "__main__":
    main()
