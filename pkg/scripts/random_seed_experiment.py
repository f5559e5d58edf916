"""Certify random seeds and compare ether frequencies with census lower bounds.

Each seed is uniform on [0, L]; the certificate gives the ether it produces
(reflection pairs combined).  With --census the frequencies are printed next
to the bounds from a census JSON written by run_census.py.

    python3 scripts/random_seed_experiment.py --rule piggyback --L 512 --trials 2000 \
        --rng-seed 7 --census results/piggyback_m4.json
"""

import argparse
import json
from fractions import Fraction
from pathlib import Path

from replicators.census import mc_random_seed_experiment, truncate
from replicators.webca import builtin_rule


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rule", default="piggyback")
    ap.add_argument("--L", type=int, default=512)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--rng-seed", type=int, required=True)
    ap.add_argument("--mmax", type=int, default=8)
    ap.add_argument("--census", help="census JSON with per-ether counts")
    ap.add_argument("--top", type=int, default=15)
    ap.add_argument("--out", help="JSON output path")
    args = ap.parse_args(argv)

    exp = mc_random_seed_experiment(builtin_rule(args.rule), args.L, args.trials, args.rng_seed, args.mmax)
    bounds = {}
    if args.census:
        data = json.loads(Path(args.census).read_text())
        bounds = {s: truncate(Fraction(n, data["N_n"])) for s, n in data["per_ether"].items()}

    print(f"{args.rule} L={args.L}: certified {exp.certified_fraction:.4f} of {args.trials}")
    print(f"{'signature':<20} {'freq':>8} {'stderr':>8} {'bound':>8}")
    ranked = sorted(exp.combined_counts.items(), key=lambda kv: -kv[1])[:args.top]
    for sig, _ in ranked:
        p, se = exp.frequency(sig)
        b = f"{float(bounds[sig]):.4f}" if sig in bounds else "-"
        print(f"{sig:<20} {p:8.4f} {se:8.4f} {b:>8}")
    if args.out:
        Path(args.out).write_text(json.dumps({k: v for k, v in exp.as_dict().items() if k != "runtime_ms"},
                                             indent=2) + "\n")


if __name__ == "__main__":
    main()
