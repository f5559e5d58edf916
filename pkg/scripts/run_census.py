"""Run a full link census with checkpoints and write the CSV table and JSON summary.

    python3 scripts/run_census.py --rule extended_1or3 --m 4 --path free4 --out results/extended_m4
"""

import argparse
import sys
import time

from replicators.census import lower_bounds, run_census, write_outputs
from replicators.webca import builtin_rule


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rule", required=True)
    ap.add_argument("--m", type=int, required=True)
    ap.add_argument("--path", default=None, help="path type; defaults to the rule's strongest certified type")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", required=True, help="output prefix; writes <out>.csv, <out>.json, <out>.ckpt.npz")
    ap.add_argument("--split-reflections", action="store_true")
    args = ap.parse_args(argv)

    start = time.time()

    def progress(done, total):
        if done % 256 == 0 or done == total:
            print(f"{done}/{total} shards, {time.time() - start:.0f} s", file=sys.stderr, flush=True)

    rule = builtin_rule(args.rule)
    result = run_census(rule, args.m, args.path, workers=args.workers, checkpoint=f"{args.out}.ckpt.npz",
                        combine_reflections=not args.split_reflections, progress=progress)
    write_outputs(result, f"{args.out}.csv", f"{args.out}.json")
    rows, total = lower_bounds(result)
    print(f"N_n={result.N_n} N_b={result.N_b} ethers={len(rows)} unresolved={result.unresolved} "
          f"bound={float(total):.6f} runtime={result.runtime_ms / 1000:.0f}s")


if __name__ == "__main__":
    main()
