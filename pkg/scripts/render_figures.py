"""Render sample space-time diagrams as PPM files.

    python3 scripts/render_figures.py --out results/figures
"""

import argparse
from pathlib import Path

import numpy as np

from replicators.additive import BinaryConfig, evolve
from replicators.percolation import reachable_set
from replicators.render import RenderSpec, render_diagram, render_states
from replicators.webca import builtin_rule, evolve_web_window


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True)
    ap.add_argument("--steps", type=int, default=256)
    ap.add_argument("--seed", type=int, default=3, help="rng seed for the random initial rows")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    single = evolve(BinaryConfig.parse("1"), "one_or_3", args.steps)
    (out / "single_site.ppm").write_bytes(render_diagram(single, RenderSpec(cell_px=2))[0])

    # a random finite seed with its empty-path reachable set overlaid
    L = 64
    seed = BinaryConfig.from_word(int(rng.integers(0, 2 ** 62)) | (1 << 63) | 1, 0)
    d = evolve(seed, "one_or_3", 96)
    x0, x1 = -96, L + 96
    reach = reachable_set(d, [(x, 0) for x in range(x0, x1 + 1)], "wide", window=(x0, x1))
    spec = RenderSpec(cell_px=3, overlay=reach.as_array().astype(bool))
    (out / "wide_paths.ppm").write_bytes(render_states(d.as_array(x0, x1), spec))

    # web rules from a random binary seed of width 129
    bits = rng.integers(0, 2, 129).astype(np.uint8)
    for name in ("web_xor", "extended_1or3", "piggyback", "web_rule30"):
        rule = builtin_rule(name)
        states, _ = evolve_web_window(rule, bits, 0, args.steps)
        spec = RenderSpec(cell_px=2, second_rgb=tuple(rule.palette_rgb))
        (out / f"{name}.ppm").write_bytes(render_states(states, spec))
    print("wrote", ", ".join(sorted(p.name for p in out.glob("*.ppm"))))


if __name__ == "__main__":
    main()
