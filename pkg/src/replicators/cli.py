"""Command-line front end.

Every command prints one JSON document on stdout (or writes it with --out)
and exits with 0 on success, 2 on a violated precondition, 3 when a cap or
iteration limit is hit and 4 on I/O failure.  Errors go to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import census as census_mod
from .additive import RULES, BinaryConfig, BudgetExceeded, evolve
from .percolation import (
    PathType,
    chi_path_xor,
    diagram_window,
    mc_crossing,
    mc_drift,
    mc_empty_survival,
    reachable_set,
    z_path,
)
from .render import ImageTooLarge, RenderSpec, render_diagram, render_grid, render_states
from .replication import (
    LinkString,
    Unresolved,
    compute_link,
    is_blocker,
    is_nondegenerate,
    produce_ether,
    reflection_class,
    replication_certificate,
    verify_replicator,
)
from .seeds import SeedSyntaxError
from .webca import (
    BUILTIN_NAMES,
    RULES_2D,
    TernaryConfig,
    WebRuleError,
    builtin_rule,
    derive_two_level_ebd,
    evolve_web,
    solidify_2d,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_CAP, EXIT_IO = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def rational(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator, "decimal": f"{float(q):.10f}"}


def _strip_runtime(obj):
    if isinstance(obj, dict):
        return {k: _strip_runtime(v) for k, v in obj.items() if k != "runtime_ms"}
    if isinstance(obj, list):
        return [_strip_runtime(v) for v in obj]
    return obj


def _emit(args, payload) -> None:
    if not getattr(args, "timing", False):
        payload = _strip_runtime(payload)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_bytes(path: str, data: bytes) -> None:
    Path(path).write_bytes(data)


def binary_seed(text: str) -> BinaryConfig:
    """A binary seed in the seed grammar, or a hex integer ``0x...`` with bit i at site i."""
    text = text.strip()
    if text.lower().startswith("0x"):
        return BinaryConfig.from_word(int(text, 16), 0)
    return BinaryConfig.parse(text)


def seed_width(text: str, L: int | None) -> int | None:
    """Explicit L, or the full digit width of a hex seed."""
    text = text.strip()
    if L is None and text.lower().startswith("0x"):
        return 4 * len(text[2:]) - 1
    return L


def ternary_seed(text: str) -> TernaryConfig:
    text = text.strip()
    if text.lower().startswith("0x"):
        word = int(text, 16)
        return TernaryConfig.finite(tuple((word >> i) & 1 for i in range(word.bit_length())))
    return TernaryConfig.parse(text)


def _points(text: str) -> list[tuple[int, int]]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            a, b = chunk.split(",")
            pts.append((int(a), int(b)))
    return pts


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args):
    if args.rule in RULES:
        seed = binary_seed(args.seed)
        diagram = evolve(seed, args.rule, args.steps)
    else:
        rule = builtin_rule(args.rule)
        seed = ternary_seed(args.seed)
        diagram = evolve_web(rule, seed, args.steps)
    x0, x1 = diagram.extent()
    payload = {"rule": args.rule, "seed": seed.to_text(), "steps": args.steps, "extent": [x0, x1],
               "final": diagram.rows[-1].to_text()}
    if args.rows:
        payload["rows"] = [r.to_text() for r in diagram.rows]
    if args.render:
        spec = RenderSpec(cell_px=args.cell_px)
        if args.rule not in RULES:
            spec = RenderSpec(cell_px=args.cell_px, second_rgb=tuple(builtin_rule(args.rule).palette_rgb))
        data, left = render_diagram(diagram, spec)
        _write_bytes(args.render, data)
        payload["render"] = {"path": args.render, "x_left": left}
    _emit(args, payload)


def cmd_paths(args):
    seed = binary_seed(args.seed)
    diagram = evolve(seed, "one_or_3", args.steps)
    x0, x1 = diagram_window(diagram)
    if args.sources == "row0":
        sources = [(x, 0) for x in range(x0, x1 + 1)]
    else:
        sources = _points(args.sources)
    reach = reachable_set(diagram, sources, args.path_type, window=(x0, x1))
    payload = {"path_type": str(PathType.parse(args.path_type)), "seed": seed.to_text(), "steps": args.steps,
               "window": [x0, x1], "reached_per_row": [len(reach.points(t)) for t in range(reach.T + 1)],
               "reaches_last_row": bool(reach.rows[-1]), "last_row_points": reach.points(reach.T)[:256],
               "metadata": reach.metadata}
    if args.render:
        states = diagram.as_array(x0, x1)
        data = render_states(states, RenderSpec(cell_px=args.cell_px, overlay=reach.as_array().astype(bool)))
        _write_bytes(args.render, data)
    _emit(args, payload)


def cmd_zpath(args):
    seed = binary_seed(args.seed)
    diagram = evolve(seed, "one_or_3", args.steps)
    traj = z_path(diagram, tuple(int(v) for v in args.start.split(",")), args.direction)
    _emit(args, {"seed": seed.to_text(), "direction": args.direction, "positions": list(traj.positions)})


def cmd_chipath(args):
    res = chi_path_xor(args.steps, args.kmax)
    _emit(args, {"steps": args.steps, "exit_times": list(res.exit_times), "e": list(res.e)})


def cmd_link(args):
    seed = binary_seed(args.seed)
    link = compute_link(seed, args.m, seed_width(args.seed, args.L))
    _emit(args, {"seed": seed.to_text(), "m": args.m, "link": link.text, "link_hex": link.hex,
                 "nondegenerate": is_nondegenerate(link, 1 << args.m)})


def cmd_blocker(args):
    link = LinkString.from_text(args.link)
    depth = args.depth if args.depth is not None else 1 << link.m
    _emit(args, {"link": link.text, "path_type": args.path, "depth": depth,
                 "blocker": is_blocker(link, args.path, depth),
                 "nondegenerate": is_nondegenerate(link, depth)})


def cmd_ether(args):
    rule = builtin_rule(args.rule)
    states = tuple(int(c) for c in args.row)
    ether = produce_ether(rule, states, args.cap)
    kind, partner = reflection_class(ether, rule, args.cap)
    out = ether.as_dict()
    out.update({"rule": rule.id, "row": args.row, "reflection": kind, "reflection_partner": partner})
    _emit(args, out)


def cmd_certify(args):
    rule = builtin_rule(args.rule)
    seed = binary_seed(args.seed)
    cert = replication_certificate(rule, seed, args.mmax, seed_width(args.seed, args.L))
    if args.verify and cert.certified:
        cert.verify(rule, T=args.T)
    _emit(args, cert.as_dict())


def cmd_verify(args):
    rule = builtin_rule(args.rule)
    seed = ternary_seed(args.seed)
    ether = produce_ether(rule, tuple(int(c) for c in args.ether))
    report = verify_replicator(rule, seed, args.r, ether, args.T)
    out = report.as_dict()
    out.update({"rule": rule.id, "seed": seed.to_text(), "r": args.r, "T": args.T, "ether": ether.as_dict()})
    _emit(args, out)


def cmd_census(args):
    rule = builtin_rule(args.rule)
    result = census_mod.run_census(rule, args.m, args.path, workers=args.workers, checkpoint=args.checkpoint,
                                   combine_reflections=not args.split_reflections)
    Path(args.out).write_text(census_mod.census_csv(result))
    summary = result.as_dict(include_runtime=False)
    rows, total = census_mod.lower_bounds(result)
    summary["overall_bound"] = rational(total)
    summary["csv"] = args.out
    json_path = args.json or str(Path(args.out).with_suffix(".json"))
    Path(json_path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps({"csv": args.out, "json": json_path, "N_n": result.N_n, "N_b": result.N_b,
                                 "ethers": len(rows), "overall_bound": rational(total)}, sort_keys=True) + "\n")
    if result.unresolved:
        raise CliError(EXIT_CAP, f"{result.unresolved} blocker links have unresolved ethers")


def cmd_mc(args):
    if args.kind == "crossing":
        est = mc_crossing(args.path, args.t, args.trials, args.rng_seed)
        _emit(args, est.as_dict())
    elif args.kind == "survival":
        est = mc_empty_survival(args.t, args.trials, args.rng_seed)
        _emit(args, est.as_dict())
    elif args.kind == "drift":
        _emit(args, mc_drift(args.t, args.trials, args.rng_seed).as_dict())
    else:
        rule = builtin_rule(args.rule)
        exp = census_mod.mc_random_seed_experiment(rule, args.L, args.trials, args.rng_seed, args.mmax)
        _emit(args, exp.as_dict())


def cmd_ebd2(args):
    derived = derive_two_level_ebd(args.rule2d)
    target = {"box13": "extended_1or3", "piggyback_box": "piggyback"}[args.rule2d]
    builtin = builtin_rule(target)
    diffs = [i for i, (a, b) in enumerate(zip(derived.table, builtin.table)) if a != b]
    _emit(args, {"rule2d": args.rule2d, "builtin": target, "entries": len(derived.table),
                 "differences": diffs, "equal": not diffs, "compliance": derived.compliance.as_dict()})


def cmd_solidify2d(args):
    cells = _points(args.seed)
    grid = solidify_2d(args.rule2d, cells, args.steps)
    occupied = int(np.count_nonzero(grid.occupied_at >= 0))
    payload = {"rule2d": args.rule2d, "steps": args.steps, "occupied": occupied,
               "origin": [grid.x0, grid.y0], "size": [grid.width, grid.height]}
    if args.render:
        _write_bytes(args.render, render_grid(grid, RenderSpec(cell_px=args.cell_px)))
    _emit(args, payload)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="replicators", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    web_names = list(BUILTIN_NAMES)

    def add(name, fn, help_text, out_help="write the JSON result here instead of stdout", out_required=False):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--out", help=out_help, required=out_required)
        p.add_argument("--timing", action="store_true", help="include wall-clock fields in the output")
        return p

    p = add("simulate", cmd_simulate, "evolve an additive or web rule from a finite seed")
    p.add_argument("--rule", required=True, choices=list(RULES) + web_names)
    p.add_argument("--seed", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--rows", action="store_true", help="include every row in the output")
    p.add_argument("--render", help="PPM output path")
    p.add_argument("--cell-px", type=int, default=1)

    p = add("paths", cmd_paths, "reachable set of a path type in the one_or_3 diagram of a seed")
    p.add_argument("--path-type", required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--sources", default="row0", help='"row0" or "x,t;x,t;..."')
    p.add_argument("--render", help="PPM output path with the reachable set overlaid")
    p.add_argument("--cell-px", type=int, default=1)

    p = add("zpath", cmd_zpath, "Z-path in the one_or_3 diagram of a seed")
    p.add_argument("--seed", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--start", default="0,0")
    p.add_argument("--direction", choices=["left", "right"], default="right")

    p = add("chipath", cmd_chipath, "chi-path exit times in xor from 1s on {-1, 0}")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--kmax", type=int, default=20)

    p = add("link", cmd_link, "level-2^m link of a seed")
    p.add_argument("--seed", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--L", type=int, default=None)

    p = add("blocker", cmd_blocker, "blocker test for a link")
    p.add_argument("--link", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--depth", type=int, default=None)

    p = add("ether", cmd_ether, "ether produced from a periodic row")
    p.add_argument("--rule", required=True, choices=web_names)
    p.add_argument("--row", required=True, help="one period, digits 0/1/2")
    p.add_argument("--cap", type=int, default=1 << 16)

    p = add("certify", cmd_certify, "replication certificate for a binary seed")
    p.add_argument("--rule", required=True, choices=web_names)
    p.add_argument("--seed", required=True, help="seed grammar or 0x-hex (bit i = site i)")
    p.add_argument("--mmax", type=int, default=8)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--verify", action="store_true", help="also run verify_replicator at thickness R+L")
    p.add_argument("--T", type=int, default=None, help="verification horizon (default: the certificate horizon)")

    p = add("verify", cmd_verify, "finite-horizon replicator check")
    p.add_argument("--rule", required=True, choices=web_names)
    p.add_argument("--seed", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--ether", required=True, help="signature of the expected ether")
    p.add_argument("--T", type=int, required=True)

    p = add("census", cmd_census, "exhaustive link census with ether lower bounds", "CSV output path", True)
    p.add_argument("--rule", required=True, choices=web_names)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--path", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--json", default=None, help="summary path (default: CSV path with .json)")
    p.add_argument("--split-reflections", action="store_true")

    p = add("mc", cmd_mc, "Monte Carlo estimators")
    p.add_argument("kind", choices=["crossing", "survival", "drift", "seeds"])
    p.add_argument("--rng-seed", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--t", type=int, default=40, help="depth (crossing, survival) or horizon (drift)")
    p.add_argument("--path", default="diagonal")
    p.add_argument("--rule", default="piggyback", choices=web_names)
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--mmax", type=int, default=8)

    p = add("ebd2", cmd_ebd2, "derive a web rule from a 2D solidification rule and compare with the built-in")
    p.add_argument("--rule2d", required=True, choices=list(RULES_2D))

    p = add("solidify2d", cmd_solidify2d, "run a 2D solidification rule")
    p.add_argument("--rule2d", required=True, choices=list(RULES_2D))
    p.add_argument("--seed", required=True, help='"x,y;x,y;..."')
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--render", help="PPM output path")
    p.add_argument("--cell-px", type=int, default=1)
    return ap


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except CliError as exc:
        return _fail(exc.code, exc)
    except (Unresolved, BudgetExceeded) as exc:
        return _fail(EXIT_CAP, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except (ValueError, KeyError, SeedSyntaxError, WebRuleError, ImageTooLarge) as exc:
        return _fail(EXIT_PRECONDITION, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
