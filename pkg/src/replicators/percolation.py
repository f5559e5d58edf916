"""Path reachability in one_or_3 space-time diagrams, Z-paths, chi-paths,
principal voids, explicit 3-free chains and Monte Carlo estimators.

A path is a sequence of space-time points moving down one row per step and
at most one cell sideways.  The path types, from weakest to strongest
restriction:

* ``empty``: every point is in state 0;
* ``diagonal``: empty, and every step moves sideways;
* ``wide``: empty, and no sideways step from (x, t) to (y, t+1) when both
  (y, t) and (x, t+1) are 1s;
* ``free<θ>``: empty, and no point has θ or more 1s among
  (x±1, t), (x±1, t-1), (x, t-1).  Row -1 counts as all 0.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _mc
from .additive import BinaryConfig, SpaceTimeDiagram, evolve
from .rng import RNG_ALGORITHM, random_words, substream

# ---------------------------------------------------------------------------
# path types


@dataclass(frozen=True)
class PathType:
    tag: str
    theta: int = 0

    def __post_init__(self):
        if self.tag not in ("empty", "diagonal", "wide", "free"):
            raise ValueError(f"unknown path type {self.tag!r}")
        if self.tag == "free" and self.theta not in (3, 4, 5):
            raise ValueError("free paths need theta in {3, 4, 5}")

    @classmethod
    def parse(cls, text: str | "PathType") -> "PathType":
        if isinstance(text, PathType):
            return text
        text = text.strip().lower()
        if text.startswith("free"):
            digits = text[4:].strip("()_ ")
            return cls("free", int(digits))
        return cls(text)

    @property
    def code(self) -> int:
        return {"empty": _mc.EMPTY, "diagonal": _mc.DIAGONAL, "wide": _mc.WIDE, "free": _mc.FREE}[self.tag]

    def __str__(self) -> str:
        return f"free{self.theta}" if self.tag == "free" else self.tag


# ---------------------------------------------------------------------------
# bitset rows: line windows (zero outside) and rings


class _Line:
    def __init__(self, width: int):
        self.mask = (1 << width) - 1

    def shl(self, w: int) -> int:  # bit x <- bit x-1
        return (w << 1) & self.mask

    def shr(self, w: int) -> int:  # bit x <- bit x+1
        return w >> 1


class _Ring:
    def __init__(self, width: int):
        self.n = width
        self.mask = (1 << width) - 1

    def shl(self, w: int) -> int:
        return ((w << 1) | (w >> (self.n - 1))) & self.mask

    def shr(self, w: int) -> int:
        return ((w >> 1) | (w << (self.n - 1))) & self.mask


def _at_least(planes: Sequence[int], theta: int) -> int:
    """Bitwise test 'at least theta of the five planes are set'."""
    p0, p1, p2, p3, p4 = planes
    s1 = p0 ^ p1 ^ p2
    c1 = (p0 & p1) | (p0 & p2) | (p1 & p2)
    s2 = s1 ^ p3 ^ p4
    c2 = (s1 & p3) | (s1 & p4) | (p3 & p4)
    b1, b2 = c1 ^ c2, c1 & c2
    if theta == 3:
        return b2 | (b1 & s2)
    if theta == 4:
        return b2
    if theta == 5:
        return b2 & s2
    raise ValueError("theta must be 3, 4 or 5")


def allowed_rows(rows: Sequence[int], path: PathType, geom) -> list[int]:
    """Per-row bitsets of the points a path of this type may visit."""
    out = []
    prev = 0
    for row in rows:
        ok = ~row & geom.mask
        if path.tag == "free":
            planes = (geom.shl(row), geom.shr(row), geom.shl(prev), geom.shr(prev), prev)
            ok &= ~_at_least(planes, path.theta)
        out.append(ok)
        prev = row
    return out


def advance(reach: int, prev: int, row: int, allowed: int, path: PathType, geom) -> int:
    left, right = geom.shl(reach), geom.shr(reach)
    if path.tag == "diagonal":
        return (left | right) & allowed
    if path.tag == "wide":
        left &= ~(prev & geom.shl(row))
        right &= ~(prev & geom.shr(row))
    return (reach | left | right) & allowed


def propagate(rows: Sequence[int], sources: Sequence[int], path: PathType, geom) -> list[int]:
    """Reachable sets row by row; ``sources[t]`` are extra start points at row t."""
    allowed = allowed_rows(rows, path, geom)
    reach = [sources[0] & allowed[0]]
    for t in range(1, len(rows)):
        r = advance(reach[-1], rows[t - 1], rows[t], allowed[t], path, geom)
        if t < len(sources):
            r |= sources[t] & allowed[t]
        reach.append(r)
    return reach


# ---------------------------------------------------------------------------
# reachability on finite diagrams


@dataclass
class ReachSet:
    rows: list[int]
    x0: int
    width: int
    path_type: PathType
    sources: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return len(self.rows) - 1

    def contains(self, x: int, t: int) -> bool:
        i = x - self.x0
        return 0 <= t <= self.T and 0 <= i < self.width and bool((self.rows[t] >> i) & 1)

    def points(self, t: int) -> list[int]:
        w = self.rows[t]
        out = []
        while w:
            low = w & -w
            out.append(self.x0 + low.bit_length() - 1)
            w ^= low
        return out

    def as_array(self) -> np.ndarray:
        out = np.zeros((len(self.rows), self.width), dtype=np.uint8)
        for t, w in enumerate(self.rows):
            for x in self.points(t):
                out[t, x - self.x0] = 1
        return out


def diagram_window(diagram: SpaceTimeDiagram, pad: int | None = None) -> tuple[int, int]:
    """x-range wide enough that paths never need to leave it."""
    lo, hi = diagram.extent()
    if pad is None:
        pad = diagram.T + 2
    return lo - pad, hi + pad


def diagram_rows(diagram: SpaceTimeDiagram, x0: int, x1: int) -> list[int]:
    return [row.segment(x0, x1) for row in diagram.rows]


def reachable_set(diagram: SpaceTimeDiagram, sources: Iterable[tuple[int, int]], path_type: PathType | str,
                  window: tuple[int, int] | None = None) -> ReachSet:
    """Points reachable by a path of the given type that starts at one of ``sources``.

    Sources must themselves be admissible path points (state 0, and for free
    paths a light enough neighbourhood).
    """
    path = PathType.parse(path_type)
    x0, x1 = window if window is not None else diagram_window(diagram)
    width = x1 - x0 + 1
    rows = diagram_rows(diagram, x0, x1)
    src = [0] * len(rows)
    for x, t in sources:
        if 0 <= t < len(rows) and x0 <= x <= x1:
            src[t] |= 1 << (x - x0)
    reach = propagate(rows, src, path, _Line(width))
    return ReachSet(reach, x0, width, path, metadata={"row_minus_one": "all-0"})


def path_points_ok(diagram: SpaceTimeDiagram, path: Sequence[tuple[int, int]], path_type: PathType | str) -> bool:
    """Direct check that an explicit point sequence is a path of the given type."""
    ptype = PathType.parse(path_type)

    def lam(x, t):
        return diagram.state(x, t) if 0 <= t <= diagram.T else 0

    for i, (x, t) in enumerate(path):
        if lam(x, t) != 0:
            return False
        if ptype.tag == "free":
            ones = lam(x - 1, t) + lam(x + 1, t) + lam(x - 1, t - 1) + lam(x + 1, t - 1) + lam(x, t - 1)
            if ones >= ptype.theta:
                return False
        if i == 0:
            continue
        px, pt = path[i - 1]
        if t != pt + 1 or abs(x - px) > 1:
            return False
        if ptype.tag == "diagonal" and x == px:
            return False
        if ptype.tag == "wide" and x != px and lam(x, pt) == 1 and lam(px, t) == 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Z-paths and chi-paths


@dataclass(frozen=True)
class Trajectory:
    kind: str
    positions: tuple  # int per time step, None after extinction

    def at(self, t: int):
        return self.positions[t]


def z_path(diagram: SpaceTimeDiagram, start: tuple[int, int], direction: str = "right") -> Trajectory:
    """Greedy extremal empty trajectory from ``start`` through the diagram."""
    x, t0 = start
    sign = 1 if direction == "right" else -1
    if direction not in ("right", "left"):
        raise ValueError("direction is 'left' or 'right'")
    positions = [None] * t0 + [x]
    r = x
    for s in range(t0 + 1, diagram.T + 1):
        if r is None:
            positions.append(None)
            continue
        row = diagram.rows[s]
        y = r + sign
        if row.kind == "finite":
            # all cells beyond the support are 0
            while row.cell(y) == 1:
                y -= sign
        else:
            for _ in range(row.length + 1):
                if row.cell(y) == 0:
                    break
                y -= sign
            else:
                y = None
        r = y
        positions.append(r)
    return Trajectory(f"z_{direction}", tuple(positions))


@dataclass
class ChiResult:
    trajectory: Trajectory
    exit_times: list[int]  # E_k for k = 1..k_max, 0 if not reached
    e: list[int]  # e_k = E_k / 2^(k-1)


def chi_recursion(k_max: int) -> list[int]:
    """e_2 = 3 and e_{k+1} = floor(e_k / 2) + e_k; index 0 holds k = 2."""
    out = [3]
    while len(out) < k_max - 1:
        out.append(out[-1] // 2 + out[-1])
    return out


def chi_path_xor(T: int, k_max: int = 20, store: int = 4096) -> ChiResult:
    """Chi-path of the Xor CA started from 1s on {-1, 0}.

    The path steps straight down from a 1 and diagonally right from a 0.
    Runs until time T or until the path has left the strip of width 2^k_max.
    States are evaluated in closed form, so T can be in the billions.
    """
    positions = np.zeros(min(store, T + 1), dtype=np.int64)
    exits = _mc.chi_path(T, k_max, positions)
    E = [int(v) for v in exits[1:]]
    e = [E[k - 1] >> (k - 1) if E[k - 1] else 0 for k in range(1, k_max + 1)]
    return ChiResult(Trajectory("chi", tuple(int(v) for v in positions)), E, e)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


# ---------------------------------------------------------------------------
# principal voids and 3-free chains


@dataclass(frozen=True)
class VoidRegion:
    """A void of the single-site diagram and its intersection with an L-translate."""

    index: int
    L: int
    width: int
    t: int
    top: tuple[int, int]
    w_top: tuple[int, int] | None  # top interval of the intersection, None if empty

    @property
    def w_apex(self) -> tuple[int, int] | None:
        if self.w_top is None:
            return None
        a, b = self.w_top
        s = (b - a) // 2
        return a + s, self.t + s

    def w_contains(self, x: int, t: int) -> bool:
        if self.w_top is None:
            return False
        i = t - self.t
        a, b = self.w_top
        return i >= 0 and a + i <= x <= b - i


def principal_void(i: int, L: int = 0, mirrored: bool = False) -> VoidRegion:
    """V_i: width 2^(j+1)-1 starting at time 2*2^j (i = 2j) or 3*2^j (i = 2j+1).

    The positive-x copy is returned unless ``mirrored``.
    """
    if i < 0 or L < 0:
        raise ValueError("need i >= 0 and L >= 0")
    j = i // 2
    width = (1 << (j + 1)) - 1
    t = (2 << j) if i % 2 == 0 else 3 << j
    top = (1, width) if not mirrored else (-width, -1)
    w_top = None
    if width > L:
        w_top = (top[0] + L, top[1])
    return VoidRegion(i, L, width, t, top, w_top)


class ChainError(RuntimeError):
    pass


def three_free_chain(seed: BinaryConfig, L: int, i_start: int, links: int) -> list[list[tuple[int, int]]]:
    """Explicit 3-free paths from the apex of W_i to the apex of W_{i+1}.

    Each path follows the successor intervals of maximal 0-runs (the 0-run at
    the next row meeting the current one) and is returned as a list of (x, t).
    """
    if L % 4 != 0:
        raise ValueError("L must be a multiple of 4")
    if seed.kind != "finite" or (not seed.is_empty and (seed.left < 0 or seed.right > L)):
        raise ValueError("seed must be supported in [0, L]")
    if any(s % 4 for s in seed.sites()):
        raise ValueError("seed must vanish outside 4Z")
    if L > (1 << (i_start // 2)) - 2:
        raise ValueError("need L <= 2^floor(i/2) - 2")
    regions = [principal_void(i, L) for i in range(i_start, i_start + links + 1)]
    T = regions[-1].w_apex[1] + 1
    diagram = evolve(seed, "one_or_3", T)
    free3 = PathType("free", 3)
    paths = []
    for here, there in zip(regions, regions[1:]):
        ax, at = here.w_apex
        bx, bt = there.w_apex
        path = _successor_chain(diagram, (ax, at), (bx, bt), free3)
        if path is None:
            raise ChainError(f"no 3-free path from the apex of W_{here.index} to W_{there.index}")
        if not path_points_ok(diagram, path, free3):
            raise ChainError(f"path for W_{here.index} failed validation")
        if not any(there.w_contains(x, t) for x, t in path):
            raise ChainError(f"path for W_{here.index} misses W_{there.index}")
        paths.append(path)
    return paths


def _zero_run(row: BinaryConfig, x: int) -> tuple[int, int] | None:
    if row.cell(x) != 0:
        return None
    a = x
    while row.cell(a - 1) == 0 and a - 1 >= row.left - 1:
        a -= 1
    b = x
    while row.cell(b + 1) == 0 and b + 1 <= row.right + 1:
        b += 1
    return a, b


def _successor_chain(diagram, start, goal, path: PathType):
    sx, st = start
    gx, gt = goal
    lo = sx - (gt - st) - 2
    hi = sx + (gt - st) + 2
    width = hi - lo + 1
    geom = _Line(width)
    rows = [diagram.rows[t].segment(lo, hi) for t in range(st, gt + 1)]
    prev_row = diagram.rows[st - 1].segment(lo, hi) if st > 0 else 0
    allowed = allowed_rows([prev_row] + rows, path, geom)[1:]
    run = _zero_run(diagram.rows[st], sx)
    if run is None:
        return None
    reach = [(1 << (sx - lo)) & allowed[0]]
    interval = run
    for k in range(1, len(rows)):
        t = st + k
        nxt = advance(reach[-1], rows[k - 1], rows[k], allowed[k], path, geom)
        # restrict to the successor interval: the 0-run of row t meeting the current one
        best = None
        for x in range(interval[0], interval[1] + 1):
            cand = _zero_run(diagram.rows[t], x)
            if cand is not None:
                best = cand
                break
        if best is None:
            return None
        interval = best
        a, b = max(interval[0], lo), min(interval[1], hi)
        if a > b:
            return None
        mask = ((1 << (b - a + 1)) - 1) << (a - lo)
        nxt &= mask
        if not nxt:
            return None
        reach.append(nxt)
    if not (reach[-1] >> (gx - lo)) & 1:
        return None
    # backtrack one path
    path_pts = [(gx, gt)]
    x = gx
    for k in range(len(rows) - 1, 0, -1):
        for px in (x, x - 1, x + 1):
            if not (reach[k - 1] >> (px - lo)) & 1:
                continue
            step_ok = advance(1 << (px - lo), rows[k - 1], rows[k], allowed[k], path, geom)
            if (step_ok >> (x - lo)) & 1:
                x = px
                break
        else:
            raise AssertionError("backtracking failed")
        path_pts.append((x, st + k - 1))
    path_pts.reverse()
    return path_pts


# ---------------------------------------------------------------------------
# Monte Carlo estimators


@dataclass
class Estimate:
    op: str
    params: dict
    trials: int
    successes: int
    rng_seed: int
    runtime_ms: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def estimate(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(max(p * (1 - p), 0.0) / self.trials) if self.trials else float("nan")

    @property
    def ci99(self) -> tuple[float, float]:
        z = 2.5758293035489004
        return max(0.0, self.estimate - z * self.stderr), min(1.0, self.estimate + z * self.stderr)

    def as_dict(self) -> dict:
        d = {
            "op": self.op,
            "params": self.params,
            "trials": self.trials,
            "successes": self.successes,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "ci99": list(self.ci99),
            "rng_algorithm": RNG_ALGORITHM,
            "rng_seed": self.rng_seed,
            "runtime_ms": self.runtime_ms,
        }
        d.update(self.extra)
        return d


_DOMAIN_CROSSING, _DOMAIN_SURVIVAL, _DOMAIN_DRIFT, _DOMAIN_REFRESH = 1, 2, 3, 4


def mc_crossing(path_type: PathType | str, t: int, trials: int, rng_seed: int) -> Estimate:
    """Probability of a path from row 0 to (0, t) under a uniformly random row 0."""
    path = PathType.parse(path_type)
    start = time.perf_counter()
    pad = t + 3
    width = 2 * pad + 1
    hits = 0
    for trial in range(trials):
        words = random_words(substream(rng_seed, trial, _DOMAIN_CROSSING), width)
        hits += bool(_mc.crossing_trial(words, t, pad, path.code, path.theta))
    ms = int((time.perf_counter() - start) * 1000)
    return Estimate("mc_crossing", {"path_type": str(path), "t": t}, trials, hits, rng_seed, ms,
                    {"row_minus_one": "all-0"})


def mc_empty_survival(t: int, trials: int, rng_seed: int, origin_zero: bool = False) -> Estimate:
    """Probability of an empty path from (0, 0) to row t under a uniformly random row 0."""
    start = time.perf_counter()
    pad = 2 * t + 2
    width = 2 * pad + 1
    hits = 0
    for trial in range(trials):
        words = random_words(substream(rng_seed, trial, _DOMAIN_SURVIVAL), width)
        if origin_zero:
            words[pad >> 6] &= ~np.uint64(1 << (pad & 63))
        hits += bool(_mc.survival_trial(words, t, pad, _mc.EMPTY, 0))
    ms = int((time.perf_counter() - start) * 1000)
    return Estimate("mc_empty_survival", {"t": t, "origin_zero": origin_zero}, trials, hits, rng_seed, ms)


def _drift_row(rng_seed: int, trial: int, T: int, domain: int) -> tuple[np.ndarray, int]:
    pad = 2 * T + 2
    width = 2 * pad + 1
    words = random_words(substream(rng_seed, trial, domain), width)
    words[pad >> 6] &= ~np.uint64(1 << (pad & 63))
    return words, pad


@dataclass
class DriftResult:
    T: int
    trials: int
    ratios: list[float]
    rng_seed: int
    runtime_ms: int = 0

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def sd(self) -> float:
        return float(np.std(self.ratios, ddof=1)) if len(self.ratios) > 1 else 0.0

    def as_dict(self) -> dict:
        return {"op": "mc_drift", "params": {"T": self.T}, "trials": self.trials, "estimate": self.mean,
                "sd": self.sd, "stderr": self.sd / math.sqrt(self.trials),
                "ci99": [self.mean - 2.5758 * self.sd / math.sqrt(self.trials), self.mean + 2.5758 * self.sd / math.sqrt(self.trials)],
                "rng_algorithm": RNG_ALGORITHM, "rng_seed": self.rng_seed, "runtime_ms": self.runtime_ms}


def mc_drift(T: int, trials: int, rng_seed: int) -> DriftResult:
    """r_T / T for the rightward Z-path from the origin (origin 0, rest uniform)."""
    start = time.perf_counter()
    ratios = []
    positions = np.zeros(T + 1, dtype=np.int64)
    for trial in range(trials):
        words, pad = _drift_row(rng_seed, trial, T, _DOMAIN_DRIFT)
        _mc.zpath_trial(words, T, pad, positions)
        ratios.append((int(positions[T]) - pad) / T)
    ms = int((time.perf_counter() - start) * 1000)
    return DriftResult(T, trials, ratios, rng_seed, ms)


@dataclass
class RefreshWalk:
    points: list[tuple[int, int]]  # refresh points (x, t)
    counts: list[int]  # G_i examined below point i (the last one is censored)
    z_positions: list[int]  # independently tracked Z-path, r_t for t = 0..T

    def steps(self) -> list[tuple[int, int]]:
        return [(b[0] - a[0], b[1] - a[1]) for a, b in zip(self.points, self.points[1:])]

    def reconstruct_z(self, T: int) -> list[int]:
        """Z-path positions rebuilt from the refresh points and their counts."""
        z = [None] * (T + 1)
        for (x, t), g in zip(self.points, self.counts):
            if t <= T:
                z[t] = x
            if g == 0:
                continue
            for j in range(1, (g + 1) // 2 + 1):
                if t + j <= T:
                    z[t + j] = x + 2 - g + (j - 1)
        return z


def refresh_walk(T: int, rng_seed: int, trial: int = 0) -> RefreshWalk:
    """Refresh points of the rightward Z-path up to time T on one random realization."""
    words, pad = _drift_row(rng_seed, trial, T, _DOMAIN_REFRESH)
    cap = T + 2
    rx = np.zeros(cap, np.int64)
    rt = np.zeros(cap, np.int64)
    counts = np.zeros(cap, np.int64)
    zpos = np.zeros(T + 1, np.int64)
    k = _mc.refresh_trial(words, T, pad, rx, rt, counts, zpos)
    points = [(int(rx[i]) - pad, int(rt[i])) for i in range(k)]
    return RefreshWalk(points, [int(c) for c in counts[:k]], [int(v) - pad for v in zpos])


def refresh_walk_steps(n_steps: int, rng_seed: int) -> RefreshWalk:
    """Run the exploration long enough to record at least ``n_steps`` complete steps."""
    T = int(n_steps * 4 / 3 + 6 * math.sqrt(n_steps) + 64)
    walk = refresh_walk(T, rng_seed)
    while len(walk.points) - 1 < n_steps:
        T = int(T * 1.2) + 16
        walk = refresh_walk(T, rng_seed)
    return walk
