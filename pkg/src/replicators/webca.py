"""Three-state range-2 web rules.

A web rule is a table ``f`` over neighbourhoods (a, b, c, d, e) in {0,1,2}^5,
indexed by ``81a + 27b + 9c + 3d + e``.  The 1s of any web rule evolve as
``one_or_3``; the rule only decides whether a non-1 cell becomes 0 or 2.
Rule tables are generated once from predicate code and then frozen, so all
compliance checks are exhaustive over the table itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .additive import DEFAULT_CELL_BUDGET, BudgetExceeded, SpaceTimeDiagram
from .seeds import format_seed, parse_seed

TUPLES: tuple[tuple[int, int, int, int, int], ...] = tuple(itertools.product(range(3), repeat=5))
BUILTIN_NAMES = ("web_xor", "modified_web_xor", "web_rule30", "extended_1or3", "piggyback", "web_1or3")

_PALETTES = {
    "web_xor": (220, 30, 30),
    "modified_web_xor": (230, 120, 0),
    "web_rule30": (30, 150, 30),
    "extended_1or3": (30, 60, 220),
    "piggyback": (150, 40, 180),
    "web_1or3": (0, 150, 150),
}


def tuple_index(a: int, b: int, c: int, d: int, e: int) -> int:
    return 81 * a + 27 * b + 9 * c + 3 * d + e


def delta(s: int) -> int:
    return 1 if s == 1 else 0


def new_first_level(a, b, c, d, e) -> tuple[int, int]:
    """The first-level states the neighbours x-1 and x+1 will take next step."""
    left = (delta(a) + delta(b) + delta(c)) % 2
    right = (delta(c) + delta(d) + delta(e)) % 2
    return left, right


class WebRuleError(ValueError):
    """A table that violates the web-rule conditions."""


# ---------------------------------------------------------------------------
# compliance


@dataclass(frozen=True)
class ComplianceReport:
    empty_compliant: bool
    diagonal_compliant: bool
    wide_compliant: bool
    free3_compliant: bool
    free4_compliant: bool
    spontaneous_birth: bool

    def strongest_path_type(self) -> str | None:
        """Smallest path class whose absence blocks 0/2 information."""
        if self.diagonal_compliant:
            return "diagonal"
        if self.free3_compliant:
            return "free3"
        if self.wide_compliant:
            return "wide"
        if self.free4_compliant:
            return "free4"
        return None

    def as_dict(self) -> dict:
        return {
            "empty_compliant": self.empty_compliant,
            "diagonal_compliant": self.diagonal_compliant,
            "wide_compliant": self.wide_compliant,
            "free3_compliant": self.free3_compliant,
            "free4_compliant": self.free4_compliant,
            "spontaneous_birth": self.spontaneous_birth,
        }


def _constant_over_swaps(table: Sequence[int], key: tuple[int, ...], positions: Iterable[int]) -> bool:
    """f is unchanged by any 0<->2 substitution at the given non-1 positions."""
    free = [p for p in positions if key[p] != 1]
    base = table[tuple_index(*key)]
    for choice in itertools.product((0, 2), repeat=len(free)):
        alt = list(key)
        for p, s in zip(free, choice):
            alt[p] = s
        if table[tuple_index(*alt)] != base:
            return False
    return True


def _empty_ok(table) -> bool:
    return all(_constant_over_swaps(table, key, (0, 4)) for key in TUPLES)


def _diagonal_ok(table) -> bool:
    return all(_constant_over_swaps(table, key, (0, 2, 4)) for key in TUPLES)


def _wide_ok(table) -> bool:
    for key in TUPLES:
        a, b, c, d, e = key
        left, right = new_first_level(*key)
        if c == 1 and right == 1 and not _constant_over_swaps(table, key, (0, 3, 4)):
            return False
        if c == 1 and left == 1 and not _constant_over_swaps(table, key, (0, 1, 4)):
            return False
    return True


def _free_ok(table, theta: int) -> bool:
    for key in TUPLES:
        a, b, c, d, e = key
        left, right = new_first_level(*key)
        if delta(b) + delta(c) + delta(d) + left + right >= theta:
            if not _constant_over_swaps(table, key, range(5)):
                return False
    return True


def classify_table(table: Sequence[int]) -> ComplianceReport:
    empty = _empty_ok(table)
    birth = any(table[tuple_index(*key)] == 2 for key in TUPLES if 2 not in key)
    return ComplianceReport(
        empty_compliant=empty,
        diagonal_compliant=empty and _diagonal_ok(table),
        wide_compliant=empty and _wide_ok(table),
        free3_compliant=empty and _free_ok(table, 3),
        free4_compliant=empty and _free_ok(table, 4),
        spontaneous_birth=birth,
    )


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class WebRule:
    id: str
    table: tuple[int, ...]
    compliance: ComplianceReport = field(compare=False)
    palette_rgb: tuple[int, int, int] = field(default=(30, 60, 220), compare=False)

    def __call__(self, a, b, c, d, e) -> int:
        return self.table[tuple_index(a, b, c, d, e)]

    def as_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.uint8)


def validate_web_rule(table: Sequence[int], rule_id: str = "custom", palette_rgb=(30, 60, 220)) -> WebRule:
    table = tuple(int(v) for v in table)
    if len(table) != 243:
        raise WebRuleError(f"a web rule needs 243 entries, got {len(table)}")
    if table[0] != 0:
        raise WebRuleError("quiescence: f(0,0,0,0,0) must be 0")
    for key in TUPLES:
        out = table[tuple_index(*key)]
        if out not in (0, 1, 2):
            raise WebRuleError(f"entry {key} -> {out} is not a state")
        a, b, c, d, e = key
        if delta(out) != (delta(b) + delta(c) + delta(d)) % 2:
            raise WebRuleError(f"first-level condition fails at {key} -> {out}")
    return WebRule(rule_id, table, classify_table(table), palette_rgb)


def classify_compliance(rule: WebRule) -> ComplianceReport:
    return classify_table(rule.table)


def _n1(*xs) -> int:
    return sum(1 for v in xs if v == 1)


def _n2(*xs) -> int:
    return sum(1 for v in xs if v == 2)


def _n12(*xs) -> int:
    return sum(1 for v in xs if v != 0)


def _w30(a1, a2, a3) -> int:
    return (a1 + a2 + a3 + a2 * a3) % 2


def _birth_web_xor(a, b, c, d, e, l, r):
    return _n2(b, d) == 1


def _birth_modified_web_xor(a, b, c, d, e, l, r):
    return _n2(b, d) == 1 or (_n2(b, d) > 1 and _n1(l, b, c, d, r) >= 1)


def _birth_web_rule30(a, b, c, d, e, l, r):
    ones = _n1(l, b, c, d, r)
    if ones > 2:
        return False
    twos = (int(b == 2), int(c == 2), int(d == 2))
    return _w30(*twos) == 1 or (_n2(b, c, d) >= 1 and ones >= 1)


def _birth_extended_1or3(a, b, c, d, e, l, r):
    return _n12(l, r, b, c, d) in (1, 3)


def _birth_piggyback(a, b, c, d, e, l, r):
    near = _n12(l, c, r)
    return near == 2 or (near <= 1 and _n12(l, b, c, d, r) in (1, 3))


def _birth_web_1or3(a, b, c, d, e, l, r):
    return _n2(b, c, d) % 2 == 1


_BIRTH: dict[str, Callable] = {
    "web_xor": _birth_web_xor,
    "modified_web_xor": _birth_modified_web_xor,
    "web_rule30": _birth_web_rule30,
    "extended_1or3": _birth_extended_1or3,
    "piggyback": _birth_piggyback,
    "web_1or3": _birth_web_1or3,
}


def table_from_birth(birth: Callable) -> tuple[int, ...]:
    """Table of a web rule: 1 on odd first-level sum, else 2 where ``birth`` holds."""
    table = [0] * 243
    for key in TUPLES:
        a, b, c, d, e = key
        if (delta(b) + delta(c) + delta(d)) % 2 == 1:
            out = 1
        else:
            l, r = new_first_level(*key)
            out = 2 if birth(a, b, c, d, e, l, r) else 0
        table[tuple_index(*key)] = out
    return tuple(table)


_BUILTIN_CACHE: dict[str, WebRule] = {}


def builtin_rule(name: str) -> WebRule:
    if name not in _BIRTH:
        raise KeyError(f"unknown rule {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    if name not in _BUILTIN_CACHE:
        _BUILTIN_CACHE[name] = validate_web_rule(table_from_birth(_BIRTH[name]), name, _PALETTES[name])
    return _BUILTIN_CACHE[name]


def random_web_rule(rng: np.random.Generator, rule_id: str = "random") -> WebRule:
    """A random valid web rule.

    The 0/2 output is a random function of a "view" of the neighbourhood: the
    first-level values everywhere plus the exact states at a random subset of
    positions.  Small views give compliant rules, large ones generic rules.
    """
    exact = [p for p in range(5) if rng.random() < 0.4]
    threshold = int(rng.integers(0, 6))
    choices: dict[tuple, int] = {}
    table = [0] * 243
    for key in TUPLES:
        a, b, c, d, e = key
        if (delta(b) + delta(c) + delta(d)) % 2 == 1:
            table[tuple_index(*key)] = 1
            continue
        l, r = new_first_level(*key)
        crowded = delta(b) + delta(c) + delta(d) + l + r >= threshold
        view = tuple(key[p] if (p in exact and not crowded) else delta(key[p]) for p in range(5))
        view = view + tuple(key[p] for p in (1, 2, 3) if not crowded and p not in exact)
        if view not in choices:
            choices[view] = int(rng.integers(0, 2)) * 2
        table[tuple_index(*key)] = choices[view]
    table[0] = 0
    return validate_web_rule(table, rule_id)


# ---------------------------------------------------------------------------
# ternary configurations and evolution


@dataclass(frozen=True)
class TernaryConfig:
    kind: str
    offset: int
    states: tuple[int, ...]

    def __post_init__(self):
        states = tuple(int(s) for s in self.states)
        if any(s not in (0, 1, 2) for s in states):
            raise ValueError("ternary configs hold only 0, 1 and 2")
        offset = self.offset
        if self.kind == "finite":
            lo = 0
            while lo < len(states) and states[lo] == 0:
                lo += 1
            hi = len(states)
            while hi > lo and states[hi - 1] == 0:
                hi -= 1
            states = states[lo:hi]
            offset = offset + lo if states else 0
        elif self.kind == "periodic":
            if not states:
                raise ValueError("periodic config needs a period of at least 1")
            shift = offset % len(states)
            if shift:
                states = states[-shift:] + states[:-shift]
            offset = 0
        else:
            raise ValueError(f"unknown config kind {self.kind!r}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def finite(cls, states: Sequence[int] | str, offset: int = 0) -> "TernaryConfig":
        return cls("finite", offset, tuple(int(s) for s in states))

    @classmethod
    def periodic(cls, states: Sequence[int] | str, offset: int = 0) -> "TernaryConfig":
        return cls("periodic", offset, tuple(int(s) for s in states))

    @classmethod
    def parse(cls, text: str) -> "TernaryConfig":
        parsed = parse_seed(text, "012")
        return cls(parsed.kind, parsed.offset, parsed.states)

    @classmethod
    def from_array(cls, arr: np.ndarray, offset: int) -> "TernaryConfig":
        return cls("finite", offset, tuple(int(v) for v in arr))

    @property
    def is_empty(self) -> bool:
        return self.kind == "finite" and not self.states

    @property
    def left(self) -> int:
        return self.offset

    @property
    def right(self) -> int:
        return self.offset + len(self.states) - 1

    def cell(self, x: int) -> int:
        if self.kind == "periodic":
            return self.states[x % len(self.states)]
        i = x - self.offset
        if 0 <= i < len(self.states):
            return self.states[i]
        return 0

    def first_level(self):
        from .additive import BinaryConfig

        bits = [delta(s) for s in self.states]
        if self.kind == "periodic":
            return BinaryConfig.periodic(bits)
        return BinaryConfig.finite(bits, self.offset)

    def to_text(self) -> str:
        return format_seed(self.kind, self.offset, self.states)

    def __str__(self) -> str:
        return self.to_text()


def neighbourhood_codes(padded: np.ndarray) -> np.ndarray:
    """Table indices for every interior cell of a row padded by 2 on each side."""
    p = padded.astype(np.int16)
    return 81 * p[:-4] + 27 * p[1:-3] + 9 * p[2:-2] + 3 * p[3:-1] + p[4:]


def step_array(table: np.ndarray, row: np.ndarray) -> np.ndarray:
    """One update of a finite window; the result is 2 cells wider on each side."""
    padded = np.concatenate([np.zeros(4, np.uint8), row, np.zeros(4, np.uint8)])
    return table[neighbourhood_codes(padded)]


def step_ring_array(table: np.ndarray, row: np.ndarray) -> np.ndarray:
    padded = np.concatenate([row[-2:], row, row[:2]]) if len(row) >= 2 else np.tile(row, 5)
    return table[neighbourhood_codes(padded)]


def step_web(rule: WebRule, config: TernaryConfig) -> TernaryConfig:
    table = rule.as_array()
    row = np.array(config.states, dtype=np.uint8)
    if config.kind == "periodic":
        return TernaryConfig("periodic", 0, tuple(step_ring_array(table, row)))
    if config.is_empty:
        return config
    return TernaryConfig.from_array(step_array(table, row), config.offset - 2)


def evolve_web(rule: WebRule, config: TernaryConfig, T: int, cell_budget: int = DEFAULT_CELL_BUDGET) -> SpaceTimeDiagram:
    if T < 0:
        raise ValueError("T must be non-negative")
    width = len(config.states) + (4 * T if config.kind == "finite" else 0)
    if (T + 1) * max(width, 1) > cell_budget:
        raise BudgetExceeded(f"{T + 1} rows of width up to {width} exceed the cell budget {cell_budget}")
    rows = [config]
    for _ in range(T):
        rows.append(step_web(rule, rows[-1]))
    return SpaceTimeDiagram(tuple(rows), rule.id)


def evolve_web_window(rule: WebRule, states: np.ndarray, offset: int, T: int, pad: int | None = None) -> tuple[np.ndarray, int]:
    """Evolve a finite row on a fixed window; returns ((T+1, W) array, x of column 0).

    The window is padded by ``pad`` cells (default 2T + 2) on each side, which
    covers every cell a range-2 rule can reach in T steps.
    """
    if pad is None:
        pad = 2 * T + 2
    table = rule.as_array()
    width = len(states) + 2 * pad
    out = np.zeros((T + 1, width), dtype=np.uint8)
    out[0, pad:pad + len(states)] = states
    for t in range(T):
        row = out[t]
        padded = np.concatenate([np.zeros(2, np.uint8), row, np.zeros(2, np.uint8)])
        out[t + 1] = table[neighbourhood_codes(padded)]
    return out, offset - pad


# ---------------------------------------------------------------------------
# two-dimensional solidification rules and their two-level boundary dynamics


@dataclass(frozen=True)
class Rule2D:
    """An isotropic solidification rule on the Moore neighbourhood.

    ``birth`` receives the 3x3 occupation grid (row-major, centre at [1][1],
    centre unoccupied) and decides whether the centre becomes occupied.
    """

    name: str
    birth: Callable[[tuple], bool]


def _box13(grid) -> bool:
    return sum(map(sum, grid)) in (1, 3)


def _piggyback_box(grid) -> bool:
    near = grid[0][1] + grid[1][0] + grid[1][2] + grid[2][1]
    full = sum(map(sum, grid))
    return near == 2 or (near <= 1 and full in (1, 3))


RULES_2D = {"box13": Rule2D("box13", _box13), "piggyback_box": Rule2D("piggyback_box", _piggyback_box)}


def rule_2d(name: str) -> Rule2D:
    if name not in RULES_2D:
        raise KeyError(f"unknown 2D rule {name!r}; known: {', '.join(RULES_2D)}")
    return RULES_2D[name]


@dataclass(frozen=True)
class Grid2D:
    width: int
    height: int
    x0: int
    y0: int
    occupied_at: np.ndarray  # first occupation time, -1 = never within the horizon

    def occupation_map(self) -> dict[tuple[int, int], int]:
        ys, xs = np.nonzero(self.occupied_at >= 0)
        return {(int(x) + self.x0, int(y) + self.y0): int(self.occupied_at[y, x]) for y, x in zip(ys, xs)}


def solidify_2d(rule2d: Rule2D | str, seed2d: Iterable[tuple[int, int]], T: int) -> Grid2D:
    if isinstance(rule2d, str):
        rule2d = rule_2d(rule2d)
    cells = list(seed2d)
    if T < 0:
        raise ValueError("T must be non-negative")
    xs = [c[0] for c in cells] or [0]
    ys = [c[1] for c in cells] or [0]
    pad = T + 1
    x0, y0 = min(xs) - pad, min(ys) - pad
    width = max(xs) - min(xs) + 1 + 2 * pad
    height = max(ys) - min(ys) + 1 + 2 * pad
    occ = np.zeros((height + 2, width + 2), dtype=bool)
    when = np.full((height, width), -1, dtype=np.int64)
    for x, y in cells:
        occ[y - y0 + 1, x - x0 + 1] = True
        when[y - y0, x - x0] = 0
    # evaluate the predicate on every distinct 3x3 pattern through a 512-entry lookup
    lut = np.zeros(512, dtype=bool)
    for code in range(512):
        if code & (1 << 4):
            continue
        grid = tuple(tuple((code >> (3 * i + j)) & 1 for j in range(3)) for i in range(3))
        lut[code] = bool(rule2d.birth(grid))
    for t in range(1, T + 1):
        code = np.zeros((height, width), dtype=np.int32)
        for i in range(3):
            for j in range(3):
                code |= occ[i:i + height, j:j + width].astype(np.int32) << (3 * i + j)
        born = lut[code] & ~occ[1:-1, 1:-1]
        when[born] = t
        occ[1:-1, 1:-1] |= born
    return Grid2D(width, height, x0, y0, when)


def derive_two_level_ebd(rule2d: Rule2D | str) -> WebRule:
    """Web rule of the two boundary layers of a solidification rule.

    For a cell x that is not in state 1 at time t+1, its Moore neighbourhood
    at time t+1 holds: on the row just below, the cells occupied by time t+1
    (old state 1, or state 2 meaning "occupied one step later"); on its own
    row, the new first-level states of x-1 and x+1; above, nothing.
    """
    if isinstance(rule2d, str):
        rule2d = rule_2d(rule2d)
    # the one-level boundary dynamics must be one_or_3
    for bits in itertools.product((0, 1), repeat=3):
        grid = (bits, (0, 0, 0), (0, 0, 0))
        if bool(rule2d.birth(grid)) != (sum(bits) % 2 == 1):
            raise WebRuleError(f"{rule2d.name}: first-level boundary dynamics is not one_or_3 at {bits}")

    def occ(s):
        return 1 if s != 0 else 0

    def birth(a, b, c, d, e, l, r):
        grid = ((occ(b), occ(c), occ(d)), (l, 0, r), (0, 0, 0))
        return rule2d.birth(grid)

    return validate_web_rule(table_from_birth(birth), f"ebd2({rule2d.name})")
