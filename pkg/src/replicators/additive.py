"""Exact evolution of the additive rules ``one_or_3`` and ``xor`` on {0,1} rows.

Rows are Python ints used as bitsets: bit ``i`` of ``word`` is the state of
cell ``offset + i``.  Finite rows are kept trimmed (bit 0 and the top bit are
set) so two equal configurations always compare equal.  Periodic rows store
one period starting at cell 0.

The single-site diagram (one 1 at the origin under ``one_or_3``) is the
building block for duality: the state at (x, t) from a finite seed A is the
parity of ``single_site(t, x - y)`` over y in A.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import gf2
from .seeds import format_seed, parse_seed

RULES = ("one_or_3", "xor")
DEFAULT_CELL_BUDGET = 1 << 28


class BudgetExceeded(RuntimeError):
    """Raised when a simulation would exceed the configured cell budget."""


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class BinaryConfig:
    kind: str
    offset: int
    word: int
    length: int

    def __post_init__(self):
        if self.kind == "finite":
            word, offset = self.word, self.offset
            if word == 0:
                offset = 0
            else:
                tz = (word & -word).bit_length() - 1
                word >>= tz
                offset += tz
            object.__setattr__(self, "word", word)
            object.__setattr__(self, "offset", offset)
            object.__setattr__(self, "length", word.bit_length())
        elif self.kind == "periodic":
            sigma = self.length
            if sigma < 1:
                raise ValueError("periodic config needs a period of at least 1")
            mask = (1 << sigma) - 1
            word = self.word & mask
            shift = self.offset % sigma
            if shift:
                # re-anchor the period at cell 0
                word = ((word << shift) | (word >> (sigma - shift))) & mask
            object.__setattr__(self, "word", word)
            object.__setattr__(self, "offset", 0)
        else:
            raise ValueError(f"unknown config kind {self.kind!r}")

    # constructors
    @classmethod
    def finite(cls, bits: Sequence[int] | str = (), offset: int = 0) -> "BinaryConfig":
        return cls("finite", offset, _pack(bits), 0)

    @classmethod
    def periodic(cls, bits: Sequence[int] | str, offset: int = 0) -> "BinaryConfig":
        bits = [int(b) for b in bits]
        return cls("periodic", offset, _pack(bits), len(bits))

    @classmethod
    def from_word(cls, word: int, offset: int = 0) -> "BinaryConfig":
        return cls("finite", offset, word, 0)

    @classmethod
    def from_sites(cls, sites: Iterable[int]) -> "BinaryConfig":
        sites = sorted(set(sites))
        if not sites:
            return cls.empty()
        base = sites[0]
        word = 0
        for s in sites:
            word |= 1 << (s - base)
        return cls("finite", base, word, 0)

    @classmethod
    def empty(cls) -> "BinaryConfig":
        return cls("finite", 0, 0, 0)

    @classmethod
    def parse(cls, text: str) -> "BinaryConfig":
        parsed = parse_seed(text, "01")
        if parsed.kind == "periodic":
            return cls.periodic(parsed.states, parsed.offset)
        return cls.finite(parsed.states, parsed.offset)

    # queries
    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.word >> i) & 1 for i in range(self.length))

    @property
    def is_empty(self) -> bool:
        return self.word == 0

    @property
    def left(self) -> int:
        return self.offset

    @property
    def right(self) -> int:
        return self.offset + self.length - 1

    def cell(self, x: int) -> int:
        if self.kind == "periodic":
            return (self.word >> (x % self.length)) & 1
        i = x - self.offset
        if i < 0 or i >= self.length:
            return 0
        return (self.word >> i) & 1

    def segment(self, a: int, b: int) -> int:
        """Bits of cells a..b as an int (bit 0 = cell a)."""
        if b < a:
            return 0
        width = b - a + 1
        if self.kind == "periodic":
            return _ring_window(self.word, self.length, a, width)
        shift = a - self.offset
        w = self.word >> shift if shift >= 0 else self.word << -shift
        return w & ((1 << width) - 1)

    def sites(self) -> list[int]:
        out = []
        w = self.word
        while w:
            low = w & -w
            out.append(self.offset + low.bit_length() - 1)
            w ^= low
        return out

    def to_text(self) -> str:
        return format_seed(self.kind, self.offset, self.bits)

    def __str__(self) -> str:
        return self.to_text()


def _pack(bits: Sequence[int] | str) -> int:
    word = 0
    for i, b in enumerate(bits):
        b = int(b)
        if b not in (0, 1):
            raise ValueError("binary configs hold only 0 and 1")
        word |= b << i
    return word


def _ring_window(word: int, sigma: int, start: int, width: int) -> int:
    out = 0
    for i in range(width):
        out |= ((word >> ((start + i) % sigma)) & 1) << i
    return out


# ---------------------------------------------------------------------------
# one step


def step_word(word: int, rule: str = "one_or_3") -> int:
    """Finite row update; the result is anchored one cell to the left."""
    if rule == "one_or_3":
        return word ^ (word << 1) ^ (word << 2)
    if rule == "xor":
        return word ^ (word << 2)
    raise ValueError(f"unknown additive rule {rule!r}")


def ring_rotl(word: int, n: int) -> int:
    """Bit x of the result is bit x-1 of ``word`` on a ring of n cells."""
    mask = (1 << n) - 1
    return ((word << 1) | (word >> (n - 1))) & mask


def ring_rotr(word: int, n: int) -> int:
    mask = (1 << n) - 1
    return ((word >> 1) | (word << (n - 1))) & mask


def step_ring(word: int, n: int, rule: str = "one_or_3") -> int:
    left = ring_rotl(word, n)
    right = ring_rotr(word, n)
    if rule == "one_or_3":
        return left ^ word ^ right
    if rule == "xor":
        return left ^ right
    raise ValueError(f"unknown additive rule {rule!r}")


def step_additive(config: BinaryConfig, rule: str = "one_or_3") -> BinaryConfig:
    if config.kind == "periodic":
        return BinaryConfig("periodic", 0, step_ring(config.word, config.length, rule), config.length)
    return BinaryConfig("finite", config.offset - 1, step_word(config.word, rule), 0)


# ---------------------------------------------------------------------------
# diagrams


@dataclass(frozen=True)
class SpaceTimeDiagram:
    rows: tuple
    rule_id: str

    @property
    def T(self) -> int:
        return len(self.rows) - 1

    def state(self, x: int, t: int) -> int:
        return self.rows[t].cell(x)

    def extent(self) -> tuple[int, int]:
        """Smallest x-range covering every finite row's support."""
        lefts = [r.left for r in self.rows if not r.is_empty]
        rights = [r.right for r in self.rows if not r.is_empty]
        if not lefts:
            return 0, 0
        return min(lefts), max(rights)

    def as_array(self, x0: int | None = None, x1: int | None = None) -> np.ndarray:
        """States on [x0, x1] x [0, T] as a (T+1, width) uint8 array."""
        if x0 is None or x1 is None:
            lo, hi = self.extent()
            x0 = lo if x0 is None else x0
            x1 = hi if x1 is None else x1
        width = x1 - x0 + 1
        out = np.zeros((len(self.rows), width), dtype=np.uint8)
        for t, row in enumerate(self.rows):
            out[t] = row_to_array(row, x0, x1)
        return out


def row_to_array(row, x0: int, x1: int) -> np.ndarray:
    width = x1 - x0 + 1
    if hasattr(row, "states"):
        return np.array([row.cell(x) for x in range(x0, x1 + 1)], dtype=np.uint8)
    seg = row.segment(x0, x1)
    raw = seg.to_bytes((width + 7) // 8 or 1, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:width]


def evolve(config: BinaryConfig, rule: str = "one_or_3", T: int = 0, cell_budget: int = DEFAULT_CELL_BUDGET) -> SpaceTimeDiagram:
    if T < 0:
        raise ValueError("T must be non-negative")
    width = config.length if config.kind == "periodic" else config.length + 2 * T
    if (T + 1) * max(width, 1) > cell_budget:
        raise BudgetExceeded(f"{T + 1} rows of width up to {width} exceed the cell budget {cell_budget}")
    rows = [config]
    for _ in range(T):
        rows.append(step_additive(rows[-1], rule))
    return SpaceTimeDiagram(tuple(rows), rule)


# ---------------------------------------------------------------------------
# the single-site diagram


class _SingleSite:
    """Cached rows of the single-site one_or_3 diagram, anchored at -t."""

    def __init__(self):
        self.words = [1]

    def word(self, t: int) -> int:
        words = self.words
        while len(words) <= t:
            words.append(step_word(words[-1]))
        return words[t]


_SINGLE = _SingleSite()


def single_site_word(t: int) -> int:
    """Row t of the single-site diagram; bit i is cell i - t."""
    return _SINGLE.word(t)


def single_site(t: int, x: int) -> int:
    if t < 0 or abs(x) > t:
        return 0
    return (_SINGLE.word(t) >> (x + t)) & 1


@lru_cache(maxsize=None)
def recursive_block(n: int) -> np.ndarray:
    """States of the single-site diagram on [0, 2^n] x [0, 2^n - 1] (row = time)."""
    if n == 0:
        return np.array([[1, 0]], dtype=np.int8)
    if n == 1:
        return np.array([[1, 0, 0], [1, 1, 0]], dtype=np.int8)
    half, quarter = 1 << (n - 1), 1 << (n - 2)
    out = np.full((2 * half, 2 * half + 1), -1, dtype=np.int8)
    big, small = recursive_block(n - 1), recursive_block(n - 2)
    mirrored = small[:, ::-1]
    placements = [
        (big, 0, 0),
        (big, half, half),
        (small, 0, half),
        (small, 0, half + quarter),
        (mirrored, quarter, half),
        (mirrored, quarter, half + quarter),
    ]
    for block, x, t in placements:
        h, w = block.shape
        target = out[t:t + h, x:x + w]
        clash = (target >= 0) & (target != block)
        if clash.any():
            raise AssertionError(f"inconsistent overlap while assembling level {n}")
        target[...] = block
    # anything left unassigned lies outside the light cone (x > t)
    tt, xx = np.nonzero(out < 0)
    if (xx <= tt).any():
        raise AssertionError(f"level {n} left cells inside the cone unassigned")
    out[out < 0] = 0
    return out


def single_site_diagram(T: int, method: str = "direct") -> SpaceTimeDiagram:
    if T < 0:
        raise ValueError("T must be non-negative")
    if method == "direct":
        return evolve(BinaryConfig.finite([1]), "one_or_3", T)
    if method != "recursive":
        raise ValueError(f"unknown method {method!r}")
    n = (T + 1).bit_length() - 1
    if (1 << n) != T + 1:
        raise ValueError("recursive construction needs T + 1 to be a power of two")
    block = recursive_block(n)
    rows = []
    for t in range(T + 1):
        right = block[t, : t + 1]
        bits = list(right[::-1]) + list(right[1:])
        rows.append(BinaryConfig.finite([int(b) for b in bits], -t))
    return SpaceTimeDiagram(tuple(rows), "one_or_3")


# ---------------------------------------------------------------------------
# duality


def duality_eval(seed_sites: Iterable[int], x: int, t: int) -> int:
    total = 0
    for y in seed_sites:
        total ^= single_site(t, x - y)
    return total


def duality_row(seed: BinaryConfig, t: int) -> BinaryConfig:
    """Row t from a finite seed as an XOR of shifted single-site rows."""
    base = single_site_word(t)
    word = 0
    for y in seed.sites():
        word ^= base << (y - seed.offset)
    return BinaryConfig.from_word(word, seed.offset - t)


# ---------------------------------------------------------------------------
# voids


@dataclass(frozen=True)
class Void:
    a: int
    b: int
    t: int
    k: int

    @property
    def width(self) -> int:
        return self.b - self.a + 1

    @property
    def depth(self) -> int:
        """Number of rows in the triangle."""
        return (self.width + 1) // 2

    def contains(self, x: int, t: int) -> bool:
        i = t - self.t
        return i >= 0 and self.a + i <= x <= self.b - i


def _zero_runs(row: BinaryConfig) -> Iterator[tuple[int, int]]:
    """Maximal runs of 0s bounded by 1s on both sides."""
    prev = None
    for s in row.sites():
        if prev is not None and s > prev + 1:
            yield prev + 1, s - 1
        prev = s


def enumerate_voids(seed: BinaryConfig, T: int, min_width: int = 1, rule: str = "one_or_3",
                    diagram: SpaceTimeDiagram | None = None) -> list[Void]:
    if seed.kind != "finite":
        raise ValueError("voids are enumerated for finite seeds")
    if diagram is None:
        diagram = evolve(seed, rule, T)
    rows = diagram.rows
    voids = []
    for t in range(min(T, diagram.T) + 1):
        for a, b in _zero_runs(rows[t]):
            width = b - a + 1
            if width < min_width:
                continue
            if t > 0 and rows[t - 1].segment(a - 1, b + 1) == 0:
                continue
            last = t + (width + 1) // 2 - 1
            if last > T:
                continue
            if any(rows[t + i].segment(a + i, b - i) for i in range(1, last - t + 1)):
                continue
            k = (width + 1).bit_length() - 1
            voids.append(Void(a, b, t, k))
    voids.sort(key=lambda v: (v.t, v.a))
    return voids


# ---------------------------------------------------------------------------
# predecessors


def predecessor(seed: BinaryConfig, rule: str = "one_or_3") -> BinaryConfig | None:
    """The unique finite row whose one_or_3 image is ``seed``, or None."""
    if seed.kind != "finite":
        raise ValueError("predecessors are defined for finite seeds")
    if seed.is_empty:
        return seed
    if seed.length < 3:
        return None
    target = seed.word
    # the parent lives on cells offset+1 .. right-1; solve left to right
    parent = 0
    p2 = p1 = 0
    for i in range(1, seed.length - 1):
        s = (target >> (i - 1)) & 1
        bit = s ^ p1 ^ p2
        parent |= bit << (i - 1)
        p2, p1 = p1, bit
    if step_word(parent, rule) != target:
        return None
    return BinaryConfig.from_word(parent, seed.offset + 1)


def predecessor_count(seed: BinaryConfig, k_max: int) -> int:
    if seed.is_empty:
        return k_max
    count = 0
    current = seed
    while count < k_max:
        current = predecessor(current)
        if current is None:
            break
        count += 1
    return count


def interval_predecessors(segment: int, width: int) -> list[int]:
    """All rows on a window of width+2 cells mapping onto ``segment`` (width cells).

    The first two cells are free; the remaining ones are forced.  Bit 0 of
    each candidate is the cell left of the segment.
    """
    out = []
    for first in range(4):
        row = first
        for i in range(2, width + 2):
            bit = ((segment >> (i - 2)) & 1) ^ ((row >> (i - 1)) & 1) ^ ((row >> (i - 2)) & 1)
            row |= bit << i
        out.append(row)
    return out


def is_subword_of_110(word: int, width: int) -> bool:
    bits = [(word >> i) & 1 for i in range(width)]
    pattern = (1, 1, 0)
    return any(all(bits[i] == pattern[(i + phase) % 3] for i in range(width)) for phase in range(3))


# ---------------------------------------------------------------------------
# GF(2) rank of seed-to-space-time maps


def window_rank(L: int, targets: Iterable[tuple[int, int]]) -> int:
    """Rank of the map from seed bits on [0, L] to the states at ``targets``."""
    rows = []
    mask = (1 << (L + 1)) - 1
    for x, t in targets:
        if t < 0:
            raise ValueError("targets must have t >= 0")
        # entry y is single_site(t, x - y); reverse the row window [x-L, x]
        seg = BinaryConfig.from_word(single_site_word(t), -t).segment(x - L, x)
        rows.append(_reverse_bits(seg, L + 1) & mask)
    return gf2.rank(rows)


def _reverse_bits(word: int, width: int) -> int:
    return int(format(word, f"0{width}b")[::-1], 2) if width else 0


def right_edge_words(seed: BinaryConfig, L: int, k: int, T: int, rule: str = "one_or_3") -> list[int]:
    """Words lambda(i, t), i = t+L-k+1 .. t+L, for t = 0..T (bit 0 = leftmost)."""
    diagram = evolve(seed, rule, T)
    return [diagram.rows[t].segment(t + L - k + 1, t + L) for t in range(T + 1)]


def eventual_period(sequence: Sequence[int], max_period: int) -> int | None:
    """Smallest p <= max_period with s[t+p] = s[t] on the second half of the sequence."""
    n = len(sequence)
    start = n // 2
    for p in range(1, max_period + 1):
        if start + p >= n:
            break
        if all(sequence[t] == sequence[t + p] for t in range(start, n - p)):
            return p
    return None
