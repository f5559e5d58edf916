"""Links, blockers, ethers and replication certificates.

The level-2^m link of a binary seed on [0, L] is the period-3*2^m word that
the first level shows on the row 2^m above any wide enough perturbed void
of the single-site diagram.  If the link blocks the path class matching the
rule's compliance, the seed is a replicator and its ether is whatever the web
rule settles into from the periodic row link^inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import ndimage

from .additive import BinaryConfig, single_site_word, step_ring
from .percolation import PathType, VoidRegion, _Ring, principal_void, propagate
from .webca import TernaryConfig, WebRule, evolve_web_window, step_ring_array

DEFAULT_ETHER_CAP = 1 << 16


class Unresolved(RuntimeError):
    """Raised when an orbit does not close within the iteration cap."""


# ---------------------------------------------------------------------------
# links


@dataclass(frozen=True)
class LinkString:
    m: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != 3 << self.m:
            raise ValueError(f"a level-{1 << self.m} link has {3 << self.m} cells, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("link cells must be 0 or 1")

    @classmethod
    def from_text(cls, text: str, m: int | None = None) -> "LinkString":
        bits = tuple(int(c) for c in text.strip())
        if m is None:
            n = len(bits) // 3
            m = n.bit_length() - 1
        return cls(m, bits)

    @classmethod
    def from_word(cls, word: int, m: int) -> "LinkString":
        return cls(m, tuple((word >> i) & 1 for i in range(3 << m)))

    @property
    def n(self) -> int:
        return 3 << self.m

    @property
    def word(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    @property
    def text(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def hex(self) -> str:
        return format(self.word, f"0{(self.n + 3) // 4}x")

    def rotations(self) -> set[tuple[int, ...]]:
        b = self.bits
        return {b[i:] + b[:i] for i in range(len(b))}

    def equivalent(self, other: "LinkString") -> bool:
        return self.m == other.m and other.bits in self.rotations()

    def canonical(self) -> tuple[int, ...]:
        return min(self.rotations())

    def __xor__(self, other: "LinkString") -> "LinkString":
        return LinkString(self.m, tuple(a ^ b for a, b in zip(self.bits, other.bits)))


def seed_extent(seed: BinaryConfig, L: int | None) -> int:
    if seed.kind != "finite":
        raise ValueError("links are defined for finite seeds")
    if not seed.is_empty and seed.left < 0:
        raise ValueError("seed must be supported in [0, L]")
    if L is None:
        L = max(seed.right, 0) if not seed.is_empty else 0
    if not seed.is_empty and seed.right > L:
        raise ValueError("seed extends beyond L")
    return L


def link_void(L: int, m: int, extra: int = 0, mirrored: bool = False) -> VoidRegion:
    """A principal void wide enough that the J-interval holds a full link period."""
    n = m + 1
    while (1 << n) < L + 1 + (1 << m):
        n += 1
    n += extra
    return principal_void(2 * (n - 1), L, mirrored)


def compute_link(seed: BinaryConfig, m: int, L: int | None = None, void: VoidRegion | None = None) -> LinkString:
    """Read the level-2^m link from the row 2^m above a perturbed void.

    The returned rotation starts at the left end of the J-interval
    [a - 2^m, b + 2^m] above the void's top interval [a, b].
    """
    L = seed_extent(seed, L)
    if m < 0:
        raise ValueError("m must be non-negative")
    if void is None:
        void = link_void(L, m)
    if void.w_top is None:
        raise ValueError("void is narrower than the seed")
    a, b = void.w_top
    k = 1 << m
    if b - a + 1 < k:
        raise ValueError("void too narrow for this level")
    t = void.t - k
    if t < 0:
        raise ValueError("void starts too early for this level")
    row = _row_at(seed, t)
    start = a - k
    return LinkString(m, tuple(row.cell(start + i) for i in range(3 * k)))


def _row_at(seed: BinaryConfig, t: int) -> BinaryConfig:
    base = single_site_word(t)
    word = 0
    for y in seed.sites():
        word ^= base << (y - seed.offset)
    return BinaryConfig.from_word(word, seed.offset - t)


# ---------------------------------------------------------------------------
# blockers


def link_rows(link: LinkString, depth: int) -> list[int]:
    rows = [link.word]
    for _ in range(depth - 1):
        rows.append(step_ring(rows[-1], link.n))
    return rows


def is_nondegenerate(link: LinkString, depth: int) -> bool:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    return link_rows(link, depth)[-1] != 0


def is_blocker(link: LinkString, path_type: PathType | str, depth: int) -> bool:
    """No path of the type from row 0 to row depth-1 of the evolution of link^inf."""
    path = PathType.parse(path_type)
    if path.tag == "empty":
        raise ValueError("empty paths percolate; certification uses diagonal, wide or free paths")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rows = link_rows(link, depth)
    geom = _Ring(link.n)
    reach = propagate(rows, [geom.mask], path, geom)
    return reach[-1] == 0


# ---------------------------------------------------------------------------
# ethers


def minimal_period(word: str) -> str:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word == word[:p] * (n // p):
            return word[:p]
    return word


def least_rotation(word: str) -> str:
    return min(word[i:] + word[:i] for i in range(len(word))) if word else word


def canonical_signature(orbit_rows: Sequence[str] | str) -> str:
    """Shortest minimal-period row over the orbit, then its least rotation."""
    if isinstance(orbit_rows, str):
        orbit_rows = [orbit_rows]
    cands = [least_rotation(minimal_period(r)) for r in orbit_rows]
    shortest = min(len(c) for c in cands)
    return min(c for c in cands if len(c) == shortest)


@dataclass(frozen=True)
class EtherDescriptor:
    signature: str
    spatial_period: int
    temporal_period: int
    density2: Fraction
    burn_in: int = 0
    orbit: tuple[str, ...] = field(default=(), compare=False, repr=False)

    @property
    def is_zero(self) -> bool:
        return self.signature == "0"

    def pattern(self) -> np.ndarray:
        """One temporal period of the ether on one spatial period, as a (tau, sigma) array."""
        if self.orbit:
            rows = [r[: self.spatial_period] for r in self.orbit]
        else:
            rows = [self.signature]
        return np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)

    def as_dict(self) -> dict:
        return {
            "signature": self.signature,
            "sigma": self.spatial_period,
            "tau": self.temporal_period,
            "density2": {"num": self.density2.numerator, "den": self.density2.denominator, "decimal": f"{float(self.density2):.6f}"},
            "burn_in": self.burn_in,
        }


def _row_text(row: np.ndarray) -> str:
    return "".join("0123"[int(v)] for v in row)


def orbit_of_row(rule: WebRule, row: np.ndarray, cap: int = DEFAULT_ETHER_CAP) -> tuple[int, list[np.ndarray]]:
    """(burn-in, cycle rows) of the web CA on a ring started from ``row``."""
    table = rule.as_array()
    seen: dict[bytes, int] = {}
    history: list[np.ndarray] = []
    cur = np.asarray(row, dtype=np.uint8)
    for t in range(cap + 1):
        key = cur.tobytes()
        if key in seen:
            start = seen[key]
            return start, history[start:]
        seen[key] = t
        history.append(cur)
        cur = step_ring_array(table, cur)
    raise Unresolved(f"orbit did not close within {cap} steps")


def ether_from_cycle(cycle: Sequence[np.ndarray], burn_in: int = 0) -> EtherDescriptor:
    texts = [_row_text(r) for r in cycle]
    if any("1" in t for t in texts):
        raise Unresolved("the first level survives on the periodic orbit")
    signature = canonical_signature(texts)
    twos = sum(int(np.count_nonzero(r == 2)) for r in cycle)
    density = Fraction(twos, len(cycle) * len(cycle[0]))
    # store the orbit aligned so its first row is the signature itself
    sigma = len(signature)
    aligned = _aligned_orbit(texts, signature)
    return EtherDescriptor(signature, sigma, len(cycle), density, burn_in, aligned)


def _aligned_orbit(texts: list[str], signature: str) -> tuple[str, ...]:
    sigma = len(signature)
    n = len(texts[0])
    for i, t in enumerate(texts):
        for shift in range(n):
            rot = t[shift:] + t[:shift]
            if rot[:sigma] == signature and rot == signature * (n // sigma):
                ordered = texts[i:] + texts[:i]
                return tuple(r[shift:] + r[:shift] for r in ordered)
    return tuple(texts)


def produce_ether(rule: WebRule, link: LinkString | str | Sequence[int], cap: int = DEFAULT_ETHER_CAP) -> EtherDescriptor:
    """Ether reached by the web rule from the periodic row link^inf (states 0/1/2 allowed)."""
    if isinstance(link, LinkString):
        states = link.bits
    elif isinstance(link, str):
        states = tuple(int(c) for c in link)
    else:
        states = tuple(link)
    burn_in, cycle = orbit_of_row(rule, np.array(states, dtype=np.uint8), cap)
    return ether_from_cycle(cycle, burn_in)


def ether_from_signature(rule: WebRule, signature: str, cap: int = DEFAULT_ETHER_CAP) -> EtherDescriptor:
    return produce_ether(rule, tuple(int(c) for c in signature), cap)


def reflected_signature(ether: EtherDescriptor, rule: WebRule, cap: int = DEFAULT_ETHER_CAP) -> str:
    """Signature of the mirror image of the ether, found by evolving the reflected row."""
    reflected = ether.signature[::-1]
    return ether_from_signature(rule, reflected, cap).signature


def reflection_class(ether: EtherDescriptor, rule: WebRule, cap: int = DEFAULT_ETHER_CAP) -> tuple[str, str | None]:
    other = reflected_signature(ether, rule, cap)
    if other == ether.signature:
        return "symmetric", None
    return "pair", other


# ---------------------------------------------------------------------------
# certificates


@dataclass
class ReplicationCertificate:
    rule: str
    seed: str
    L: int
    M: int | None
    R: int | None
    ether: EtherDescriptor | None
    link_used: LinkString | None
    path_type: PathType
    nondegenerate: bool | None = None
    scanned: list = field(default_factory=list)
    verification: "VerifyReport | None" = None

    @property
    def certified(self) -> bool:
        return self.M is not None

    @property
    def horizon(self) -> int | None:
        """Four times the dyadic time by which a void of width max(L+1, 2^M) has appeared."""
        if self.M is None:
            return None
        need = max(self.L + 1, 1 << self.M)
        return 4 << ((need - 1).bit_length() + 1)

    def verify(self, rule: WebRule, seed: TernaryConfig | None = None, T: int | None = None) -> "VerifyReport":
        """Run verify_replicator at thickness R + L; the seed defaults to the certified binary seed."""
        if not self.certified:
            raise ValueError("no certificate to verify")
        if seed is None:
            seed = TernaryConfig.parse(self.seed)
        self.verification = verify_replicator(rule, seed, self.R + self.L, self.ether, T or self.horizon)
        return self.verification

    def as_dict(self) -> dict:
        return {
            "rule": self.rule,
            "seed": self.seed,
            "L": self.L,
            "path_type": str(self.path_type),
            "M": self.M if self.M is not None else "inf",
            "R": self.R if self.R is not None else "inf",
            "certified": self.certified,
            "ether": self.ether.as_dict() if self.ether else None,
            "link_hex": self.link_used.hex if self.link_used else None,
            "link": self.link_used.text if self.link_used else None,
            "nondegenerate": self.nondegenerate,
            "horizon": self.horizon,
            "skipped_components": self.verification.skipped if self.verification else None,
            "verified": self.verification.ok if self.verification else None,
            "scanned_levels": self.scanned,
        }


def certification_path(rule: WebRule) -> PathType:
    tag = rule.compliance.strongest_path_type()
    if tag is None:
        raise ValueError(f"rule {rule.id} is not diagonal-, wide- or free-compliant")
    return PathType.parse(tag)


def replication_certificate(rule: WebRule, seed: BinaryConfig, m_max: int = 8, L: int | None = None,
                            cap: int = DEFAULT_ETHER_CAP) -> ReplicationCertificate:
    """Smallest level m whose link blocks paths to depth 2^m, with the ether it produces."""
    L = seed_extent(seed, L)
    path = certification_path(rule)
    top = min(m_max, int(math.floor(math.log2(L))) - 1) if L >= 2 else -1
    scanned = []
    for m in range(0, top + 1):
        link = compute_link(seed, m, L)
        blocks = is_blocker(link, path, 1 << m)
        scanned.append({"m": m, "blocker": blocks})
        if blocks:
            ether = produce_ether(rule, link, cap)
            return ReplicationCertificate(rule.id, seed.to_text(), L, m, ether.burn_in + 1, ether, link, path,
                                          is_nondegenerate(link, 1 << m), scanned)
    return ReplicationCertificate(rule.id, seed.to_text(), L, None, None, None, None, path, None, scanned)


# ---------------------------------------------------------------------------
# finite-horizon verification


@dataclass
class VerifyReport:
    ok: bool
    components: int
    checked: int
    skipped: int
    failures: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"ok": self.ok, "components": self.components, "checked": self.checked,
                "skipped_components": self.skipped, "failures": self.failures[:10]}


def single_site_support(T: int, x0: int, width: int) -> np.ndarray:
    """Support of the single-site diagram on [x0, x0+width) x [0, T] as a bool array."""
    out = np.zeros((T + 1, width), dtype=bool)
    for t in range(T + 1):
        row = BinaryConfig.from_word(single_site_word(t), -t)
        seg = row.segment(x0, x0 + width - 1)
        raw = seg.to_bytes((width + 7) // 8 or 1, "little")
        out[t] = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:width].astype(bool)
    return out


def verify_replicator(rule: WebRule, seed: TernaryConfig, r: int, ether: EtherDescriptor, T: int) -> VerifyReport:
    """Check that every bounded component of the complement of the r-thickened
    single-site support, closing before T - sigma - tau, is filled by one
    translate of the ether."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if seed.kind != "finite":
        raise ValueError("seed must be finite")
    left = min(seed.left, 0) if not seed.is_empty else 0
    right = max(seed.right, 0) if not seed.is_empty else 0
    margin = T + r + 3
    x0 = left - margin
    width = (right - left) + 2 * margin + 1
    states, base = evolve_web_window(rule, np.array(seed.states, np.uint8), seed.offset if not seed.is_empty else 0, T)
    # put the evolution on the verification window
    xi = np.zeros((T + 1, width), dtype=np.uint8)
    src_lo = x0 - base
    lo = max(src_lo, 0)
    hi = min(src_lo + width, states.shape[1])
    xi[:, lo - src_lo:hi - src_lo] = states[:, lo:hi]

    support = single_site_support(T, x0, width)
    dist = ndimage.distance_transform_cdt(~support, metric="taxicab")
    thick = dist <= r
    labels, count = ndimage.label(~thick)
    pattern = ether.pattern()
    tau, sigma = pattern.shape
    cutoff = T - sigma - tau
    slices = ndimage.find_objects(labels)
    checked = skipped = 0
    failures = []
    for idx, sl in enumerate(slices, start=1):
        if sl is None:
            continue
        ts, xs = sl
        if xs.start == 0 or xs.stop == width or ts.start == 0 or ts.stop - 1 > cutoff:
            skipped += 1
            continue
        mask = labels[sl] == idx
        tt, xx = np.nonzero(mask)
        tt = tt + ts.start
        xx = xx + xs.start + x0
        vals = xi[tt, xx - x0]
        checked += 1
        if not _fits_ether(vals, tt, xx, pattern):
            failures.append({"component": idx, "t": [int(ts.start), int(ts.stop - 1)],
                             "x": [int(xs.start + x0), int(xs.stop - 1 + x0)]})
    return VerifyReport(not failures, count, checked, skipped, failures)


def _fits_ether(vals: np.ndarray, tt: np.ndarray, xx: np.ndarray, pattern: np.ndarray) -> bool:
    tau, sigma = pattern.shape
    if tau == 1 and sigma == 1:
        return bool(np.all(vals == pattern[0, 0]))
    probe = min(len(vals), 64)
    for dt in range(tau):
        for dx in range(sigma):
            if not np.array_equal(pattern[(tt[:probe] + dt) % tau, (xx[:probe] + dx) % sigma], vals[:probe]):
                continue
            if np.array_equal(pattern[(tt + dt) % tau, (xx + dx) % sigma], vals):
                return True
    return False
