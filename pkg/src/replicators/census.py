"""Exhaustive census of level-2^m links and the ether lower bounds it yields.

Every seed on [0, L] (L >= 3*2^m) has a link in the image of a linear map
from seeds to words of length 3*2^m.  The image is the set of words with
b[i] ^ b[k+i] ^ b[2k+i] = 0 (k = 2^m), so it is enumerated by its first 2k
bits.  For each image word the census checks non-degeneracy and blocking to
depth k and tallies the ether the web rule produces from it.  Since a uniform
seed maps to a uniform image word, N_b / N_n lower-bounds the asymptotic
probability of each ether.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _census_kernels as ck
from .additive import BinaryConfig
from .gf2 import rank
from .percolation import PathType
from .replication import (
    EtherDescriptor,
    LinkString,
    Unresolved,
    certification_path,
    ether_from_signature,
    produce_ether,
    reflected_signature,
    replication_certificate,
)
from .rng import RNG_ALGORITHM, random_int, substream
from .webca import WebRule, builtin_rule

CHECKPOINT_VERSION = 1
CENSUS_ETHER_CAP = 1 << 12
MAX_SHARD_BITS = 12
MAX_GENERIC_LEVEL = 3
MAX_LEVEL = 4


# ---------------------------------------------------------------------------
# the seed-to-link map


@dataclass(frozen=True)
class PhiMap:
    """Matrix of the seed-to-link map; row i is a bitmask over seed sites 0..L."""

    m: int
    L: int
    rows: tuple[int, ...]
    rank: int

    @property
    def k(self) -> int:
        return 1 << self.m

    @property
    def n(self) -> int:
        return 3 << self.m

    @property
    def free_bits(self) -> int:
        return 2 << self.m

    @property
    def image_size(self) -> int:
        return 1 << self.free_bits

    def constraint(self, word: int) -> bool:
        k = self.k
        kmask = (1 << k) - 1
        return ((word ^ (word >> k) ^ (word >> (2 * k))) & kmask) == 0

    def apply(self, seed: BinaryConfig) -> LinkString:
        if seed.kind != "finite" or (not seed.is_empty and (seed.left < 0 or seed.right > self.L)):
            raise ValueError("seed must be supported in [0, L]")
        sites = seed.segment(0, self.L)
        bits = tuple(bin(row & sites).count("1") & 1 for row in self.rows)
        return LinkString(self.m, bits)

    def image_word(self, u: int) -> int:
        k = self.k
        return u | (((u ^ (u >> k)) & ((1 << k) - 1)) << (2 * k))

    def image(self) -> Iterator[int]:
        for u in range(self.image_size):
            yield self.image_word(u)


def build_phi(m: int, L: int) -> PhiMap:
    k = 1 << m
    n = 3 * k
    if m < 0 or L < n:
        raise ValueError(f"need L >= {n} for level {k}")
    # one period of the link of a single site: 1 at 0 and k, 0 elsewhere
    period = [1 if i in (0, k) else 0 for i in range(n)]
    rows = []
    for i in range(n):
        # seed site j sits L-j cells from the right end of the J-interval
        rows.append(sum(period[(i + k + L - j) % n] << j for j in range(L + 1)))
    r = rank(rows)
    if r != 2 * k:
        raise RuntimeError(f"seed-to-link matrix has rank {r}, expected {2 * k}")
    for c in range(k):
        combo = 0
        for i in range(c, n, k):
            combo ^= rows[i]
        if combo:
            raise RuntimeError("image does not satisfy the three-block constraint")
    return PhiMap(m, L, tuple(rows), r)


# ---------------------------------------------------------------------------
# census


@dataclass
class CensusResult:
    rule_id: str
    m: int
    path_type: str
    total_image: int
    N_n: int
    N_b: int
    per_ether: dict[str, int]
    ethers: dict[str, EtherDescriptor]
    unresolved: int
    combined_reflections: bool
    reflections: dict[str, str | None] = field(default_factory=dict)
    unresolved_words: list[int] = field(default_factory=list)
    runtime_ms: float = 0.0
    complete: bool = True

    def rows(self) -> list[tuple[str, EtherDescriptor, int]]:
        order = sorted(self.per_ether, key=lambda s: (self.ethers[s].spatial_period, self.ethers[s].temporal_period, s))
        return [(s, self.ethers[s], self.per_ether[s]) for s in order]

    def as_dict(self, include_runtime: bool = True) -> dict:
        out = {
            "rule_id": self.rule_id,
            "m": self.m,
            "path_type": self.path_type,
            "total_image": self.total_image,
            "N_n": self.N_n,
            "N_b": self.N_b,
            "degenerate_fraction_complement": _rational(Fraction(self.N_n, self.total_image)) if self.total_image else None,
            "per_ether": {s: n for s, _, n in self.rows()},
            "ethers": {s: e.as_dict() for s, e, _ in self.rows()},
            "reflections": {s: self.reflections.get(s) for s, _, _ in self.rows()},
            "unresolved": self.unresolved,
            "unresolved_words": [format(w, "x") for w in self.unresolved_words[:64]],
            "combined_reflections": self.combined_reflections,
            "complete": self.complete,
        }
        if include_runtime:
            out["runtime_ms"] = round(self.runtime_ms, 3)
        return out

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.as_dict(include_runtime), indent=2, sort_keys=True)


def _rational(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator, "decimal": f"{float(q):.10f}"}


def _rule_code(rule: WebRule) -> int:
    if rule.table == builtin_rule("extended_1or3").table:
        return ck.EXTENDED
    if rule.table == builtin_rule("piggyback").table:
        return ck.PIGGYBACK
    return ck.GENERIC


def _path_args(path: PathType) -> tuple[int, int]:
    if path.tag == "empty":
        raise ValueError("the census certifies with diagonal, wide or free paths")
    return {"diagonal": ck.DIAGONAL, "wide": ck.WIDE, "free": ck.FREE}[path.tag], path.theta


def shard_layout(m: int) -> tuple[int, int]:
    """(number of shards, words per shard) for level 2^m."""
    bits = 2 << m
    sbits = min(MAX_SHARD_BITS, bits)
    return 1 << sbits, 1 << (bits - sbits)


def _scan_shard(args):
    m, shard, path_code, theta, rule_code = args
    k = 1 << m
    nshards, size = shard_layout(m)
    tally = np.zeros(1 << k, np.int64) if rule_code != ck.GENERIC else np.zeros(1, np.int64)
    buf = np.zeros(size, np.uint64)
    nd, nb, nw = ck.census_shard(k, shard * size, (shard + 1) * size, path_code, theta, rule_code, tally, buf)
    return shard, int(nd), int(nb), tally, buf[:nw].copy()


class _State:
    """Cumulative tallies, serializable as a checkpoint."""

    def __init__(self, rule_id: str, m: int, path: str, nshards: int, k: int):
        self.rule_id, self.m, self.path = rule_id, m, path
        self.done = np.zeros(nshards, dtype=bool)
        self.nd = 0
        self.nb = 0
        self.patterns = np.zeros(1 << k, np.int64)
        self.words: list[int] = []

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        os.close(fd)
        try:
            with open(tmp, "wb") as fh:
                np.savez(fh, version=CHECKPOINT_VERSION,
                         meta=np.array(json.dumps({"rule": self.rule_id, "m": self.m, "path": self.path})),
                         done=self.done, counts=np.array([self.nd, self.nb], np.int64),
                         patterns=self.patterns, words=np.array(self.words, np.uint64))
            os.replace(tmp, path)
        except OSError:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def load(self, path: Path) -> None:
        with np.load(path) as data:
            if int(data["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"checkpoint version {int(data['version'])} is not supported")
            meta = json.loads(str(data["meta"]))
            if meta != {"rule": self.rule_id, "m": self.m, "path": self.path}:
                raise ValueError(f"checkpoint belongs to a different census: {meta}")
            if data["done"].shape != self.done.shape or data["patterns"].shape != self.patterns.shape:
                raise ValueError("checkpoint shape mismatch")
            self.done = data["done"].copy()
            self.nd, self.nb = (int(v) for v in data["counts"])
            self.patterns = data["patterns"].copy()
            self.words = [int(w) for w in data["words"]]


def run_census(rule: WebRule, m: int, path_type: PathType | str | None = None, workers: int = 1,
               checkpoint: str | os.PathLike | None = None, combine_reflections: bool = True,
               cap: int = CENSUS_ETHER_CAP, stop_after: int | None = None,
               checkpoint_every: int = 64, progress=None) -> CensusResult:
    """Exact census of the link image at level 2^m.

    ``stop_after`` processes at most that many new shards and returns a partial
    result (``complete`` False); with a checkpoint the run can be resumed.
    """
    t0 = time.perf_counter()
    if not 0 <= m <= MAX_LEVEL:
        raise ValueError(f"census supports levels m in [0, {MAX_LEVEL}]")
    path = PathType.parse(path_type) if path_type is not None else certification_path(rule)
    path_code, theta = _path_args(path)
    rule_code = _rule_code(rule)
    if rule_code == ck.GENERIC and m > MAX_GENERIC_LEVEL:
        raise ValueError(f"only the built-in fast rules are supported above m={MAX_GENERIC_LEVEL}")
    k = 1 << m
    nshards, _ = shard_layout(m)
    state = _State(rule.id, m, str(path), nshards, k)
    ckpt = Path(checkpoint) if checkpoint is not None else None
    if ckpt is not None and ckpt.exists():
        state.load(ckpt)

    todo = [s for s in range(nshards) if not state.done[s]]
    if stop_after is not None:
        todo = todo[:stop_after]
    jobs = [(m, s, path_code, theta, rule_code) for s in todo]

    def absorb(res, i):
        shard, nd, nb, tally, words = res
        state.nd += nd
        state.nb += nb
        if rule_code != ck.GENERIC:
            state.patterns += tally
        state.words.extend(int(w) for w in words)
        state.done[shard] = True
        if ckpt is not None and (i + 1) % checkpoint_every == 0:
            state.save(ckpt)
        if progress is not None:
            progress(int(state.done.sum()), nshards)

    if workers > 1 and len(jobs) > 1:
        with Pool(workers) as pool:
            for i, res in enumerate(pool.imap(_scan_shard, jobs, chunksize=1)):
                absorb(res, i)
    else:
        for i, job in enumerate(jobs):
            absorb(_scan_shard(job), i)
    if ckpt is not None:
        state.save(ckpt)

    complete = bool(state.done.all())
    result = _summarize(rule, m, path, state, rule_code, combine_reflections, cap)
    result.complete = complete
    result.runtime_ms = (time.perf_counter() - t0) * 1000.0
    return result


def _summarize(rule, m, path, state, rule_code, combine, cap) -> CensusResult:
    k = 1 << m
    raw: Counter = Counter()
    ethers: dict[str, EtherDescriptor] = {}
    unresolved = 0
    unresolved_words: list[int] = []

    def record(ether: EtherDescriptor, count: int):
        raw[ether.signature] += count
        ethers.setdefault(ether.signature, ether)

    if rule_code != ck.GENERIC:
        for p in np.nonzero(state.patterns)[0]:
            states = [2 if (int(p) >> i) & 1 else 0 for i in range(k)]
            count = int(state.patterns[p])
            try:
                record(produce_ether(rule, states, cap), count)
            except Unresolved:
                unresolved += count
                unresolved_words.append(int(p))
    memo: dict[tuple, EtherDescriptor | None] = {}
    for w in state.words:
        link = LinkString.from_word(w, m)
        key = link.canonical()
        if key not in memo:
            try:
                memo[key] = produce_ether(rule, link, cap)
            except Unresolved:
                memo[key] = None
        ether = memo[key]
        if ether is None:
            unresolved += 1
            unresolved_words.append(w)
        else:
            record(ether, 1)

    reflections: dict[str, str | None] = {}
    per: Counter = Counter()
    for sig in sorted(raw):
        try:
            other = reflected_signature(ethers[sig], rule, cap)
        except Unresolved:
            other = sig
        partner = None if other == sig else other
        if combine:
            key = min(sig, other)
            if key not in ethers:
                ethers[key] = ether_from_signature(rule, key, cap)
            per[key] += raw[sig]
            reflections[key] = partner if key == sig else sig
        else:
            per[sig] += raw[sig]
            reflections[sig] = partner
    kept = {s: ethers[s] for s in per}
    return CensusResult(rule.id, m, str(path), 1 << (2 * k), state.nd, state.nb, dict(per), kept,
                        unresolved, combine, reflections, sorted(unresolved_words))


# ---------------------------------------------------------------------------
# bounds and output


@dataclass(frozen=True)
class BoundRow:
    signature: str
    temporal_period: int
    spatial_period: int
    density2: Fraction
    N_b: int
    exact: Fraction
    truncated: Fraction

    @property
    def display_signature(self) -> str:
        from .seeds import compress_zeros

        return compress_zeros(self.signature, min_run=4)


def truncate(q: Fraction, digits: int = 4) -> Fraction:
    scale = 10 ** digits
    return Fraction(math.floor(q * scale), scale)


def lower_bounds(result: CensusResult, digits: int = 4) -> tuple[list[BoundRow], Fraction]:
    """Per-ether bounds N_b/N_n (exact and truncated) and the overall sum."""
    if result.N_n <= 0:
        raise ValueError("no non-degenerate links")
    rows = []
    for sig, ether, nb in result.rows():
        q = Fraction(nb, result.N_n)
        rows.append(BoundRow(sig, ether.temporal_period, ether.spatial_period, ether.density2, nb, q, truncate(q, digits)))
    total = Fraction(sum(r.N_b for r in rows), result.N_n)
    return rows, total


def seed_based_bound(s: int, m: int) -> Fraction:
    """Probability floor for an ether witnessed by a width-s seed with a level-2^m blocker link."""
    if s < 0 or m < 0:
        raise ValueError("need s >= 0 and m >= 0")
    return Fraction(1, 1 << (s + (2 << m)))


def census_csv(result: CensusResult, digits: int = 4) -> str:
    rows, _ = lower_bounds(result, digits)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["signature", "temporal_period", "spatial_period", "density2", "N_b", "lower_bound"])
    for r in rows:
        writer.writerow([r.signature, r.temporal_period, r.spatial_period,
                         f"{r.density2.numerator}/{r.density2.denominator}", r.N_b,
                         f"{float(r.truncated):.{digits}f}"])
    return buf.getvalue()


def write_outputs(result: CensusResult, csv_path: str | os.PathLike, json_path: str | os.PathLike | None = None) -> None:
    Path(csv_path).write_text(census_csv(result))
    if json_path is not None:
        summary = result.as_dict(include_runtime=False)
        rows, total = lower_bounds(result)
        summary["overall_bound"] = _rational(total)
        Path(json_path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Monte Carlo cross-check with random seeds


@dataclass
class SeedExperiment:
    rule_id: str
    L: int
    trials: int
    rng_seed: int
    counts: dict[str, int]
    combined_counts: dict[str, int]
    not_certified: int
    R_histogram: dict[int, int]
    M_histogram: dict[int, int]
    runtime_ms: float = 0.0
    certified_seeds: list = field(default_factory=list)

    def frequency(self, signature: str, combined: bool = True) -> tuple[float, float]:
        """(empirical frequency, binomial standard error)."""
        src = self.combined_counts if combined else self.counts
        p = src.get(signature, 0) / self.trials
        return p, math.sqrt(p * (1 - p) / self.trials)

    @property
    def certified_fraction(self) -> float:
        return 1 - self.not_certified / self.trials

    def as_dict(self) -> dict:
        return {
            "op": "mc_random_seed_experiment",
            "rule": self.rule_id,
            "L": self.L,
            "trials": self.trials,
            "rng_seed": self.rng_seed,
            "rng": RNG_ALGORITHM,
            "not_certified": self.not_certified,
            "counts": dict(sorted(self.counts.items())),
            "combined_counts": dict(sorted(self.combined_counts.items())),
            "R_histogram": {str(k): v for k, v in sorted(self.R_histogram.items())},
            "M_histogram": {str(k): v for k, v in sorted(self.M_histogram.items())},
            "runtime_ms": round(self.runtime_ms, 3),
        }


def mc_random_seed_experiment(rule: WebRule, L: int, trials: int, rng_seed: int, m_max: int = 8,
                              keep_seeds: int = 0) -> SeedExperiment:
    """Certify uniform random binary seeds on [0, L] and histogram the outcomes."""
    t0 = time.perf_counter()
    counts: Counter = Counter()
    combined: Counter = Counter()
    r_hist: Counter = Counter()
    m_hist: Counter = Counter()
    reflect_memo: dict[str, str] = {}
    missing = 0
    kept = []
    for i in range(trials):
        word = random_int(substream(rng_seed, i, domain=5), L + 1)
        seed = BinaryConfig.from_word(word, 0)
        cert = replication_certificate(rule, seed, m_max=m_max, L=L)
        if not cert.certified:
            missing += 1
            continue
        sig = cert.ether.signature
        if sig not in reflect_memo:
            reflect_memo[sig] = reflected_signature(cert.ether, rule)
        counts[sig] += 1
        combined[min(sig, reflect_memo[sig])] += 1
        r_hist[cert.R] += 1
        m_hist[cert.M] += 1
        if len(kept) < keep_seeds:
            kept.append((word, cert))
    return SeedExperiment(rule.id, L, trials, rng_seed, dict(counts), dict(combined), missing, dict(r_hist),
                          dict(m_hist), (time.perf_counter() - t0) * 1000.0, kept)
