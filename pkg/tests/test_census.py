import json
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from replicators import _census_kernels as ck
from replicators.additive import BinaryConfig
from replicators.census import (
    build_phi,
    census_csv,
    lower_bounds,
    mc_random_seed_experiment,
    run_census,
    seed_based_bound,
    truncate,
)
from replicators.replication import LinkString, compute_link, produce_ether
from replicators.webca import builtin_rule

from oracles import all_reachable, ether_signature, ring_rows, slow_census, web_ring_step

RESULTS = Path(__file__).resolve().parent.parent / "results"
KINDS = {"diagonal": {"type": "diagonal"}, "wide": {"type": "wide"}, "free3": {"type": "free", "theta": 3},
         "free4": {"type": "free", "theta": 4}}


def test_phi_shape_and_constraint():
    phi = build_phi(1, 6)
    assert phi.rank == 4 and phi.image_size == 16
    image = sorted(phi.image())
    assert len(set(image)) == 16 and all(phi.constraint(w) for w in image)
    words = {w for w in range(64) if phi.constraint(w)}
    assert set(image) == words
    assert build_phi(4, 48).rank == 32
    with pytest.raises(ValueError):
        build_phi(2, 11)


def test_phi_agrees_with_link_reading():
    rng = random.Random(1)
    for _ in range(100):
        m = rng.randint(1, 3)
        L = rng.randint(3 << m, 40)
        seed = BinaryConfig.from_word(rng.getrandbits(L + 1), 0)
        phi = build_phi(m, L)
        assert phi.apply(seed).equivalent(compute_link(seed, m, L))


def test_phi_image_is_uniform():
    # every image word has the same number of preimages
    phi = build_phi(1, 6)
    counts = {}
    for w in range(1 << 7):
        link = phi.apply(BinaryConfig.from_word(w, 0)).word
        counts[link] = counts.get(link, 0) + 1
    assert len(counts) == 16 and set(counts.values()) == {8}


@pytest.mark.parametrize("name, code", [("extended_1or3", ck.EXTENDED), ("piggyback", ck.PIGGYBACK)])
def test_bitsliced_step_matches_table(name, code):
    table = builtin_rule(name).table
    rng = random.Random(code)
    n = 24
    mask = np.uint64((1 << n) - 1)
    for _ in range(300):
        row = [rng.choice((0, 0, 1, 2)) for _ in range(n)]
        o = sum(1 << i for i, v in enumerate(row) if v == 1)
        w = sum(1 << i for i, v in enumerate(row) if v == 2)
        o2, w2 = ck.web_step(code, np.uint64(o), np.uint64(w), n, mask)
        want = web_ring_step(table, row)
        got = [1 if (int(o2) >> i) & 1 else 2 if (int(w2) >> i) & 1 else 0 for i in range(n)]
        assert got == want


@pytest.mark.parametrize("path", ["diagonal", "wide", "free4"])
def test_blocker_kernel_matches_path_search(path):
    code, theta = {"diagonal": (ck.DIAGONAL, 0), "wide": (ck.WIDE, 0), "free4": (ck.FREE, 4)}[path]
    rng = random.Random(5)
    for _ in range(120):
        m = rng.randint(1, 4)
        k = 1 << m
        w = int(ck.image_word(np.uint64(rng.getrandbits(2 * k)), k))
        bits = [(w >> i) & 1 for i in range(3 * k)]
        rows = ring_rows(bits, k)
        nd, blk = ck.blocker_flags(np.uint64(w), k, code, theta)
        assert nd == any(rows[-1])
        reach = all_reachable(rows, [(x, 0) for x in range(3 * k)], dict(KINDS[path], ring=True))
        assert blk == (not any(t == k - 1 for _, t in reach))


@pytest.mark.parametrize("name, code, path", [("extended_1or3", ck.EXTENDED, "free4"),
                                              ("piggyback", ck.PIGGYBACK, "wide")])
def test_folded_pattern_gives_the_full_ring_ether(name, code, path):
    """Sampled blockers at m = 3, 4: the ether from the folded pattern equals the
    ether of the full link evolved cell by cell."""
    rule = builtin_rule(name)
    path_code = ck.FREE if path == "free4" else ck.WIDE
    rng = random.Random(11)
    seen = set()
    for m in (3, 4):
        k = 1 << m
        found = 0
        while found < 40:
            w = int(ck.image_word(np.uint64(rng.getrandbits(2 * k)), k))
            nd, blk = ck.blocker_flags(np.uint64(w), k, path_code, 4)
            if not (nd and blk):
                continue
            found += 1
            p = int(ck.second_level_pattern(code, np.uint64(w), k))
            bits = [(w >> i) & 1 for i in range(3 * k)]
            want = ether_signature(rule.table, bits)
            if p < 0:
                got = produce_ether(rule, LinkString.from_word(w, m))
            else:
                got = produce_ether(rule, [2 if (p >> i) & 1 else 0 for i in range(k)])
            assert (got.signature, got.temporal_period, got.density2) == want
            seen.add(got.signature)
    assert len(seen) > 2


@pytest.mark.parametrize("name", ["extended_1or3", "piggyback", "web_xor", "web_rule30"])
@pytest.mark.parametrize("m", [1, 2])
def test_census_matches_word_by_word_filter(name, m):
    rule = builtin_rule(name)
    res = run_census(rule, m, combine_reflections=False)
    path = rule.compliance.strongest_path_type()
    nn, nb, tally = slow_census(rule.table, m, KINDS[path])
    assert (res.N_n, res.N_b) == (nn, nb)
    assert res.per_ether == dict(tally)


def test_level_three_census_against_filter():
    rule = builtin_rule("web_xor")
    res = run_census(rule, 3, combine_reflections=False)
    nn, nb, tally = slow_census(rule.table, 3, KINDS["diagonal"])
    assert (res.N_n, res.N_b, res.per_ether) == (nn, nb, dict(tally))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_nondegenerate_fraction(m):
    res = run_census(builtin_rule("extended_1or3"), m)
    assert Fraction(res.N_n, res.total_image) == Fraction(3, 4)


def test_level_three_extended_structure():
    res = run_census(builtin_rule("extended_1or3"), 3)
    assert res.unresolved == 0
    for sig, ether, _ in res.rows():
        assert ether.spatial_period & (ether.spatial_period - 1) == 0
        assert sig != "2"
        if sig != "0":
            # cyclic runs of 0s between consecutive 2s have odd length
            i = sig.index("2")
            runs = (sig[i + 1:] + sig[:i + 1]).split("2")[:-1]
            assert all(len(r) % 2 == 1 for r in runs), sig


def test_workers_do_not_change_the_result():
    rule = builtin_rule("piggyback")
    a = run_census(rule, 3, workers=1).as_dict(include_runtime=False)
    b = run_census(rule, 3, workers=3).as_dict(include_runtime=False)
    assert a == b


def test_resume_from_checkpoint(tmp_path):
    rule = builtin_rule("extended_1or3")
    ckpt = tmp_path / "c.npz"
    part = run_census(rule, 3, checkpoint=ckpt, stop_after=100, checkpoint_every=16)
    assert not part.complete
    full = run_census(rule, 3, checkpoint=ckpt)
    assert full.complete
    ref = run_census(rule, 3)
    assert full.as_dict(include_runtime=False) == ref.as_dict(include_runtime=False)


def test_checkpoint_from_other_run_is_rejected(tmp_path):
    ckpt = tmp_path / "c.npz"
    run_census(builtin_rule("extended_1or3"), 3, checkpoint=ckpt, stop_after=10)
    with pytest.raises(ValueError):
        run_census(builtin_rule("piggyback"), 3, checkpoint=ckpt)


def test_bounds_and_csv():
    res = run_census(builtin_rule("extended_1or3"), 3)
    rows, total = lower_bounds(res)
    assert total == Fraction(res.N_b, res.N_n)
    assert all(r.truncated <= r.exact < r.truncated + Fraction(1, 10 ** 4) for r in rows)
    text = census_csv(res)
    assert text.splitlines()[0] == "signature,temporal_period,spatial_period,density2,N_b,lower_bound"
    assert len(text.splitlines()) == len(rows) + 1
    assert truncate(Fraction(2, 3)) == Fraction(6666, 10000)


def test_seed_based_bound():
    assert seed_based_bound(0, 0) == Fraction(1, 4)
    assert seed_based_bound(3, 2) == Fraction(1, 2 ** 11)
    assert seed_based_bound(8, 2) == Fraction(1, 2 ** 16)
    assert seed_based_bound(5, 3) < seed_based_bound(4, 3) and seed_based_bound(4, 3) < seed_based_bound(4, 2)
    with pytest.raises(ValueError):
        seed_based_bound(-1, 0)


def test_rejects_unsupported_levels():
    with pytest.raises(ValueError):
        run_census(builtin_rule("extended_1or3"), 5)
    with pytest.raises(ValueError):
        run_census(builtin_rule("web_xor"), 4)


def test_web_xor_certification_improves_with_length():
    rule = builtin_rule("web_xor")
    missing = []
    for L in (64, 128, 256):
        exp = mc_random_seed_experiment(rule, L, 300, rng_seed=40 + L)
        assert set(exp.counts) <= {"0"}
        assert sum(exp.R_histogram.values()) == 300 - exp.not_certified
        missing.append(exp.not_certified / exp.trials)
    assert missing[0] >= missing[1] >= missing[2]


def _stored(name):
    path = RESULTS / f"{name}.json"
    if not path.exists():
        pytest.skip(f"{path.name} not produced yet; run scripts/run_census.py")
    data = json.loads(path.read_text())
    if not data.get("complete"):
        pytest.skip(f"{path.name} is a partial run")
    return data


def test_stored_extended_level_four():
    data = _stored("extended_1or3_m4")
    assert data["N_n"] == 3_221_225_472
    assert data["N_b"] == 2_663_229_504
    assert data["per_ether"]["0"] == 1_952_489_232
    assert data["unresolved"] == 0


def test_stored_piggyback_level_four():
    data = _stored("piggyback_m4")
    assert len(data["per_ether"]) == 117
    assert data["unresolved"] == 0
