import random

import pytest
from hypothesis import given, strategies as st

from replicators.additive import (
    BinaryConfig,
    BudgetExceeded,
    Void,
    duality_eval,
    duality_row,
    enumerate_voids,
    evolve,
    eventual_period,
    interval_predecessors,
    is_subword_of_110,
    predecessor,
    predecessor_count,
    right_edge_words,
    single_site,
    single_site_diagram,
    single_site_word,
    step_additive,
    step_ring,
    window_rank,
)

from oracles import evolve_lists, step_list, trinomial_parity


def _cells(cfg: BinaryConfig, lo: int, hi: int) -> list[int]:
    return [cfg.cell(x) for x in range(lo, hi + 1)]


@pytest.mark.parametrize("rule", ["one_or_3", "xor"])
@given(bits=st.lists(st.integers(0, 1), min_size=1, max_size=30), offset=st.integers(-20, 20))
def test_step_matches_list_oracle(rule, bits, offset):
    cfg = BinaryConfig.finite(bits, offset)
    got = step_additive(cfg, rule)
    want = step_list(bits, rule)
    assert _cells(got, offset - 1, offset + len(bits)) == want


def test_single_site_is_trinomial_parity():
    for t in range(41):
        for x in range(-t - 2, t + 3):
            assert single_site(t, x) == trinomial_parity(t, x)


def test_periodic_step_matches_ring():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(1, 30)
        w = rng.getrandbits(n)
        cfg = BinaryConfig.periodic([(w >> i) & 1 for i in range(n)])
        nxt = step_additive(cfg)
        assert nxt.kind == "periodic" and nxt.word == step_ring(w, n)


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        evolve(BinaryConfig.parse("1"), "one_or_3", 1000, cell_budget=10_000)


def test_duality_on_random_seeds():
    rng = random.Random(11)
    for _ in range(500):
        L = rng.randint(0, 40)
        word = rng.getrandbits(L + 1)
        seed = BinaryConfig.from_word(word, rng.randint(-10, 10))
        diagram = evolve(seed, "one_or_3", 64)
        for t in range(65):
            assert duality_row(seed, t) == diagram.rows[t]
        sites = seed.sites()
        for _ in range(10):
            t = rng.randint(0, 64)
            x = rng.randint(seed.offset - t - 2, seed.offset + L + t + 2)
            assert duality_eval(sites, x, t) == diagram.state(x, t)


def test_rescaling():
    for m in range(5):
        s = 1 << m
        for a in range(65):
            row = single_site_word(a * s)
            for x in range(-a * s, a * s + 1):
                bit = (row >> (x + a * s)) & 1
                if x % s:
                    assert bit == 0
                else:
                    assert bit == single_site(a, x // s)


def test_recursive_blocks_match_direct_evolution():
    direct = single_site_diagram(1023, "direct")
    recursive = single_site_diagram(1023, "recursive")
    assert direct.rows == recursive.rows


def test_recursive_needs_dyadic_horizon():
    with pytest.raises(ValueError):
        single_site_diagram(100, "recursive")


def test_single_site_voids_small_example():
    voids = enumerate_voids(BinaryConfig.parse("1"), 8, min_width=3)
    assert voids == [Void(-3, -1, 4, 2), Void(1, 3, 4, 2), Void(-3, -1, 6, 2), Void(1, 3, 6, 2)]


def test_voids_are_zero_triangles_with_busy_parents():
    rng = random.Random(2)
    for _ in range(20):
        seed = BinaryConfig.from_word(rng.getrandbits(16) | 1, 0)
        T = 40
        d = evolve(seed, "one_or_3", T)
        for v in enumerate_voids(seed, T, min_width=2, diagram=d):
            for i in range(v.depth):
                assert d.rows[v.t + i].segment(v.a + i, v.b - i) == 0
            assert d.state(v.a - 1, v.t) == 1 and d.state(v.b + 1, v.t) == 1
            if v.t > 0:
                assert d.rows[v.t - 1].segment(v.a - 1, v.b + 1) != 0


def test_above_void_strip():
    T = 256
    diagram = single_site_diagram(T)
    checked = 0
    for v in enumerate_voids(BinaryConfig.parse("1"), T, min_width=3, diagram=diagram):
        k = (v.width + 1).bit_length() - 1
        if v.width != (1 << k) - 1 or k > 6:
            continue
        for m in range(k):
            s = 1 << m
            if v.t - s < 0:
                continue
            seg = _cells(diagram.rows[v.t - s], v.a - s, v.b + s)
            # zeros except at the block separators, which read a subword of (110)^inf
            seps = []
            for i, bit in enumerate(seg):
                if (i + 1) % s == 0:
                    seps.append(bit)
                else:
                    assert bit == 0
            assert len(seg) % s == s - 1
            assert is_subword_of_110(sum(b << j for j, b in enumerate(seps)), len(seps))
            checked += 1
    assert checked > 50


def test_predecessor_counts_exhaustive():
    at_least_one = at_least_two = 0
    for w in range(512):
        c = predecessor_count(BinaryConfig.from_word(w, 0), 2)
        at_least_one += c >= 1
        at_least_two += c >= 2
    assert (at_least_one, at_least_two) == (128, 32)


def test_predecessor_inverts_step_exhaustively():
    for w in range(1 << 12):
        seed = BinaryConfig.from_word(w, 3)
        assert predecessor(step_additive(seed)) == seed


def test_predecessor_rejects_non_images():
    assert predecessor(BinaryConfig.parse("1")) is None
    assert predecessor(BinaryConfig.parse("11")) is None
    assert predecessor(BinaryConfig.parse("111")) == BinaryConfig.parse("1@1")


def test_interval_predecessors_map_onto_segment():
    rng = random.Random(4)
    for _ in range(200):
        width = rng.randint(1, 20)
        seg = rng.getrandbits(width)
        cands = interval_predecessors(seg, width)
        assert len(set(cands)) == 4
        for row in cands:
            image = 0
            for i in range(width):
                bit = ((row >> i) ^ (row >> (i + 1)) ^ (row >> (i + 2))) & 1
                image |= bit << i
            assert image == seg


def test_parents_of_zero_runs_are_110_words():
    rng = random.Random(9)
    for _ in range(40):
        seed = BinaryConfig.from_word(rng.getrandbits(30) | 1, 0)
        d = evolve(seed, "one_or_3", 60)
        for t in range(1, 61):
            row = d.rows[t]
            sites = row.sites()
            for a, b in zip(sites, sites[1:]):
                if b - a < 2:
                    continue
                lo, hi = a + 1, b - 1
                parent = d.rows[t - 1].segment(lo - 1, hi + 1)
                if parent:
                    assert is_subword_of_110(parent, hi - lo + 3)


def test_window_rank_examples():
    assert window_rank(4, [(x, 7) for x in range(7, 12)]) == 5
    assert window_rank(4, [(0, 3)]) == 1


def test_random_edge_windows_have_full_rank():
    for L in range(17):
        for t in range(65):
            assert window_rank(L, [(x, t) for x in range(t, t + L + 1)]) == L + 1


def test_random_interval_instance():
    # single-site row 4 reads 1 then three 0s on [-4, -1]
    assert _cells(BinaryConfig.from_word(single_site_word(4), -4), -4, -1) == [1, 0, 0, 0]
    for x in range(4, 10):
        assert window_rank(8, [(y, 4) for y in range(x, x + 4)]) == 4


def test_right_edge_words_eventually_periodic():
    rng = random.Random(21)
    for _ in range(30):
        L = rng.randint(0, 24)
        seed = BinaryConfig.from_word(rng.getrandbits(L + 1) | (1 << L), 0)
        for k in (1, 2, 5, 8, 16):
            words = right_edge_words(seed, L, k, 200)
            p = eventual_period(words, 2 * k)
            assert p is not None and p <= 2 * k


def test_list_oracle_agrees_with_diagram():
    bits = [1, 0, 1, 1, 0, 0, 1]
    rows = evolve_lists(bits, 12)
    d = evolve(BinaryConfig.finite(bits), "one_or_3", 12)
    for t, r in enumerate(rows):
        assert r == _cells(d.rows[t], -t, len(bits) - 1 + t)
