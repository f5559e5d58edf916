import random

import pytest

from replicators.additive import BinaryConfig, SpaceTimeDiagram, evolve
from replicators.percolation import (
    PathType,
    chi_path_xor,
    chi_recursion,
    mc_crossing,
    mc_drift,
    mc_empty_survival,
    path_points_ok,
    principal_void,
    reachable_set,
    refresh_walk,
    three_free_chain,
    z_path,
)

from oracles import all_reachable, chi_recursion as chi_oracle, point_ok, move_ok, xor_single

TYPES = ["empty", "diagonal", "wide", "free3", "free4", "free5"]


def _kind(name):
    p = PathType.parse(name)
    return {"type": p.tag, "theta": p.theta}


def _diagram_from_grid(grid):
    rows = tuple(BinaryConfig.finite(r, 0) for r in grid)
    return SpaceTimeDiagram(rows, "grid")


def _random_grids(n, seed):
    rng = random.Random(seed)
    for i in range(n):
        if i % 2:
            yield [[int(rng.random() < 0.35) for _ in range(24)] for _ in range(24)]
        else:
            d = evolve(BinaryConfig.from_word(rng.getrandbits(60), -18), "one_or_3", 23)
            yield d.as_array(0, 23).tolist()


@pytest.mark.parametrize("name", TYPES)
def test_reachable_set_matches_path_search(name):
    kind = _kind(name)
    for grid in _random_grids(20, hash(name) % 1000):
        d = _diagram_from_grid(grid)
        sources = [(x, 0) for x in range(24)]
        reach = reachable_set(d, sources, name, window=(0, 23))
        got = {(x, t) for t in range(24) for x in reach.points(t)}
        assert got == all_reachable(grid, sources, kind)


def test_path_validator_agrees_with_point_rules():
    rng = random.Random(1)
    for grid in _random_grids(10, 3):
        d = _diagram_from_grid(grid)
        for name in TYPES:
            kind = _kind(name)
            for _ in range(30):
                x = rng.randrange(24)
                path = [(x, 0)]
                for t in range(1, 6):
                    x = min(23, max(0, x + rng.choice((-1, 0, 1))))
                    path.append((x, t))
                want = all(point_ok(grid, px, pt, kind) for px, pt in path) and all(
                    move_ok(grid, a[0], a[1], b[0], kind) for a, b in zip(path, path[1:]))
                assert path_points_ok(d, path, name) == want


def test_path_type_parsing():
    assert PathType.parse("free4") == PathType("free", 4)
    assert PathType.parse("free(3)") == PathType("free", 3)
    assert str(PathType.parse("wide")) == "wide"
    with pytest.raises(ValueError):
        PathType.parse("free7")
    with pytest.raises(ValueError):
        PathType.parse("sideways")


def test_z_path_is_rightmost_empty_trajectory():
    rng = random.Random(8)
    for _ in range(20):
        seed = BinaryConfig.from_word(rng.getrandbits(40) & ~(1 << 20), -20)
        d = evolve(seed, "one_or_3", 30)
        traj = z_path(d, (0, 0))
        r = 0
        for t in range(1, 31):
            # next position: the first 0 at or left of r+1
            y = r + 1
            while d.state(y, t) == 1:
                y -= 1
            assert traj.positions[t] == y
            r = y


def test_chi_path_matches_recursion_and_slow_simulation():
    res = chi_path_xor(10 ** 6, 12)
    assert res.e[1:12] == chi_oracle(12)
    assert chi_recursion(12) == chi_oracle(12)
    # slow walk with binomial parities
    x = 0
    for t in range(2000):
        assert res.trajectory.positions[t] == x
        if xor_single(t, x) ^ xor_single(t, x + 1) == 0:
            x += 1


def _exact_crossing(path, t):
    """Probability by enumerating every row-0 pattern that can influence the cone."""
    n = 4 * t + 1
    hits = 0
    for w in range(1 << n):
        seed = BinaryConfig.from_word(w, -2 * t)
        d = evolve(seed, "one_or_3", t)
        reach = reachable_set(d, [(x, 0) for x in range(-t, t + 1)], path, window=(-2 * t - 1, 2 * t + 1))
        # restrict to paths inside the backward cone of (0, t)
        grid = d.as_array(-2 * t - 1, 2 * t + 1)
        cone_reach = set((x, 0) for x in range(-t, t + 1) if point_ok(grid.tolist(), x + 2 * t + 1, 0, _kind(path)))
        cur = {x for x, _ in cone_reach}
        for s in range(1, t + 1):
            nxt = set()
            for x in cur:
                for y in (x - 1, x, x + 1):
                    if abs(y) <= t - s and move_ok(grid.tolist(), x + 2 * t + 1, s - 1, y + 2 * t + 1, _kind(path)) \
                            and point_ok(grid.tolist(), y + 2 * t + 1, s, _kind(path)):
                        nxt.add(y)
            cur = nxt
        hits += 0 in cur
        del reach
    return hits / (1 << n)


@pytest.mark.parametrize("path", ["diagonal", "wide", "free4"])
def test_crossing_estimate_matches_exact_small_depth(path):
    p = _exact_crossing(path, 2)
    est = mc_crossing(path, 2, 20000, rng_seed=5)
    assert abs(est.estimate - p) <= 4 * max(est.stderr, 1e-3)


def test_monte_carlo_is_deterministic():
    a = mc_crossing("wide", 12, 500, rng_seed=3).as_dict()
    b = mc_crossing("wide", 12, 500, rng_seed=3).as_dict()
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert a == b
    assert mc_empty_survival(10, 200, 4).successes == mc_empty_survival(10, 200, 4).successes
    assert mc_drift(100, 5, 1).ratios == mc_drift(100, 5, 1).ratios


def test_refresh_points_rebuild_the_z_path():
    walk = refresh_walk(3000, rng_seed=12)
    z = walk.reconstruct_z(3000)
    assert all(c >= 1 for c in walk.counts[:-1])
    for t, v in enumerate(z):
        if v is not None:
            assert v == walk.z_positions[t]
    assert sum(v is not None for v in z) > 2500


def test_principal_void_geometry():
    v = principal_void(6, L=3)
    assert (v.width, v.t, v.top, v.w_top) == (15, 16, (1, 15), (4, 15))
    assert principal_void(7).t == 24
    assert principal_void(2, L=5).w_top is None
    d = evolve(BinaryConfig.parse("1"), "one_or_3", 70)
    for i in range(2, 9):
        vr = principal_void(i)
        a, b = vr.top
        for k in range((vr.width + 1) // 2):
            assert d.rows[vr.t + k].segment(a + k, b - k) == 0
        assert d.state(a - 1, vr.t) == 1 and d.state(b + 1, vr.t) == 1


def test_three_free_chain_for_4z_seed():
    seed = BinaryConfig.from_sites([0, 4, 12, 16])
    paths = three_free_chain(seed, 16, 10, 3)
    d = evolve(seed, "one_or_3", principal_void(13, 16).w_apex[1] + 1)
    for p in paths:
        assert path_points_ok(d, p, "free3") and path_points_ok(d, p, "wide")


def test_three_free_chain_preconditions():
    with pytest.raises(ValueError):
        three_free_chain(BinaryConfig.from_sites([1]), 16, 10, 1)
    with pytest.raises(ValueError):
        three_free_chain(BinaryConfig.from_sites([0]), 16, 4, 1)
