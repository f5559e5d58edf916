"""Slow reference implementations used as independent oracles.

Everything here works on plain Python lists and dicts, one cell at a time,
and shares no code with the package beyond rule tables.
"""

from __future__ import annotations

from math import comb


def step_list(cells: list[int], rule: str = "one_or_3") -> list[int]:
    """One step on a finite list, widened by one cell on each side."""
    padded = [0, 0] + cells + [0, 0]
    out = []
    for i in range(1, len(padded) - 1):
        a, b, c = padded[i - 1], padded[i], padded[i + 1]
        out.append((a + b + c) % 2 if rule == "one_or_3" else (a + c) % 2)
    return out


def evolve_lists(cells: list[int], T: int, rule: str = "one_or_3") -> list[list[int]]:
    """Rows t = 0..T; row t covers x = -t .. len(cells)-1+t."""
    rows = [list(cells)]
    for _ in range(T):
        rows.append(step_list(rows[-1], rule))
    return rows


def trinomial_parity(t: int, x: int) -> int:
    """Coefficient of z^x in (z^-1 + 1 + z)^t mod 2, by direct summation."""
    if abs(x) > t:
        return 0
    total = 0
    # choose i steps of -1 and j steps of +1 with j - i = x
    for i in range(t + 1):
        j = i + x
        if j < 0 or i + j > t:
            continue
        total += comb(t, i) * comb(t - i, j)
    return total % 2


def xor_single(t: int, z: int) -> int:
    if abs(z) > t or (t + z) % 2:
        return 0
    return comb(t, (t + z) // 2) % 2


def chi_recursion(k_max: int) -> list[int]:
    e = [3]
    while len(e) < k_max - 1:
        e.append(e[-1] + e[-1] // 2)
    return e


# ---------------------------------------------------------------------------
# paths, checked one point at a time


def point_ok(grid, x, t, kind, theta=0):
    """grid[t][x] with out-of-range cells read as 0; rows before 0 are 0."""
    def lam(xx, tt):
        if tt < 0 or tt >= len(grid):
            return 0
        row = grid[tt]
        return row[xx % len(row)] if kind.get("ring") else (row[xx] if 0 <= xx < len(row) else 0)

    if lam(x, t) != 0:
        return False
    if kind["type"] == "free":
        n = lam(x - 1, t) + lam(x + 1, t) + lam(x - 1, t - 1) + lam(x + 1, t - 1) + lam(x, t - 1)
        return n < kind["theta"]
    return True


def move_ok(grid, x, t, y, kind):
    """Step from (x, t) to (y, t+1)."""
    if abs(y - x) > 1:
        return False
    if kind["type"] == "diagonal" and y == x:
        return False
    if kind["type"] == "wide" and y != x:
        width = len(grid[0])
        ring = kind.get("ring")

        def lam(xx, tt):
            row = grid[tt]
            return row[xx % width] if ring else (row[xx] if 0 <= xx < width else 0)

        if lam(y, t) == 1 and lam(x, t + 1) == 1:
            return False
    return True


def all_reachable(grid, sources, kind):
    """Every point reachable by some valid path starting at a source, by DFS over explicit paths."""
    width = len(grid[0])
    ring = kind.get("ring")
    seen = set()
    stack = [(x, t) for x, t in sources if point_ok(grid, x, t, kind)]
    while stack:
        x, t = stack.pop()
        if (x, t) in seen:
            continue
        seen.add((x, t))
        if t + 1 >= len(grid):
            continue
        for y in (x - 1, x, x + 1):
            yy = y % width if ring else y
            if not ring and not 0 <= y < width:
                continue
            if move_ok(grid, x, t, y, kind) and point_ok(grid, yy, t + 1, kind):
                stack.append((yy, t + 1))
    return seen


# ---------------------------------------------------------------------------
# census on the link image, word by word


def ring_rows(bits: list[int], depth: int) -> list[list[int]]:
    n = len(bits)
    rows = [list(bits)]
    for _ in range(depth - 1):
        r = rows[-1]
        rows.append([(r[(i - 1) % n] + r[i] + r[(i + 1) % n]) % 2 for i in range(n)])
    return rows


def web_ring_step(table, row):
    n = len(row)
    out = []
    for i in range(n):
        code = 0
        for d in (-2, -1, 0, 1, 2):
            code = code * 3 + row[(i + d) % n]
        out.append(table[code])
    return out


def ether_signature(table, row, cap=1 << 14):
    """(signature, temporal period, density of 2s) of the orbit of a ring row."""
    seen = {}
    hist = []
    cur = list(row)
    for t in range(cap):
        key = tuple(cur)
        if key in seen:
            cyc = hist[seen[key]:]
            break
        seen[key] = t
        hist.append(cur)
        cur = web_ring_step(table, cur)
    else:
        return None
    assert all(1 not in r for r in cyc)
    best = None
    for r in cyc:
        s = "".join(str(v) for v in r)
        p = next(p for p in range(1, len(s) + 1) if len(s) % p == 0 and s == s[:p] * (len(s) // p))
        s = s[:p]
        s = min(s[i:] + s[:i] for i in range(p))
        if best is None or (len(s), s) < (len(best), best):
            best = s
    from fractions import Fraction

    twos = sum(r.count(2) for r in cyc)
    return best, len(cyc), Fraction(twos, len(cyc) * len(row))


def slow_census(table, m, kind):
    """(N_n, N_b, Counter of signatures) over all words of length 3*2^m satisfying
    the three-block constraint.  Small levels filter every word; larger ones
    build the words as blocks (a, b, a xor b)."""
    from collections import Counter

    k = 1 << m
    n = 3 * k
    nn = nb = 0
    tally = Counter()
    if m <= 2:
        words = [w for w in range(1 << n)
                 if not any(((w >> i) ^ (w >> (k + i)) ^ (w >> (2 * k + i))) & 1 for i in range(k))]
    else:
        words = [a | (b << k) | ((a ^ b) << (2 * k)) for a in range(1 << k) for b in range(1 << k)]
    for word in words:
        bits = [(word >> i) & 1 for i in range(n)]
        rows = ring_rows(bits, k)
        if not any(rows[-1]):
            continue
        nn += 1
        reach = all_reachable(rows, [(x, 0) for x in range(n)], dict(kind, ring=True))
        if any(t == k - 1 for _, t in reach):
            continue
        nb += 1
        sig = ether_signature(table, bits)
        tally[sig[0]] += 1
    return nn, nb, tally
