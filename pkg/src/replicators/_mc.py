"""numba kernels for the Monte Carlo estimators.

Rows are little-endian uint64 word arrays over a fixed window; cells outside
the window read as 0.  Callers only trust cells whose backward light cone lies
inside the window.
"""

import numpy as np
from numba import njit

EMPTY, DIAGONAL, WIDE, FREE = 0, 1, 2, 3
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _shl(a, i, n):
    """Word i of the row shifted so bit x holds cell x-1."""
    w = a[i] << np.uint64(1)
    if i > 0:
        w |= a[i - 1] >> np.uint64(63)
    return w


@njit(cache=True, inline="always")
def _shr(a, i, n):
    w = a[i] >> np.uint64(1)
    if i < n - 1:
        w |= a[i + 1] << np.uint64(63)
    return w


@njit(cache=True)
def step_one_or_3(src, dst):
    n = src.shape[0]
    for i in range(n):
        dst[i] = _shl(src, i, n) ^ src[i] ^ _shr(src, i, n)


@njit(cache=True)
def step_xor(src, dst):
    n = src.shape[0]
    for i in range(n):
        dst[i] = _shl(src, i, n) ^ _shr(src, i, n)


@njit(cache=True, inline="always")
def _count_at_least(p0, p1, p2, p3, p4, theta):
    s1 = p0 ^ p1 ^ p2
    c1 = (p0 & p1) | (p0 & p2) | (p1 & p2)
    s2 = s1 ^ p3 ^ p4
    c2 = (s1 & p3) | (s1 & p4) | (p3 & p4)
    b1 = c1 ^ c2
    b2 = c1 & c2
    # total = s2 + 2*b1 + 4*b2
    if theta <= 0:
        return _ALL
    if theta == 1:
        return s2 | b1 | b2
    if theta == 2:
        return b1 | b2
    if theta == 3:
        return b2 | (b1 & s2)
    if theta == 4:
        return b2
    if theta == 5:
        return b2 & s2
    return np.uint64(0)


@njit(cache=True)
def allowed_row(row, prev, has_prev, path, theta, out):
    """Cells a path of the given type may visit at this row."""
    n = row.shape[0]
    for i in range(n):
        ok = ~row[i]
        if path == FREE:
            if has_prev:
                bad = _count_at_least(_shl(row, i, n), _shr(row, i, n), _shl(prev, i, n), _shr(prev, i, n), prev[i], theta)
            else:
                z = np.uint64(0)
                bad = _count_at_least(_shl(row, i, n), _shr(row, i, n), z, z, z, theta)
            ok &= ~bad
        out[i] = ok


@njit(cache=True)
def advance(reach, prev, row, allowed, path, out):
    """Reachable cells at the next row from ``reach`` at the previous one."""
    n = reach.shape[0]
    for i in range(n):
        left = _shl(reach, i, n)  # came from x-1
        right = _shr(reach, i, n)  # came from x+1
        if path == DIAGONAL:
            moves = left | right
        elif path == WIDE:
            # step x -> x+1 is blocked when lambda(x+1,t)=1 and lambda(x,t+1)=1
            left &= ~(prev[i] & _shl(row, i, n))
            right &= ~(prev[i] & _shr(row, i, n))
            moves = reach[i] | left | right
        else:
            moves = reach[i] | left | right
        out[i] = moves & allowed[i]


@njit(cache=True)
def _cone_mask(out, lo, hi):
    """Set bits lo..hi (inclusive) and clear the rest."""
    n = out.shape[0]
    for i in range(n):
        out[i] = np.uint64(0)
    if hi < lo:
        return
    for x in range(lo, hi + 1):
        out[x >> 6] |= np.uint64(1) << np.uint64(x & 63)


@njit(cache=True)
def crossing_trial(row0, t, center, path, theta):
    """True iff a path of the type runs from row 0 to (center, t) inside its backward cone."""
    n = row0.shape[0]
    prev = np.zeros(n, np.uint64)
    row = row0.copy()
    nxt = np.zeros(n, np.uint64)
    allowed = np.zeros(n, np.uint64)
    cone = np.zeros(n, np.uint64)
    reach = np.zeros(n, np.uint64)
    tmp = np.zeros(n, np.uint64)
    allowed_row(row, prev, False, path, theta, allowed)
    _cone_mask(cone, center - t, center + t)
    for i in range(n):
        reach[i] = allowed[i] & cone[i]
    for s in range(1, t + 1):
        step_one_or_3(row, nxt)
        for i in range(n):
            prev[i] = row[i]
            row[i] = nxt[i]
        allowed_row(row, prev, True, path, theta, allowed)
        _cone_mask(cone, center - (t - s), center + (t - s))
        for i in range(n):
            allowed[i] &= cone[i]
        advance(reach, prev, row, allowed, path, tmp)
        nonzero = False
        for i in range(n):
            reach[i] = tmp[i]
            if tmp[i] != 0:
                nonzero = True
        if not nonzero:
            return False
    return ((reach[center >> 6] >> np.uint64(center & 63)) & np.uint64(1)) == 1


@njit(cache=True)
def survival_trial(row0, t, origin, path, theta):
    """True iff a path of the type runs from (origin, 0) to some point of row t."""
    n = row0.shape[0]
    prev = np.zeros(n, np.uint64)
    row = row0.copy()
    nxt = np.zeros(n, np.uint64)
    allowed = np.zeros(n, np.uint64)
    reach = np.zeros(n, np.uint64)
    tmp = np.zeros(n, np.uint64)
    allowed_row(row, prev, False, path, theta, allowed)
    if ((allowed[origin >> 6] >> np.uint64(origin & 63)) & np.uint64(1)) == 0:
        return False
    reach[origin >> 6] = np.uint64(1) << np.uint64(origin & 63)
    for s in range(1, t + 1):
        step_one_or_3(row, nxt)
        for i in range(n):
            prev[i] = row[i]
            row[i] = nxt[i]
        allowed_row(row, prev, True, path, theta, allowed)
        advance(reach, prev, row, allowed, path, tmp)
        nonzero = False
        for i in range(n):
            reach[i] = tmp[i]
            if tmp[i] != 0:
                nonzero = True
        if not nonzero:
            return False
    return True


@njit(cache=True, inline="always")
def _bit(a, x):
    return (a[x >> 6] >> np.uint64(x & 63)) & np.uint64(1)


@njit(cache=True)
def zpath_trial(row0, T, origin, positions):
    """Rightward Z-path from (origin, 0); positions[t] = r_t (window index), -1 once extinct."""
    n = row0.shape[0]
    row = row0.copy()
    nxt = np.zeros(n, np.uint64)
    r = origin
    positions[0] = r
    for s in range(1, T + 1):
        step_one_or_3(row, nxt)
        for i in range(n):
            row[i] = nxt[i]
        y = r + 1
        while y >= 0 and _bit(row, y) == 1:
            y -= 1
        if y < 0:
            for u in range(s, T + 1):
                positions[u] = -1
            return
        r = y
        positions[s] = r


@njit(cache=True)
def refresh_trial(row0, T, origin, refresh_x, refresh_t, counts, zpos):
    """Exploration process of the rightward Z-path.

    At each refresh point (x, t) the witness points (x+1, t+1), (x, t+1), ...
    are examined until the first 0; G is their number and the next refresh
    point is (x + 1 - G//2, t + ceil(G/2)).  The Z-path itself is tracked
    independently in ``zpos``.  Returns the number of refresh points recorded.
    """
    n = row0.shape[0]
    row = row0.copy()
    nxt = np.zeros(n, np.uint64)
    r = origin
    zpos[0] = r
    x = origin
    t = 0
    k = 0
    refresh_x[0] = x
    refresh_t[0] = 0
    for s in range(1, T + 1):
        step_one_or_3(row, nxt)
        for i in range(n):
            row[i] = nxt[i]
        y = r + 1
        while y >= 0 and _bit(row, y) == 1:
            y -= 1
        r = y
        zpos[s] = r
        if t == s - 1:
            g = 0
            y = x + 1
            while True:
                g += 1
                if _bit(row, y) == 0:
                    break
                y -= 1
            counts[k] = g
            x = x + 1 - g // 2
            t = t + (g + 1) // 2
            k += 1
            if t > T:
                return k
            refresh_x[k] = x
            refresh_t[k] = t
    counts[k] = 0
    return k + 1


@njit(cache=True)
def xor_single(t, z):
    """Xor CA from a single 1 at the origin: parity of C(t, (t+z)/2)."""
    if z < -t or z > t or ((t + z) & 1) == 1:
        return 0
    j = (t + z) >> 1
    return 1 if (j & ~t) == 0 else 0


@njit(cache=True)
def chi_path(T, k_max, positions):
    """Chi-path in Xor from 1s on {-1, 0}; returns exit times E_k (0 = not reached)."""
    exits = np.zeros(k_max + 1, np.int64)
    store = positions.shape[0]
    x = 0
    k = 1
    for t in range(T + 1):
        if t < store:
            positions[t] = x
        lag = t - x
        while k <= k_max and lag >= (1 << k):
            exits[k] = t
            k += 1
        if k > k_max:
            break
        state = xor_single(t, x) ^ xor_single(t, x + 1)
        if state == 0:
            x += 1
    return exits
