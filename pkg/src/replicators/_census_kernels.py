"""numba kernels for the link census.

A level-2^m link is a ring of n = 3k cells (k = 2^m) held in one uint64.  The
image of the seed-to-link map is parameterized by its first 2k bits u; the last
k bits are b[2k+i] = b[i] ^ b[k+i].
"""

import numpy as np
from numba import njit

DIAGONAL, WIDE, FREE = 1, 2, 3
GENERIC, EXTENDED, PIGGYBACK = 0, 1, 2


@njit(cache=True, inline="always")
def _rl(w, n, mask):
    # bit x receives cell x-1
    return ((w << np.uint64(1)) | (w >> np.uint64(n - 1))) & mask


@njit(cache=True, inline="always")
def _rr(w, n, mask):
    return ((w >> np.uint64(1)) | (w << np.uint64(n - 1))) & mask


@njit(cache=True, inline="always")
def _step(w, n, mask):
    return _rl(w, n, mask) ^ w ^ _rr(w, n, mask)


@njit(cache=True, inline="always")
def _at_least(p0, p1, p2, p3, p4, theta):
    s1 = p0 ^ p1 ^ p2
    c1 = (p0 & p1) | (p0 & p2) | (p1 & p2)
    s2 = s1 ^ p3 ^ p4
    c2 = (s1 & p3) | (s1 & p4) | (p3 & p4)
    b1 = c1 ^ c2
    b2 = c1 & c2
    if theta == 3:
        return b2 | (b1 & s2)
    if theta == 4:
        return b2
    return b2 & s2


@njit(cache=True, inline="always")
def image_word(u, k):
    kmask = (np.uint64(1) << np.uint64(k)) - np.uint64(1)
    return u | (((u ^ (u >> np.uint64(k))) & kmask) << np.uint64(2 * k))


@njit(cache=True)
def blocker_flags(w, k, path, theta):
    """(non-degenerate, blocker) for the link w to depth k."""
    n = 3 * k
    mask = (np.uint64(1) << np.uint64(n)) - np.uint64(1)
    zero = np.uint64(0)
    row = w
    prev = zero
    reach = mask
    for t in range(k):
        if t > 0:
            prev = row
            row = _step(row, n, mask)
        if reach != zero:
            allowed = ~row & mask
            if path == FREE:
                allowed &= ~_at_least(_rl(row, n, mask), _rr(row, n, mask), _rl(prev, n, mask),
                                      _rr(prev, n, mask), prev, theta)
            if t == 0:
                reach = allowed
            else:
                left = _rl(reach, n, mask)
                right = _rr(reach, n, mask)
                if path == DIAGONAL:
                    reach = (left | right) & allowed
                else:
                    if path == WIDE:
                        left &= ~(prev & _rl(row, n, mask))
                        right &= ~(prev & _rr(row, n, mask))
                    reach = (reach | left | right) & allowed
    return row != zero, reach == zero


@njit(cache=True, inline="always")
def web_step(rule, o, w, n, mask):
    """One step of Extended 1 Or 3 or Piggyback on bitsliced (first level, second level) rows."""
    nb = o | w
    o2 = _step(o, n, mask)
    l = _rl(o2, n, mask)
    r = _rr(o2, n, mask)
    b = _rl(nb, n, mask)
    d = _rr(nb, n, mask)
    par5 = l ^ r ^ b ^ nb ^ d
    all5 = l & r & b & nb & d
    if rule == EXTENDED:
        w2 = par5 & ~all5
    else:
        maj = (l & nb) | (l & r) | (nb & r)
        all3 = l & nb & r
        w2 = (maj & ~all3) | (~maj & par5 & ~all5)
    return o2, w2 & ~o2 & mask


@njit(cache=True)
def second_level_pattern(rule, w, k):
    """k-bit second-level pattern at time 2k (which is k-periodic), or -1 if the
    first level has not died by time k."""
    n = 3 * k
    mask = (np.uint64(1) << np.uint64(n)) - np.uint64(1)
    o = w
    s = np.uint64(0)
    for _ in range(k):
        o, s = web_step(rule, o, s, n, mask)
    if o != np.uint64(0):
        return -1
    # with no first level left both rules act as 1 Or 3 on the second level,
    # and k steps of that on a ring of 3k cells sum the three k-translates
    kmask = (np.uint64(1) << np.uint64(k)) - np.uint64(1)
    p = (s ^ (s >> np.uint64(k)) ^ (s >> np.uint64(2 * k))) & kmask
    return np.int64(p)


@njit(cache=True)
def census_shard(k, u_lo, u_hi, path, theta, rule, tally, blockers):
    """Scan image words with free bits in [u_lo, u_hi).

    For EXTENDED/PIGGYBACK, blockers are tallied by their k-bit second-level
    pattern in ``tally``; words whose pattern cannot be formed are written to
    ``blockers``.  For GENERIC every blocker word goes to ``blockers``.
    Returns (non-degenerate count, blocker count, words written).
    """
    n_nd = 0
    n_b = 0
    nw = 0
    for u in range(u_lo, u_hi):
        w = image_word(np.uint64(u), k)
        nd, blk = blocker_flags(w, k, path, theta)
        if not nd:
            continue
        n_nd += 1
        if not blk:
            continue
        n_b += 1
        if rule == GENERIC:
            blockers[nw] = w
            nw += 1
            continue
        p = second_level_pattern(rule, w, k)
        if p < 0:
            blockers[nw] = w
            nw += 1
        else:
            tally[p] += 1
    return n_nd, n_b, nw
