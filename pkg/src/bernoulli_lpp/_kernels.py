"""Compiled inner loops.  All arithmetic is exact int64; callers check range."""

from __future__ import annotations

import numpy as np
from numba import njit

_ONE = np.uint64(1)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def keyed_dp_last(sites, w_match, w_mismatch, w_gap, K):
    """Max over paths of ``K * score - gaps`` for integer step weights."""
    m, n = sites.shape
    gap_key = w_gap * K - 1
    prev = np.empty(n + 1, np.int64)
    cur = np.empty(n + 1, np.int64)
    for j in range(n + 1):
        prev[j] = j * gap_key
    for i in range(1, m + 1):
        cur[0] = i * gap_key
        for j in range(1, n + 1):
            d = w_match if sites[i - 1, j - 1] else w_mismatch
            best = prev[j - 1] + d * K
            a = prev[j] + gap_key
            if a > best:
                best = a
            b = cur[j - 1] + gap_key
            if b > best:
                best = b
            cur[j] = best
        prev, cur = cur, prev
    return prev[n]


@njit(cache=True)
def keyed_dp_table(sites, w_match, w_mismatch, w_gap, K):
    m, n = sites.shape
    gap_key = w_gap * K - 1
    t = np.empty((m + 1, n + 1), np.int64)
    for j in range(n + 1):
        t[0, j] = j * gap_key
    for i in range(1, m + 1):
        t[i, 0] = i * gap_key
        for j in range(1, n + 1):
            d = w_match if sites[i - 1, j - 1] else w_mismatch
            best = t[i - 1, j - 1] + d * K
            a = t[i - 1, j] + gap_key
            if a > best:
                best = a
            b = t[i, j - 1] + gap_key
            if b > best:
                best = b
            t[i, j] = best
    return t


@njit(cache=True)
def corner_growth_last(weights):
    m, n = weights.shape
    row = np.zeros(n, np.int64)
    for i in range(m):
        left = 0
        for j in range(n):
            v = row[j] if row[j] > left else left
            v += weights[i, j]
            row[j] = v
            left = v
    return row[n - 1]


@njit(cache=True)
def corner_growth_batch(weights):
    out = np.empty(weights.shape[0], np.int64)
    for b in range(weights.shape[0]):
        out[b] = corner_growth_last(weights[b])
    return out


@njit(cache=True)
def zero_penalty_batch(sites):
    """G with alpha = beta = 0 for a stack of small environments."""
    out = np.empty(sites.shape[0], np.int64)
    K = sites.shape[1] + sites.shape[2] + 1
    for b in range(sites.shape[0]):
        key = keyed_dp_last(sites[b], 1, 0, 0, K)
        out[b] = -((-key) // K)
    return out


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - _ONE
        c += 1
    return c


@njit(cache=True)
def zero_penalty_bits(rows, m):
    """G with alpha = beta = 0 from packed row masks (bit-parallel LCS).

    ``V`` holds the column differences of the last-passage table along the
    current row; zeros count the passage time.
    """
    n, W = rows.shape
    V = np.full(W, _ALL)
    for j in range(n):
        carry = np.uint64(0)
        for w in range(W):
            v = V[w]
            u = v & rows[j, w]
            t = v + u
            c1 = t < v
            s = t + carry
            c2 = s < t
            carry = _ONE if (c1 or c2) else np.uint64(0)
            V[w] = s | (v & ~u)
    ones = 0
    full = m >> 6
    for w in range(full):
        ones += _popcount(V[w])
    tail = m & 63
    if tail:
        ones += _popcount(V[full] & ((_ONE << np.uint64(tail)) - _ONE))
    return m - ones
