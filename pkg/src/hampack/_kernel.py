"""Compiled maximum independent set search over uint64 bitset rows.

Vertex sets are arrays of ``W`` uint64 words.  The search is an explicit-stack
depth-first branch and bound; each level stores its candidate set and the
vertices of its clique cover that are still worth branching on.
"""
from __future__ import annotations

import time

import numba as nb
import numpy as np

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_DB_TABLE = np.zeros(64, dtype=np.int64)
for _i in range(64):
    _DB_TABLE[(((1 << _i) * 0x03F79D71B4CB0A89) & (2**64 - 1)) >> 58] = _i
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@nb.njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@nb.njit(cache=True, inline="always")
def _ctz(x):
    low = x & (~x + _ONE)
    return _DB_TABLE[np.int64((low * _DEBRUIJN) >> np.uint64(58))]


@nb.njit(cache=True)
def _set_popcount(s):
    total = 0
    for w in range(s.shape[0]):
        if s[w]:
            total += _popcount(s[w])
    return total


@nb.njit(cache=True)
def _renumber(v, conflict, classes, threshold):
    W = classes.shape[1]
    wv = v >> 6
    bv = _ONE << np.uint64(v & 63)
    for i in range(threshold):
        # members of class i that do not conflict with v
        nfree = 0
        u = -1
        for w in range(W):
            f = classes[i, w] & ~conflict[v, w]
            if f:
                nfree += _popcount(f)
                if nfree > 1:
                    break
                u = w * 64 + _ctz(f)
        if nfree == 0:
            classes[i, wv] |= bv
            return True
        if nfree == 1:
            for j in range(threshold):
                if j == i:
                    continue
                ok = True
                for w in range(W):
                    if classes[j, w] & ~conflict[u, w]:
                        ok = False
                        break
                if ok:
                    wu = u >> 6
                    bu = _ONE << np.uint64(u & 63)
                    classes[j, wu] |= bu
                    classes[i, wu] &= ~bu
                    classes[i, wv] |= bv
                    return True
    return False


@nb.njit(cache=True)
def cover(cand, conflict, threshold, classes, scratch, q, verts, bounds):
    """Greedy clique cover of ``cand`` (re-colouring above ``threshold``).

    Fills ``verts``/``bounds`` with the vertices whose class index exceeds
    the threshold and their 1-based class index; returns how many.
    """
    W = cand.shape[0]
    for w in range(W):
        scratch[w] = cand[w]
    k = 0
    while True:
        empty = True
        for w in range(W):
            if scratch[w]:
                empty = False
                break
        if empty:
            break
        for w in range(W):
            q[w] = scratch[w]
            classes[k, w] = _ZERO
        w = 0
        while w < W:
            if q[w] == _ZERO:
                w += 1
                continue
            v = w * 64 + _ctz(q[w])
            bit = _ONE << np.uint64(v & 63)
            scratch[w] &= ~bit
            classes[k, w] |= bit
            for x in range(W):
                q[x] &= conflict[v, x]
        k += 1
    start = 0
    if threshold > 0 and k > threshold:
        start = threshold
        for c in range(threshold, k):
            for w in range(W):
                rest = classes[c, w]
                while rest:
                    t = _ctz(rest)
                    bit = _ONE << np.uint64(t)
                    rest &= ~bit
                    if _renumber(w * 64 + t, conflict, classes, threshold):
                        classes[c, w] &= ~bit
    n = 0
    label = start
    for c in range(start, k):
        nonempty = False
        for w in range(W):
            if classes[c, w]:
                nonempty = True
                break
        if not nonempty:
            continue
        label += 1
        for w in range(W):
            rest = classes[c, w]
            while rest:
                t = _ctz(rest)
                rest &= ~(_ONE << np.uint64(t))
                verts[n] = w * 64 + t
                bounds[n] = label
                n += 1
    return n


@nb.njit(cache=True)
def _part_bound(cand, parts, alphas):
    total = 0
    for p in range(parts.shape[0]):
        c = 0
        for w in range(cand.shape[0]):
            x = cand[w] & parts[p, w]
            if x:
                c += _popcount(x)
        total += min(c, alphas[p])
    return total


@nb.njit(cache=True)
def search(conflict, compat, root, start_size, best, parts, alphas,
           node_limit, deadline, shared, progress):
    """Branch and bound below ``root`` with ``start_size`` vertices already chosen.

    Returns (best, found, chosen vertices, nodes, complete); ``chosen`` holds
    only the vertices picked below the root, and is meaningful when ``found``.
    """
    nv = conflict.shape[0]
    W = conflict.shape[1]
    L = nv + 2
    cand = np.zeros((L, W), dtype=np.uint64)
    verts = np.zeros((L, nv), dtype=np.int64)
    bounds = np.zeros((L, nv), dtype=np.int64)
    cnt = np.zeros(L, dtype=np.int64)
    idx = np.zeros(L, dtype=np.int64)
    path = np.zeros(L, dtype=np.int64)
    best_path = np.zeros(L, dtype=np.int64)
    best_len = 0
    classes = np.zeros((nv + 1, W), dtype=np.uint64)
    scratch = np.zeros(W, dtype=np.uint64)
    q = np.zeros(W, dtype=np.uint64)
    child = np.zeros(W, dtype=np.uint64)
    found = False
    nodes = 1
    has_parts = parts.shape[0] > 0

    for w in range(W):
        cand[0, w] = root[w]
    if has_parts and start_size + _part_bound(cand[0], parts, alphas) <= best:
        return best, found, best_path[:0], nodes, True
    cnt[0] = cover(cand[0], conflict, best - start_size, classes, scratch, q, verts[0], bounds[0])
    idx[0] = cnt[0] - 1
    depth = 0
    while depth >= 0:
        i = idx[depth]
        size = start_size + depth
        if i < 0 or size + bounds[depth, i] <= best:
            depth -= 1
            continue
        idx[depth] = i - 1
        v = verts[depth, i]
        path[depth] = v
        cand[depth, v >> 6] &= ~(_ONE << np.uint64(v & 63))
        empty = True
        for w in range(W):
            child[w] = cand[depth, w] & compat[v, w]
            if child[w]:
                empty = False
        if empty:
            if size + 1 > best:
                best = size + 1
                found = True
                best_len = depth + 1
                for d in range(best_len):
                    best_path[d] = path[d]
                if shared.shape[0] > 0 and shared[0] < best:
                    shared[0] = best
            continue
        if has_parts and size + 1 + _part_bound(child, parts, alphas) <= best:
            continue
        nodes += 1
        if node_limit >= 0 and nodes > node_limit:
            return best, found, best_path[:best_len], nodes, False
        if nodes & 4095 == 0:
            if shared.shape[0] > 0 and shared[0] > best:
                best = shared[0]
            if deadline > 0.0:
                with nb.objmode(now="float64"):
                    now = time.monotonic()
                if now > deadline:
                    return best, found, best_path[:best_len], nodes, False
            if progress and nodes & 0xFFFFF == 0:
                with nb.objmode():
                    print("[solve] nodes", nodes, "incumbent", best)
        d1 = depth + 1
        for w in range(W):
            cand[d1, w] = child[w]
        cnt[d1] = cover(cand[d1], conflict, best - (size + 1), classes, scratch, q,
                        verts[d1], bounds[d1])
        idx[d1] = cnt[d1] - 1
        depth = d1
    return best, found, best_path[:best_len], nodes, True


def to_words(rows: list[int], nv: int) -> np.ndarray:
    """Pack Python-int bitsets into an ``(len(rows), W)`` uint64 array."""
    W = max(1, (nv + 63) // 64)
    out = np.zeros((len(rows), W), dtype=np.uint64)
    mask = (1 << 64) - 1
    for i, row in enumerate(rows):
        for w in range(W):
            out[i, w] = (row >> (64 * w)) & mask
    return out


def from_words(words: np.ndarray) -> int:
    return sum(int(x) << (64 * w) for w, x in enumerate(words))
