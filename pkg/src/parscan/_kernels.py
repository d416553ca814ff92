"""Compiled inner loops.

All kernels are ``nogil`` so callers can fan them out over a thread pool.
Each kernel works on a contiguous range of its outer index and writes only
to buffers it owns or to disjoint output slots.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_ODD = np.uint64(0xD6E8FEB86659FD93)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S32 = np.uint64(32)
_TWO_M53 = 1.0 / 9007199254740992.0

_JIT = dict(nogil=True, cache=True)


@njit(**_JIT)
def splitmix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(**_JIT)
def counter_key(seed, i):
    return splitmix64(splitmix64(np.uint64(seed)) ^ np.uint64(i))


@njit(**_JIT)
def gaussian(key_i, x):
    """Standard normal r_i[x] from the counter (key_i, x) via Box-Muller."""
    h = splitmix64(key_i ^ splitmix64(np.uint64(x)))
    u1 = (float(h >> _S11) + 1.0) * _TWO_M53
    u2 = float(splitmix64(h) >> _S11) * _TWO_M53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(**_JIT)
def hash_element(key, x):
    # x -> x*odd + key -> splitmix is a bijection on 64-bit words
    return splitmix64(np.uint64(x) * _ODD + key)


# --------------------------------------------------------------------------
# triangle enumeration on the degree-oriented graph


@njit(**_JIT)
def count_triangles(lo, hi, out_offsets, targets, skip_src, counts):
    """Credit every triangle found from sources in [lo, hi) to its three directed edges."""
    for u in range(lo, hi):
        if skip_src[u]:
            continue
        u0, u1 = out_offsets[u], out_offsets[u + 1]
        for j in range(u0, u1):
            v = targets[j]
            a, b = u0, out_offsets[v]
            b1 = out_offsets[v + 1]
            while a < u1 and b < b1:
                ta, tb = targets[a], targets[b]
                if ta < tb:
                    a += 1
                elif tb < ta:
                    b += 1
                else:
                    counts[j] += 1
                    counts[a] += 1
                    counts[b] += 1
                    a += 1
                    b += 1


@njit(**_JIT)
def triangle_contributions(lo, hi, out_offsets, targets, wdir, skip_src):
    """List weighted triangle contributions as (directed edge, third vertex, w*w) triples."""
    total = 0
    for u in range(lo, hi):
        if skip_src[u]:
            continue
        u0, u1 = out_offsets[u], out_offsets[u + 1]
        for j in range(u0, u1):
            v = targets[j]
            a, b, b1 = u0, out_offsets[v], out_offsets[v + 1]
            while a < u1 and b < b1:
                if targets[a] < targets[b]:
                    a += 1
                elif targets[b] < targets[a]:
                    b += 1
                else:
                    total += 1
                    a += 1
                    b += 1
    edge = np.empty(3 * total, dtype=np.int64)
    third = np.empty(3 * total, dtype=np.int64)
    value = np.empty(3 * total, dtype=np.float64)
    t = 0
    for u in range(lo, hi):
        if skip_src[u]:
            continue
        u0, u1 = out_offsets[u], out_offsets[u + 1]
        for j in range(u0, u1):
            v = targets[j]
            a, b, b1 = u0, out_offsets[v], out_offsets[v + 1]
            while a < u1 and b < b1:
                if targets[a] < targets[b]:
                    a += 1
                elif targets[b] < targets[a]:
                    b += 1
                else:
                    x = targets[a]
                    # edge uv sees x; edge ux sees v; edge vx sees u
                    edge[t], third[t], value[t] = j, x, wdir[a] * wdir[b]
                    edge[t + 1], third[t + 1], value[t + 1] = a, v, wdir[j] * wdir[b]
                    edge[t + 2], third[t + 2], value[t + 2] = b, u, wdir[j] * wdir[a]
                    t += 3
                    a += 1
                    b += 1
    return edge, third, value


@njit(**_JIT)
def segmented_sum(edge_sorted, value_sorted, n_edges):
    """Sum values per edge, left to right, over input already grouped by edge."""
    out = np.zeros(n_edges, dtype=np.float64)
    for t in range(len(edge_sorted)):
        out[edge_sorted[t]] += value_sorted[t]
    return out


# --------------------------------------------------------------------------
# sketches


@njit(**_JIT)
def simhash_rows(lo, hi, vertices, offsets, neighbors, weights, k, seed, bits):
    """Sign sketches of the closed-neighborhood vectors for vertices[lo:hi]."""
    acc = np.empty(k, dtype=np.float64)
    keys = np.empty(k, dtype=np.uint64)
    for i in range(k):
        keys[i] = counter_key(seed, i)
    for r in range(lo, hi):
        v = vertices[r]
        acc[:] = 0.0
        p, p1 = offsets[v], offsets[v + 1]
        self_done = False
        # ascending element order, self slotted in place
        while True:
            if not self_done and (p == p1 or v < neighbors[p]):
                x, wt = v, 1.0
                self_done = True
            elif p < p1:
                x, wt = neighbors[p], weights[p]
                p += 1
            else:
                break
            for i in range(k):
                acc[i] += wt * gaussian(keys[i], x)
        for i in range(k):
            bits[r, i] = 1 if acc[i] >= 0.0 else 0


@njit(**_JIT)
def simhash_vector(indices, values, k, seed):
    bits = np.empty(k, dtype=np.uint8)
    for i in range(k):
        key = counter_key(seed, i)
        s = 0.0
        for t in range(len(indices)):
            s += values[t] * gaussian(key, indices[t])
        bits[i] = 1 if s >= 0.0 else 0
    return bits


@njit(**_JIT)
def minhash_standard_set(elements, k, seed, out):
    for i in range(k):
        key = counter_key(seed, i)
        best = np.uint64(0xFFFFFFFFFFFFFFFF)
        for t in range(len(elements)):
            h = hash_element(key, elements[t])
            if h < best:
                best = h
        out[i] = best


@njit(**_JIT)
def minhash_kpartition_set(elements, k, seed, out, densified):
    key = counter_key(seed, 0)
    filled = np.zeros(k, dtype=np.bool_)
    for t in range(len(elements)):
        h = hash_element(key, elements[t])
        j = ((h >> _S32) * np.uint64(k)) >> _S32
        if not filled[j] or h < out[j]:
            out[j] = h
            filled[j] = True
    for j in range(k):
        densified[j] = not filled[j]
    for j in range(k):
        if not filled[j]:
            for step in range(1, k):
                s = (j + step) % k
                if filled[s]:
                    out[j] = out[s]
                    break


@njit(**_JIT)
def closed_elements(v, offsets, neighbors):
    p0, p1 = offsets[v], offsets[v + 1]
    el = np.empty(p1 - p0 + 1, dtype=np.int64)
    el[: p1 - p0] = neighbors[p0:p1]
    el[p1 - p0] = v
    return el


@njit(**_JIT)
def minhash_rows(lo, hi, vertices, offsets, neighbors, k, seed, kpartition, values, densified):
    for r in range(lo, hi):
        el = closed_elements(vertices[r], offsets, neighbors)
        if kpartition:
            minhash_kpartition_set(el, k, seed, values[r], densified[r])
        else:
            minhash_standard_set(el, k, seed, values[r])


@njit(**_JIT)
def simhash_score(a, b):
    k = len(a)
    d = 0
    for i in range(k):
        if a[i] != b[i]:
            d += 1
    s = math.cos(math.pi * d / k)
    return s if s > 0.0 else 0.0


@njit(**_JIT)
def minhash_score(va, da, vb, db):
    num = 0
    den = 0
    for i in range(len(va)):
        if da[i] and db[i]:
            continue
        den += 1
        if va[i] == vb[i]:
            num += 1
    if den == 0:
        return 0.0
    return num / den


@njit(**_JIT)
def simhash_edge_scores(lo, hi, row_u, row_v, bits, out):
    for e in range(lo, hi):
        out[e] = simhash_score(bits[row_u[e]], bits[row_v[e]])


@njit(**_JIT)
def minhash_edge_scores(lo, hi, row_u, row_v, values, densified, out):
    for e in range(lo, hi):
        a, b = row_u[e], row_v[e]
        out[e] = minhash_score(values[a], densified[a], values[b], densified[b])
