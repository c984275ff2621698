# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled walk kernel; a draw-for-draw mirror of ``_pykernel``."""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int64_t, uint64_t
from libc.string cimport memset
from numpy.random cimport bitgen_t

import numpy as np

cdef enum:
    SRW = 0
    RWC = 1
    ERWC = 2

cdef enum:
    OK = 0
    CAP_EXCEEDED = 1
    STUCK = 2


cdef inline uint64_t bounded(bitgen_t* rng, uint64_t k) noexcept nogil:
    cdef uint64_t m = (rng.next_uint64(rng.state) >> 32) * k
    cdef uint64_t low = m & 0xFFFFFFFFu
    cdef uint64_t threshold
    if low < k:
        threshold = (<uint64_t>0x100000000 - k) % k
        while low < threshold:
            m = (rng.next_uint64(rng.state) >> 32) * k
            low = m & 0xFFFFFFFFu
    return m >> 32


cdef int walk_core(const int64_t* indptr, const int64_t* indices, int64_t n,
                   int kind, int64_t d, int64_t hp, int64_t hq, bint distinct,
                   int64_t rwc_offset, int64_t start, bitgen_t* rng, int64_t step_cap,
                   const int64_t* targets, int64_t ntargets, int64_t* partial,
                   int64_t* visits, char* visited, int64_t* hval, int64_t* cand,
                   int64_t* out) noexcept nogil:
    cdef int64_t t = 0, cur = start, covered = 1, j = 0
    cdef int64_t lo, k, nxt, u, nc, nf, a, i, j2, best, bn, bd, un, ud, ties
    cdef int status = OK
    cdef bint dup

    visits[cur] = 1
    visited[cur] = 1
    if kind == ERWC:
        hval[cur] = hp
    while j < ntargets and targets[j] <= 1:
        partial[j] = 0
        j += 1

    while covered < n:
        if t >= step_cap:
            status = CAP_EXCEEDED
            break
        lo = indptr[cur]
        k = indptr[cur + 1] - lo
        if k == 0:
            status = STUCK
            break
        if kind == SRW:
            nxt = indices[lo + <int64_t>bounded(rng, <uint64_t>k)]
        else:
            nc = 0
            if distinct:
                # Floyd's algorithm over neighbor positions; cand holds positions first
                for j2 in range(k - (d if d < k else k), k):
                    i = <int64_t>bounded(rng, <uint64_t>(j2 + 1))
                    dup = False
                    for a in range(nc):
                        if cand[a] == i:
                            dup = True
                            break
                    cand[nc] = j2 if dup else i
                    nc += 1
                for a in range(nc):
                    cand[a] = indices[lo + cand[a]]
            else:
                for i in range(d):
                    u = indices[lo + <int64_t>bounded(rng, <uint64_t>k)]
                    dup = False
                    for a in range(nc):
                        if cand[a] == u:
                            dup = True
                            break
                    if not dup:
                        cand[nc] = u
                        nc += 1
            if kind == ERWC:
                nf = 0
                for a in range(nc):
                    if not visited[cand[a]]:
                        nf += 1
                if nf > 0:
                    nf = 0
                    for a in range(nc):
                        if not visited[cand[a]]:
                            cand[nf] = cand[a]
                            nf += 1
                    nc = nf
            best = cand[0]
            bn = hval[best] if kind == ERWC else visits[best] + rwc_offset
            bd = indptr[best + 1] - indptr[best]
            ties = 1
            for a in range(1, nc):
                u = cand[a]
                un = hval[u] if kind == ERWC else visits[u] + rwc_offset
                ud = indptr[u + 1] - indptr[u]
                if un * bd < bn * ud:
                    best = u
                    bn = un
                    bd = ud
                    ties = 1
                elif un * bd == bn * ud:
                    ties += 1
                    if bounded(rng, <uint64_t>ties) == 0:
                        best = u
                        bn = un
                        bd = ud
            nxt = best
            if kind == ERWC:
                for i in range(lo, lo + k):
                    hval[indices[i]] += hq
                hval[nxt] += hp - hq
        t += 1
        cur = nxt
        visits[nxt] += 1
        if not visited[nxt]:
            visited[nxt] = 1
            covered += 1
            while j < ntargets and targets[j] <= covered:
                partial[j] = t
                j += 1
    out[0] = t
    out[1] = covered
    out[2] = cur
    return status


cdef bitgen_t* _bitgen_ptr(object bitgen) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")


def run_walk(graph, int kind, int64_t d, int64_t hp, int64_t hq, bint distinct,
             int64_t rwc_offset, int64_t start, bitgen, int64_t step_cap, targets):
    cdef int64_t n = graph.n
    if not 0 <= start < n:
        raise ValueError(f"start node {start} out of range 0..{n - 1}")
    cdef const int64_t[::1] indptr = graph.indptr
    cdef const int64_t[::1] indices = graph.indices
    cdef int64_t[::1] tg = np.ascontiguousarray(targets, dtype=np.int64)
    cdef int64_t ntargets = tg.shape[0]
    partial = np.full(ntargets, -1, dtype=np.int64)
    visits = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] pv = partial
    cdef int64_t[::1] vv = visits
    cdef char[::1] visited = np.zeros(n, dtype=np.int8)
    cdef int64_t[::1] hval = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] cand = np.zeros(max(d, 1), dtype=np.int64)
    cdef int64_t out[3]
    cdef bitgen_t* rng = _bitgen_ptr(bitgen)
    cdef int status
    cdef const int64_t* tp = &tg[0] if ntargets > 0 else NULL
    cdef int64_t* pp = &pv[0] if ntargets > 0 else NULL
    with bitgen.lock:
        with nogil:
            status = walk_core(&indptr[0], &indices[0], n, kind, d, hp, hq, distinct,
                               rwc_offset, start, rng,
                               step_cap, tp, ntargets, pp, &vv[0], &visited[0],
                               &hval[0], &cand[0], out)
    return status, out[0], partial.tolist(), visits, out[1], out[2]


cdef int64_t _batch_loop(const int64_t* indptr, const int64_t* indices, int64_t n,
                         int kind, int64_t d, int64_t hp, int64_t hq, bint distinct,
                         int64_t rwc_offset, int64_t start,
                         bitgen_t* rng, int64_t step_cap, int64_t replicates,
                         int64_t* cover, int64_t* loads, int64_t* visits, char* visited,
                         int64_t* hval, int64_t* cand, int* status) noexcept nogil:
    """Run replicates back to back; returns how many completed."""
    cdef int64_t out[3]
    cdef int64_t r, v, mx
    for r in range(replicates):
        memset(visits, 0, n * sizeof(int64_t))
        memset(visited, 0, n * sizeof(char))
        memset(hval, 0, n * sizeof(int64_t))
        status[0] = walk_core(indptr, indices, n, kind, d, hp, hq, distinct, rwc_offset,
                              start, rng,
                              step_cap, NULL, 0, NULL, visits, visited, hval, cand, out)
        if status[0] != OK:
            return r
        mx = 0
        for v in range(n):
            if visits[v] > mx:
                mx = visits[v]
        cover[r] = out[0]
        loads[r] = mx
    return replicates


def run_batch(graph, int kind, int64_t d, int64_t hp, int64_t hq, bint distinct,
              int64_t rwc_offset, int64_t start, bitgen, int64_t step_cap,
              int64_t replicates):
    cdef int64_t n = graph.n
    if not 0 <= start < n:
        raise ValueError(f"start node {start} out of range 0..{n - 1}")
    cdef const int64_t[::1] indptr = graph.indptr
    cdef const int64_t[::1] indices = graph.indices
    cover = np.zeros(max(replicates, 1), dtype=np.int64)
    loads = np.zeros(max(replicates, 1), dtype=np.int64)
    cdef int64_t[::1] cv = cover
    cdef int64_t[::1] lv = loads
    cdef int64_t[::1] visits = np.zeros(n, dtype=np.int64)
    cdef char[::1] visited = np.zeros(n, dtype=np.int8)
    cdef int64_t[::1] hval = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] cand = np.zeros(max(d, 1), dtype=np.int64)
    cdef bitgen_t* rng = _bitgen_ptr(bitgen)
    cdef int status = OK
    cdef int64_t done
    with bitgen.lock:
        with nogil:
            done = _batch_loop(&indptr[0], &indices[0], n, kind, d, hp, hq, distinct,
                               rwc_offset, start, rng,
                               step_cap, replicates, &cv[0], &lv[0], &visits[0],
                               &visited[0], &hval[0], &cand[0], &status)
    return status, cover[:done], loads[:done]
