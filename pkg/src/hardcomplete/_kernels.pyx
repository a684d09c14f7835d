# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled oracle kernels; same algorithms and outputs as ``_kernels_py``."""

import numpy as np
from libc.stdint cimport int64_t, uint64_t



def partition_search(weights):
    cdef int64_t[::1] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t n = w.shape[0], t
    cdef int64_t diff = w[0]
    cdef uint64_t step, mask = 1, bit, limit
    cdef int j
    for t in range(1, n):
        diff -= w[t]
    if diff == 0:
        return 1
    limit = (<uint64_t>1) << (n - 1)
    step = 1
    while step < limit:
        j = 1
        while not (step >> (j - 1)) & 1:
            j += 1
        bit = (<uint64_t>1) << j
        if mask & bit:
            diff -= 2 * w[j]
        else:
            diff += 2 * w[j]
        mask ^= bit
        if diff == 0:
            return <long long>mask
        step += 1
    return -1


def coloring_search(Py_ssize_t n, indptr, indices, int k):
    if n == 0:
        return []
    cdef int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef int64_t[::1] colors = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t v = 0, t
    cdef int64_t u, c
    cdef bint ok
    while True:
        c = colors[v] + 1
        while c < k:
            ok = True
            for t in range(ptr[v], ptr[v + 1]):
                u = idx[t]
                if u < v and colors[u] == c:
                    ok = False
                    break
            if ok:
                break
            c += 1
        if c < k:
            colors[v] = c
            v += 1
            if v == n:
                return [int(x) for x in colors]
        else:
            colors[v] = -1
            v -= 1
            if v < 0:
                return None


def one_in_k_search(Py_ssize_t n_vars, int k, clause_vars, clause_signs, occ_ptr, occ_idx):
    cdef Py_ssize_t m = len(clause_vars)
    if n_vars == 0:
        return [] if m == 0 else None
    cdef int64_t[:, ::1] cv = np.ascontiguousarray(np.asarray(clause_vars, dtype=np.int64).reshape(m, k))
    cdef int64_t[:, ::1] cs = np.ascontiguousarray(np.asarray(clause_signs, dtype=np.int64).reshape(m, k))
    cdef int64_t[::1] optr = np.ascontiguousarray(occ_ptr, dtype=np.int64)
    cdef int64_t[::1] oidx = np.ascontiguousarray(occ_idx, dtype=np.int64)
    cdef int64_t[::1] neg = np.zeros(m, dtype=np.int64)
    cdef int64_t[::1] free = np.full(m, k, dtype=np.int64)
    cdef int64_t[::1] values = np.zeros(n_vars, dtype=np.int64)
    cdef Py_ssize_t depth = 0, v, t, j, q
    cdef int64_t prev, val
    cdef bint ok
    while True:
        v = n_vars - 1 - depth
        prev = values[v]
        if prev != 0:
            for t in range(optr[v], optr[v + 1]):
                j = oidx[t]
                free[j] += 1
                for q in range(k):
                    if cv[j, q] == v and prev * cs[j, q] == -1:
                        neg[j] -= 1
        if prev == -1:
            values[v] = 0
            depth -= 1
            if depth < 0:
                return None
            continue
        val = 1 if prev == 0 else -1
        values[v] = val
        ok = True
        for t in range(optr[v], optr[v + 1]):
            j = oidx[t]
            free[j] -= 1
            for q in range(k):
                if cv[j, q] == v and val * cs[j, q] == -1:
                    neg[j] += 1
            if neg[j] > 1 or (neg[j] == 0 and free[j] == 0):
                ok = False
        if ok:
            depth += 1
            if depth == n_vars:
                return [int(x) for x in values]
