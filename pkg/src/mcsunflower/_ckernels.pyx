# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Mirrors ``_pykernels`` exactly."""
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.stdlib cimport malloc, free

import numpy as np

BACKEND = "cython"


cdef extern from *:
    int popcount "__builtin_popcountll"(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef bint _dfs(const uint64_t[::1] members, const int64_t[::1] offsets, int k,
               int level, uint64_t core, uint64_t uni, int core_size,
               int64_t* chosen) noexcept nogil:
    cdef int64_t idx
    cdef uint64_t x, a, c
    for idx in range(offsets[level], offsets[level + 1]):
        x = members[idx]
        if level == 0:
            if core_size >= 0 and popcount(x) <= core_size:
                continue
            chosen[0] = idx
            if _dfs(members, offsets, k, 1, 0, x, core_size, chosen):
                return True
        elif level == 1:
            a = members[chosen[0]]
            c = a & x
            if c == a or c == x:
                continue
            if core_size >= 0 and popcount(c) != core_size:
                continue
            chosen[1] = idx
            if k == 2:
                return True
            if _dfs(members, offsets, k, 2, c, a | x, core_size, chosen):
                return True
        else:
            if (x & uni) != core or x == core:
                continue
            chosen[level] = idx
            if level == k - 1:
                return True
            if _dfs(members, offsets, k, level + 1, core, uni | x, core_size, chosen):
                return True
    return False


def find_sunflower(members, offsets, int core_size=-1):
    cdef const uint64_t[::1] mv = np.ascontiguousarray(members, dtype=np.uint64)
    cdef const int64_t[::1] ov = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef int k = ov.shape[0] - 1
    cdef int64_t* chosen = <int64_t*> malloc(k * sizeof(int64_t))
    cdef bint found
    try:
        with nogil:
            found = _dfs(mv, ov, k, 0, 0, 0, core_size, chosen)
        if not found:
            return None
        return tuple(int(chosen[i]) for i in range(k))
    finally:
        free(chosen)


def best_completion(col, uint64_t base, uint64_t avoid, int nbits):
    cdef const uint64_t[::1] cv = np.ascontiguousarray(col, dtype=np.uint64)
    cdef int free_bits[64]
    cdef int m = 0, b, j, low
    for b in range(nbits):
        if not (avoid >> b) & 1:
            free_bits[m] = b
            m += 1
    cdef int64_t size = (<int64_t> 1) << m
    cdef uint64_t* forb = <uint64_t*> malloc(size * sizeof(uint64_t))
    if forb == NULL:
        raise MemoryError()
    cdef int64_t i, best_i = 0
    cdef int value, best = -1
    with nogil:
        forb[0] = base
        for i in range(size):
            if i > 0:
                low = __builtin_ctzll(i)
                forb[i] = forb[i & (i - 1)] | cv[free_bits[low]]
            value = popcount(i) + nbits - popcount(forb[i])
            if value > best:
                best = value
                best_i = i
    free(forb)
    cdef uint64_t mask = 0
    for j in range(m):
        if (best_i >> j) & 1:
            mask |= (<uint64_t> 1) << free_bits[j]
    return best, int(mask), int(size)


def good_pair_count(f, g, uint64_t full):
    cdef const uint64_t[::1] fv = np.ascontiguousarray(f, dtype=np.uint64)
    cdef const uint64_t[::1] gv = np.ascontiguousarray(g, dtype=np.uint64)
    cdef Py_ssize_t i, j
    cdef uint64_t x, y
    cdef int64_t total = 0
    with nogil:
        for i in range(fv.shape[0]):
            x = fv[i]
            for j in range(gv.shape[0]):
                y = gv[j]
                if (x & ~y) != 0 and (y & ~x) != 0 and (x | y) != full:
                    total += 1
    return int(total)


cdef inline int _pq(int e[3][3]) noexcept nogil:
    cdef int i, ii, r, j, jj, v, w, total = 0, other
    cdef int rows[3][3]
    rows[0][0] = 0; rows[0][1] = 1; rows[0][2] = 2
    rows[1][0] = 0; rows[1][1] = 2; rows[1][2] = 1
    rows[2][0] = 1; rows[2][1] = 2; rows[2][2] = 0
    for w in range(3):
        i = rows[w][0]; ii = rows[w][1]; r = rows[w][2]
        for j in range(3):
            for jj in range(3):
                if j != jj:
                    total += e[i][j] * e[ii][jj]
        for v in range(3):
            if e[i][v] and e[ii][v]:
                other = 0
                for jj in range(3):
                    if jj != v:
                        other += e[r][jj]
                total += other
    return total


def pq_enumeration_total(tables, int n):
    cdef const uint8_t[:, ::1] tv = np.ascontiguousarray(tables, dtype=np.uint8)
    cdef int64_t code, ncodes = (<int64_t> 1) << (2 * n)
    cdef int64_t total = 0, count = 0
    cdef uint64_t x[4]
    cdef uint64_t y
    cdef int e[3][3]
    cdef int el, p, i, j
    with nogil:
        for code in range(ncodes):
            x[0] = 0; x[1] = 0; x[2] = 0; x[3] = 0
            for el in range(n):
                p = (code >> (2 * el)) & 3
                x[p] |= (<uint64_t> 1) << el
            if x[1] == 0 or x[2] == 0 or x[3] == 0:
                continue
            count += 1
            for j in range(3):
                y = x[0] | x[j + 1]
                for i in range(3):
                    e[i][j] = tv[i, y]
            total += _pq(e)
    return int(total), int(count)


def count_assignments(int n):
    cdef int64_t code, ncodes = (<int64_t> 1) << (2 * n)
    cdef int64_t count = 0
    cdef int seen, el
    with nogil:
        for code in range(ncodes):
            seen = 0
            for el in range(n):
                seen |= 1 << ((code >> (2 * el)) & 3)
            if (seen & 14) == 14:
                count += 1
    return int(count)
