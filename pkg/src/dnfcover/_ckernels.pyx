# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels; draw-for-draw twins of ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t, uint8_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t key_of(uint64_t seed, uint64_t stream) noexcept nogil:
    return mix64(mix64(seed) ^ (stream * GOLDEN))


cdef inline uint64_t below(uint64_t* state, uint64_t bound) noexcept nogil:
    state[0] += GOLDEN
    return <uint64_t>(((<u128>mix64(state[0])) * (<u128>bound)) >> 64)


cdef inline Py_ssize_t cat(uint64_t* state, const uint64_t* cum, Py_ssize_t m,
                           uint64_t denom) noexcept nogil:
    cdef uint64_t r = below(state, denom)
    cdef Py_ssize_t i = 0
    while i < m - 1 and r >= cum[i]:
        i += 1
    return i


def stopping_times(const int64_t[::1] sizes, const uint64_t[::1] cum, uint64_t denom,
                   int64_t capacity, uint64_t seed, uint64_t stream0, Py_ssize_t trials):
    cdef cnp.ndarray[int64_t, ndim=1] t_arr = np.zeros(trials, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] r_arr = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] t_out = t_arr
    cdef int64_t[::1] r_out = r_arr
    cdef Py_ssize_t m = sizes.shape[0], t
    cdef uint64_t state
    cdef int64_t level, count
    with nogil:
        for t in range(trials):
            state = key_of(seed, stream0 + <uint64_t>t)
            level = 0
            count = 0
            while level < capacity:
                level += sizes[cat(&state, &cum[0], m, denom)]
                count += 1
            t_out[t] = count
            r_out[t] = level - capacity
    return t_arr, r_arr


cdef inline int64_t _dnf(const int64_t* items, Py_ssize_t n, int64_t capacity,
                         int64_t* level) noexcept nogil:
    cdef int64_t bins = 0
    cdef Py_ssize_t i
    for i in range(n):
        level[0] += items[i]
        if level[0] >= capacity:
            bins += 1
            level[0] = 0
    return bins


def dnf_count(const int64_t[::1] items, int64_t capacity, int64_t start):
    cdef int64_t level = start
    cdef int64_t bins
    cdef Py_ssize_t n = items.shape[0]
    if n == 0:
        return 0, start
    with nogil:
        bins = _dnf(&items[0], n, capacity, &level)
    return bins, level


def shuffled_dnf(const int64_t[::1] items, int64_t capacity, uint64_t seed,
                 uint64_t stream0, Py_ssize_t trials):
    cdef Py_ssize_t n = items.shape[0], t, i, j
    cdef cnp.ndarray[int64_t, ndim=1] arr = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] out = arr
    cdef int64_t* perm
    cdef int64_t tmp, level
    cdef uint64_t state
    if n == 0:
        return arr
    perm = <int64_t*>malloc(n * sizeof(int64_t))
    if perm == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(trials):
                state = key_of(seed, stream0 + <uint64_t>t)
                for i in range(n):
                    perm[i] = items[i]
                i = n - 1
                while i > 0:
                    j = <Py_ssize_t>below(&state, <uint64_t>(i + 1))
                    tmp = perm[i]; perm[i] = perm[j]; perm[j] = tmp
                    i -= 1
                level = 0
                out[t] = _dnf(perm, n, capacity, &level)
    finally:
        free(perm)
    return arr


def shuffled_prefixes(Py_ssize_t n_items, Py_ssize_t length, uint64_t seed,
                      uint64_t stream0, Py_ssize_t trials):
    cdef cnp.ndarray[int64_t, ndim=2] arr = np.zeros((trials, length), dtype=np.int64)
    cdef int64_t[:, ::1] out = arr
    cdef Py_ssize_t t, k, i, j
    cdef int64_t tmp
    cdef uint64_t state
    cdef int64_t* perm = <int64_t*>malloc(max(n_items, 1) * sizeof(int64_t))
    if perm == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(trials):
                state = key_of(seed, stream0 + <uint64_t>t)
                for i in range(n_items):
                    perm[i] = i
                for k in range(length):
                    i = n_items - 1 - k
                    j = <Py_ssize_t>below(&state, <uint64_t>(i + 1))
                    tmp = perm[i]; perm[i] = perm[j]; perm[j] = tmp
                    out[t, k] = perm[i]
    finally:
        free(perm)
    return arr


def iid_indices(const uint64_t[::1] cum, uint64_t denom, Py_ssize_t n, uint64_t seed,
                uint64_t stream0, Py_ssize_t trials):
    cdef cnp.ndarray[int64_t, ndim=2] arr = np.zeros((trials, n), dtype=np.int64)
    cdef int64_t[:, ::1] out = arr
    cdef Py_ssize_t m = cum.shape[0], t, k
    cdef uint64_t state
    with nogil:
        for t in range(trials):
            state = key_of(seed, stream0 + <uint64_t>t)
            for k in range(n):
                out[t, k] = cat(&state, &cum[0], m, denom)
    return arr


def iid_dnf(const int64_t[::1] sizes, const uint64_t[::1] cum, uint64_t denom,
            int64_t capacity, Py_ssize_t n, uint64_t seed, uint64_t stream0,
            Py_ssize_t trials):
    cdef cnp.ndarray[int64_t, ndim=1] arr = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] out = arr
    cdef Py_ssize_t m = sizes.shape[0], t, k
    cdef uint64_t state
    cdef int64_t level, bins
    with nogil:
        for t in range(trials):
            state = key_of(seed, stream0 + <uint64_t>t)
            level = 0
            bins = 0
            for k in range(n):
                level += sizes[cat(&state, &cum[0], m, denom)]
                if level >= capacity:
                    bins += 1
                    level = 0
            out[t] = bins
    return arr


def cover_failures(Py_ssize_t n, Py_ssize_t length, uint64_t seed, uint64_t stream0,
                   Py_ssize_t trials):
    cdef Py_ssize_t t, k, v
    cdef int64_t failures = 0, at_least
    cdef uint64_t state
    cdef int64_t* hist = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    if hist == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(trials):
                state = key_of(seed, stream0 + <uint64_t>t)
                for v in range(n + 1):
                    hist[v] = 0
                for k in range(length):
                    hist[1 + below(&state, <uint64_t>n)] += 1
                at_least = 0
                v = n
                while v > 0:
                    at_least += hist[v]
                    if at_least < n - v + 1:
                        failures += 1
                        break
                    v -= 1
    finally:
        free(hist)
    return failures


def ef_hits(const int64_t[::1] items, const uint8_t[::1] large, Py_ssize_t horizon,
            int64_t s_star, uint64_t seed, uint64_t stream0, Py_ssize_t trials):
    cdef Py_ssize_t n = items.shape[0], t, k, idx
    cdef int64_t hits = 0, total
    cdef bint ok
    cdef uint64_t state
    with nogil:
        for t in range(trials):
            state = key_of(seed, stream0 + <uint64_t>t)
            total = 0
            ok = True
            for k in range(horizon):
                idx = <Py_ssize_t>below(&state, <uint64_t>n)
                if large[idx]:
                    ok = False
                    break
                total += items[idx]
            if ok and total >= s_star:
                hits += 1
    return hits
