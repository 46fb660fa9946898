"""Pure-Python kernels.

Reference implementation of the Monte Carlo inner loops.  ``_ckernels`` (Cython)
mirrors every function here draw for draw; see :mod:`dnfcover.kernels`.

All sizes are integers on a common scale where ``capacity`` is one full bin.
Categorical draws use cumulative integer weights ``cum`` over ``denom``.
"""

from bisect import bisect_right

import numpy as np

from .rng import GOLDEN, MASK64, mix64, stream_key


def _cat(state, cum, denom):
    state = (state + GOLDEN) & MASK64
    r = (mix64(state) * denom) >> 64
    return state, bisect_right(cum, r)


def stopping_times(sizes, cum, denom, capacity, seed, stream0, trials):
    sizes = [int(s) for s in sizes]
    cum = [int(c) for c in cum]
    t_out = np.zeros(trials, dtype=np.int64)
    r_out = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        level = 0
        count = 0
        while level < capacity:
            state, i = _cat(state, cum, denom)
            level += sizes[i]
            count += 1
        t_out[t] = count
        r_out[t] = level - capacity
    return t_out, r_out


def dnf_count(items, capacity, start):
    level = start
    bins = 0
    for x in items:
        level += int(x)
        if level >= capacity:
            bins += 1
            level = 0
    return bins, level


def shuffled_dnf(items, capacity, seed, stream0, trials):
    base = [int(x) for x in items]
    n = len(base)
    out = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        perm = list(base)
        for i in range(n - 1, 0, -1):
            state = (state + GOLDEN) & MASK64
            j = (mix64(state) * (i + 1)) >> 64
            perm[i], perm[j] = perm[j], perm[i]
        out[t] = dnf_count(perm, capacity, 0)[0]
    return out


def shuffled_prefixes(n_items, length, seed, stream0, trials):
    """Index prefixes of uniform permutations (partial Fisher-Yates from the back)."""
    out = np.zeros((trials, length), dtype=np.int64)
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        perm = list(range(n_items))
        for k in range(length):
            i = n_items - 1 - k
            state = (state + GOLDEN) & MASK64
            j = (mix64(state) * (i + 1)) >> 64
            perm[i], perm[j] = perm[j], perm[i]
            out[t, k] = perm[i]
    return out


def iid_indices(cum, denom, n, seed, stream0, trials):
    cum = [int(c) for c in cum]
    out = np.zeros((trials, n), dtype=np.int64)
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        for k in range(n):
            state, out[t, k] = _cat(state, cum, denom)
    return out


def iid_dnf(sizes, cum, denom, capacity, n, seed, stream0, trials):
    sizes = [int(s) for s in sizes]
    cum = [int(c) for c in cum]
    out = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        level = 0
        bins = 0
        for _ in range(n):
            state, i = _cat(state, cum, denom)
            level += sizes[i]
            if level >= capacity:
                bins += 1
                level = 0
        out[t] = bins
    return out


def cover_failures(n, length, seed, stream0, trials):
    """Count uniform vectors in {1..n}^length that fail to cover (n, ..., 1)."""
    failures = 0
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        hist = [0] * (n + 1)
        for _ in range(length):
            state = (state + GOLDEN) & MASK64
            hist[1 + ((mix64(state) * n) >> 64)] += 1
        # i-th largest >= n-i+1 for all i  <=>  #entries >= v is >= n-v+1 for all v
        at_least = 0
        for v in range(n, 0, -1):
            at_least += hist[v]
            if at_least < n - v + 1:
                failures += 1
                break
    return failures


def ef_hits(items, large, horizon, s_star, seed, stream0, trials):
    """Count trials whose first ``horizon`` draws are all small and sum to >= s_star."""
    items = [int(x) for x in items]
    large = [bool(b) for b in large]
    n = len(items)
    hits = 0
    for t in range(trials):
        state = stream_key(seed, (stream0 + t) & MASK64)
        total = 0
        ok = True
        for _ in range(horizon):
            state = (state + GOLDEN) & MASK64
            k = (mix64(state) * n) >> 64
            if large[k]:
                ok = False
                break
            total += items[k]
        if ok and total >= s_star:
            hits += 1
    return hits
