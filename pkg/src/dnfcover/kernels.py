"""Kernel backend selection and trial-parallel dispatch.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
pure-Python twins in ``_pykernels`` are used.  Set ``DNFCOVER_PURE_PYTHON=1``
to force the fallback.  Both backends consume identical random streams, so
results never depend on which one ran, nor on the thread count: trial ``t``
always draws from stream ``stream0 + t``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

try:
    if os.environ.get("DNFCOVER_PURE_PYTHON"):
        raise ImportError("pure-Python kernels forced")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

MAX_DENOM = 1 << 63


def backend(name: str | None = None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def default_threads() -> int:
    return os.cpu_count() or 1


def _chunks(trials: int, threads: int):
    threads = max(1, min(threads, trials))
    step = -(-trials // threads)
    return [(start, min(step, trials - start)) for start in range(0, trials, step)]


def run_trials(fn, trials: int, stream0: int, threads: int | None = None, combine="concat"):
    """Split ``trials`` into contiguous chunks and run ``fn(stream_start, count)``.

    ``combine`` is "concat" for per-trial arrays or "sum" for counters.
    """
    if trials <= 0:
        return 0 if combine == "sum" else np.zeros(0, dtype=np.int64)
    threads = threads or default_threads()
    chunks = _chunks(trials, threads)
    if len(chunks) == 1:
        parts = [fn(stream0, trials)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: fn(stream0 + c[0], c[1]), chunks))
    if combine == "sum":
        return int(sum(parts))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(group) for group in zip(*parts))
    return np.concatenate(parts)


def as_int64(values) -> np.ndarray:
    return np.ascontiguousarray(np.asarray([int(v) for v in values], dtype=np.int64))


def as_uint64(values) -> np.ndarray:
    return np.ascontiguousarray(np.asarray([int(v) for v in values], dtype=np.uint64))
