"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import from ``DYADICLAB_BACKEND``
(``numba`` or ``numpy``; default ``numba`` when it imports) and can be
switched at runtime with :func:`set_backend`. Both paths run the
butterflies in the same stage order, so their outputs agree bit for bit.
"""

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

ENV_FLAG = "DYADICLAB_BACKEND"
BACKENDS = ("numba", "numpy")


def _initial_backend():
    name = os.environ.get(ENV_FLAG, "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"{ENV_FLAG}={name!r}: expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError(f"{ENV_FLAG}=numba but numba is not importable")
    return name


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not importable")
    _backend = name


def set_threads(n):
    """Clamp to >= 1 and forward to numba's thread pool when active."""
    n = max(1, int(n))
    if HAVE_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n


# --------------------------------------------------------------------------
# numpy fallback


def _fwht_rows_numpy(a):
    rows, n = a.shape
    h = 1
    while h < n:
        b = a.reshape(rows, n // (2 * h), 2, h)
        u = b[:, :, 0, :].copy()
        v = b[:, :, 1, :]
        b[:, :, 0, :] = u + v
        b[:, :, 1, :] = u - v
        h *= 2
    return a


def _kernel_rows_numpy(ns, weights, perm, m):
    size = 1 << m
    j = np.arange(size)
    k = ns[:, None] - 1 - j[None, :]
    rows = np.where(k >= 0, weights[np.clip(k, 0, None)], 0.0)
    rows /= weights[ns][:, None]
    if perm is not None:
        rows = np.ascontiguousarray(rows[:, perm])
    return _fwht_rows_numpy(rows)


# --------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _fwht_1d(x):
        n = x.shape[0]
        h = 1
        # two stages (h, 2h) per sweep; each element sees the same
        # additions as the one-stage-at-a-time numpy loop
        while 4 * h <= n:
            for start in range(0, n, 4 * h):
                for i in range(start, start + h):
                    a = x[i]
                    b = x[i + h]
                    c = x[i + 2 * h]
                    d = x[i + 3 * h]
                    a, b = a + b, a - b
                    c, d = c + d, c - d
                    x[i] = a + c
                    x[i + 2 * h] = a - c
                    x[i + h] = b + d
                    x[i + 3 * h] = b - d
            h *= 4
        if h < n:
            for i in range(h):
                u = x[i]
                v = x[i + h]
                x[i] = u + v
                x[i + h] = u - v

    @njit(cache=True, parallel=True)
    def _fwht_rows_numba(a):
        for r in prange(a.shape[0]):
            _fwht_1d(a[r])
        return a

    @njit(cache=True, parallel=True)
    def _kernel_rows_jit(ns, weights, perm, use_perm, m):
        size = 1 << m
        out = np.zeros((ns.shape[0], size))
        for r in prange(ns.shape[0]):
            n = ns[r]
            row = out[r]
            scale = weights[n]
            for i in range(size):
                j = perm[i] if use_perm else i
                if j < n:
                    row[i] = weights[n - 1 - j] / scale
            _fwht_1d(row)
        return out

    def _kernel_rows_numba(ns, weights, perm, m):
        if perm is None:
            return _kernel_rows_jit(ns, weights, np.zeros(1, np.int64), False, m)
        return _kernel_rows_jit(ns, weights, perm, True, m)


# --------------------------------------------------------------------------
# dispatch


def fwht_rows(a):
    """Unnormalized in-place Walsh-Hadamard transform of each row of ``a``.

    ``a`` must be a C-contiguous float64 2-D array whose row length is a
    power of two. Output is in natural (Paley) order.
    """
    if _backend == "numba":
        return _fwht_rows_numba(a)
    return _fwht_rows_numpy(a)


def kernel_rows(ns, weights, perm, m):
    """Sample the Cesàro-type kernels ``sum_{j<N} w[N-1-j]/w[N] psi_j``.

    One row per entry of ``ns`` on the rank-``m`` grid. ``perm`` maps a
    Paley index to the system index (``None`` for the Paley system).
    """
    ns = np.ascontiguousarray(ns, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if perm is not None:
        perm = np.ascontiguousarray(perm, dtype=np.int64)
    if _backend == "numba":
        return _kernel_rows_numba(ns, weights, perm, m)
    return _kernel_rows_numpy(ns, weights, perm, m)
