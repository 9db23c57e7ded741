"""Low-level counting and dot-product kernels over sorted sparse columns.

Two interchangeable implementations are kept side by side: numba-compiled
two-pointer merges (the default) and pure-numpy set operations.  The active
one is picked at import time from the ``SAOLA_BACKEND`` environment variable
(``numba`` or ``numpy``) and can be swapped at runtime with
:func:`use_backend`, which ``saola bench --compare-backends`` relies on.

All kernels treat a column as a pair of arrays ``(indices, values)`` where
``indices`` is strictly increasing and every row absent from ``indices``
implicitly holds value/code 0.
"""

from __future__ import annotations

import os
import warnings
from contextlib import contextmanager

import numpy as np

__all__ = [
    "pair_counts",
    "sparse_dot",
    "current_backend",
    "set_backend",
    "use_backend",
    "available_backends",
    "warmup",
]


# ---------------------------------------------------------------------------
# pure-numpy implementations

def _pair_counts_numpy(ix, cx, iy, cy, kx, ky, n):
    common, ax, ay = np.intersect1d(ix, iy, assume_unique=True, return_indices=True)
    out = np.bincount(cx[ax] * ky + cy[ay], minlength=kx * ky)
    x_only = np.ones(ix.shape[0], dtype=bool)
    x_only[ax] = False
    y_only = np.ones(iy.shape[0], dtype=bool)
    y_only[ay] = False
    out += np.bincount(cx[x_only] * ky, minlength=kx * ky)
    out += np.bincount(cy[y_only], minlength=kx * ky)
    covered = common.shape[0] + int(x_only.sum()) + int(y_only.sum())
    out[0] += n - covered
    return out.astype(np.int64)


def _sparse_dot_numpy(ix, vx, iy, vy):
    _, ax, ay = np.intersect1d(ix, iy, assume_unique=True, return_indices=True)
    if ax.shape[0] == 0:
        return 0.0
    return float(np.dot(vx[ax], vy[ay]))


_NUMPY_IMPL = {
    "pair_counts": _pair_counts_numpy,
    "sparse_dot": _sparse_dot_numpy,
}


# ---------------------------------------------------------------------------
# numba implementations (merge joins; O(nnz) and allocation-free)

def _build_numba_impl():
    from numba import njit

    @njit(cache=True, nogil=True)
    def pair_counts_nb(ix, cx, iy, cy, kx, ky, n):  # pragma: no cover - jitted
        out = np.zeros(kx * ky, dtype=np.int64)
        i = 0
        j = 0
        nx = ix.shape[0]
        ny = iy.shape[0]
        covered = 0
        while i < nx and j < ny:
            a = ix[i]
            b = iy[j]
            if a == b:
                out[cx[i] * ky + cy[j]] += 1
                i += 1
                j += 1
            elif a < b:
                out[cx[i] * ky] += 1
                i += 1
            else:
                out[cy[j]] += 1
                j += 1
            covered += 1
        while i < nx:
            out[cx[i] * ky] += 1
            i += 1
            covered += 1
        while j < ny:
            out[cy[j]] += 1
            j += 1
            covered += 1
        out[0] += n - covered
        return out

    @njit(cache=True, nogil=True)
    def sparse_dot_nb(ix, vx, iy, vy):  # pragma: no cover - jitted
        acc = 0.0
        i = 0
        j = 0
        nx = ix.shape[0]
        ny = iy.shape[0]
        while i < nx and j < ny:
            a = ix[i]
            b = iy[j]
            if a == b:
                acc += vx[i] * vy[j]
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        return acc

    return {"pair_counts": pair_counts_nb, "sparse_dot": sparse_dot_nb}


def _load_backends():
    backends = {"numpy": _NUMPY_IMPL}
    try:
        backends["numba"] = _build_numba_impl()
    except ImportError:  # numba genuinely absent; numpy path keeps working
        pass
    return backends


_BACKENDS = _load_backends()


def _initial_backend():
    requested = os.environ.get("SAOLA_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(
            f"SAOLA_BACKEND must be 'numba' or 'numpy', got {requested!r}"
        )
    if requested == "numba" and "numba" not in _BACKENDS:
        warnings.warn("numba unavailable, falling back to numpy kernels")
        return "numpy"
    return requested


_ACTIVE = _initial_backend()


def available_backends():
    return tuple(sorted(_BACKENDS))


def current_backend() -> str:
    return _ACTIVE


def set_backend(name: str) -> None:
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    global _ACTIVE
    _ACTIVE = name


@contextmanager
def use_backend(name: str):
    """Temporarily switch the kernel backend (used by the benchmark)."""
    previous = _ACTIVE
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def pair_counts(ix, cx, iy, cy, kx, ky, n):
    """Contingency table (flat, row-major kx*ky) of two sparse code columns.

    Rows absent from a column count as code 0, so cell (0, 0) absorbs the
    instances stored in neither column.
    """
    return _BACKENDS[_ACTIVE]["pair_counts"](ix, cx, iy, cy, kx, ky, n)


def sparse_dot(ix, vx, iy, vy) -> float:
    """Dot product of two sparse real columns over their index intersection."""
    return float(_BACKENDS[_ACTIVE]["sparse_dot"](ix, vx, iy, vy))


def warmup() -> None:
    """Force JIT compilation of the numba kernels on tiny inputs."""
    if "numba" not in _BACKENDS:
        return
    ix = np.array([0, 2], dtype=np.int64)
    cx = np.array([1, 1], dtype=np.int64)
    iy = np.array([1, 2], dtype=np.int64)
    cy = np.array([1, 2], dtype=np.int64)
    _BACKENDS["numba"]["pair_counts"](ix, cx, iy, cy, 2, 3, 4)
    _BACKENDS["numba"]["sparse_dot"](
        ix, cx.astype(np.float64), iy, cy.astype(np.float64)
    )
