"""Batched integer kernels over stacks of partial bijections.

A stack is a 2-D ``int64`` array of shape ``(k, n)``: row ``r`` is one
partial bijection of ``[n]`` with ``-1`` marking undefined points.  Every
kernel returns integers (counts or weighted counts), so exact rationals are
recovered by the caller with a single division.

Two implementations exist for each kernel: a numba ``@njit`` loop and a
vectorized numpy expression.  The active one is chosen at import time by
``sofickit._backend`` (``SOFICKIT_KERNELS=numpy`` forces numpy).  Both are
always importable as ``<name>_numpy`` / ``<name>_numba`` so they can be
cross-checked and benchmarked against each other.
"""
import numpy as np

from ._backend import BACKEND, HAVE_NUMBA

__all__ = [
    "BACKEND",
    "compose_rows",
    "inverse_rows",
    "diff_counts",
    "weighted_diff",
    "fixed_counts",
    "weighted_fixed",
    "idempotent_rows",
    "replicate_rows",
]


# -- numpy path --------------------------------------------------------------

def compose_rows_numpy(H, G):
    """Row-wise ``H[r] o G[r]`` (apply ``G`` first)."""
    safe = np.where(G >= 0, G, 0)
    out = np.take_along_axis(H, safe, axis=1)
    out[G < 0] = -1
    return out


def inverse_rows_numpy(F):
    out = np.full_like(F, -1)
    rows, cols = np.nonzero(F >= 0)
    out[rows, F[rows, cols]] = cols
    return out


def diff_counts_numpy(F, G):
    # undefined == undefined, so one mismatch test covers both the
    # domain symmetric difference and pointwise disagreement
    return np.count_nonzero(F != G, axis=1).astype(np.int64)


def weighted_diff_numpy(F, G, w):
    return (F != G).astype(np.int64) @ w


def fixed_counts_numpy(F):
    return np.count_nonzero(F == np.arange(F.shape[1]), axis=1).astype(np.int64)


def weighted_fixed_numpy(F, w):
    return (F == np.arange(F.shape[1])).astype(np.int64) @ w


def idempotent_rows_numpy(F):
    return np.all((F < 0) | (F == np.arange(F.shape[1])), axis=1)


def replicate_rows_numpy(G, counts):
    """Blow up atom maps ``G`` so atom ``x`` owns ``counts[x]`` contiguous copies.

    Copy ``t`` of ``x`` goes to copy ``t`` of ``G[r, x]``.
    """
    starts = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)
    owner = np.repeat(np.arange(len(counts)), counts)
    offset = np.arange(owner.size) - starts[owner]
    tgt = G[:, owner]
    return np.where(tgt >= 0, starts[np.where(tgt >= 0, tgt, 0)] + offset, -1)


# -- numba path --------------------------------------------------------------

if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def compose_rows_numba(H, G):
        k, n = G.shape
        out = np.empty_like(G)
        for r in range(k):
            for x in range(n):
                y = G[r, x]
                out[r, x] = -1 if y < 0 else H[r, y]
        return out

    @njit(cache=True)
    def inverse_rows_numba(F):
        k, n = F.shape
        out = np.full_like(F, -1)
        for r in range(k):
            for x in range(n):
                y = F[r, x]
                if y >= 0:
                    out[r, y] = x
        return out

    @njit(cache=True)
    def diff_counts_numba(F, G):
        k, n = F.shape
        out = np.zeros(k, dtype=np.int64)
        for r in range(k):
            c = 0
            for x in range(n):
                if F[r, x] != G[r, x]:
                    c += 1
            out[r] = c
        return out

    @njit(cache=True)
    def weighted_diff_numba(F, G, w):
        k, n = F.shape
        out = np.zeros(k, dtype=np.int64)
        for r in range(k):
            c = 0
            for x in range(n):
                if F[r, x] != G[r, x]:
                    c += w[x]
            out[r] = c
        return out

    @njit(cache=True)
    def fixed_counts_numba(F):
        k, n = F.shape
        out = np.zeros(k, dtype=np.int64)
        for r in range(k):
            c = 0
            for x in range(n):
                if F[r, x] == x:
                    c += 1
            out[r] = c
        return out

    @njit(cache=True)
    def weighted_fixed_numba(F, w):
        k, n = F.shape
        out = np.zeros(k, dtype=np.int64)
        for r in range(k):
            c = 0
            for x in range(n):
                if F[r, x] == x:
                    c += w[x]
            out[r] = c
        return out

    @njit(cache=True)
    def idempotent_rows_numba(F):
        k, n = F.shape
        out = np.ones(k, dtype=np.bool_)
        for r in range(k):
            for x in range(n):
                y = F[r, x]
                if y >= 0 and y != x:
                    out[r] = False
                    break
        return out

    @njit(cache=True)
    def replicate_rows_numba(G, counts):
        k, n = G.shape
        starts = np.zeros(n, dtype=np.int64)
        for x in range(1, n):
            starts[x] = starts[x - 1] + counts[x - 1]
        total = starts[n - 1] + counts[n - 1] if n > 0 else 0
        out = np.full((k, total), -1, dtype=np.int64)
        for r in range(k):
            for x in range(n):
                y = G[r, x]
                if y >= 0:
                    for t in range(counts[x]):
                        out[r, starts[x] + t] = starts[y] + t
        return out

    compose_rows = compose_rows_numba
    inverse_rows = inverse_rows_numba
    diff_counts = diff_counts_numba
    weighted_diff = weighted_diff_numba
    fixed_counts = fixed_counts_numba
    weighted_fixed = weighted_fixed_numba
    idempotent_rows = idempotent_rows_numba
    _replicate = replicate_rows_numba
else:
    compose_rows = compose_rows_numpy
    inverse_rows = inverse_rows_numpy
    diff_counts = diff_counts_numpy
    weighted_diff = weighted_diff_numpy
    fixed_counts = fixed_counts_numpy
    weighted_fixed = weighted_fixed_numpy
    idempotent_rows = idempotent_rows_numpy
    _replicate = replicate_rows_numpy


def replicate_rows(G, counts):
    G = np.ascontiguousarray(G, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    return _replicate(G, counts)
