"""The numba kernels and their numpy fallbacks must agree bit for bit."""
import numpy as np
import pytest

from sofickit import kernels
from sofickit.oracle import brute_compose, pbij_rows
from sofickit.pbij import PartialBijection, unstack
from sofickit.sampling import random_pbij_rows, rng_from

NAMES = ["compose_rows", "inverse_rows", "diff_counts", "weighted_diff", "fixed_counts",
         "weighted_fixed", "idempotent_rows"]

needs_numba = pytest.mark.skipif(not hasattr(kernels, "compose_rows_numba"), reason="numba unavailable")


def _args(name, F, G, w):
    return {"inverse_rows": (F,), "fixed_counts": (F,), "idempotent_rows": (F,),
            "weighted_fixed": (F, w), "weighted_diff": (F, G, w)}.get(name, (F, G))


@needs_numba
@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [0, 1, 5, 13])
def test_backends_agree(name, n):
    rng = rng_from(n)
    F, G = random_pbij_rows(rng, 500, n), random_pbij_rows(rng, 500, n)
    w = rng.integers(1, 7, size=n).astype(np.int64)
    a = getattr(kernels, f"{name}_numpy")(*_args(name, F, G, w))
    b = getattr(kernels, f"{name}_numba")(*_args(name, F, G, w))
    assert np.array_equal(a, b)


@needs_numba
def test_replicate_backends_agree():
    rng = rng_from(0)
    F = random_pbij_rows(rng, 50, 4)
    counts = np.array([2, 2, 3, 1], dtype=np.int64)
    assert np.array_equal(kernels.replicate_rows_numpy(F, counts), kernels.replicate_rows_numba(F, counts))


def test_compose_kernel_matches_brute_force():
    rows = np.ascontiguousarray(pbij_rows(3))
    k = len(rows)
    ii, jj = np.divmod(np.arange(k * k), k)
    got = unstack(kernels.compose_rows(rows[ii], rows[jj]))
    fs = unstack(rows)
    assert got == [brute_compose(fs[i], fs[j]) for i, j in zip(ii, jj)]


def test_inverse_and_fixed_kernels():
    rows = np.ascontiguousarray(pbij_rows(4))
    inv = unstack(kernels.inverse_rows(rows))
    assert inv == [f.inverse() for f in unstack(rows)]
    assert kernels.fixed_counts(rows).tolist() == [len(f.fix) for f in unstack(rows)]
    assert kernels.idempotent_rows(rows).tolist() == [f.is_idempotent() for f in unstack(rows)]
    assert isinstance(unstack(rows)[0], PartialBijection)
