"""Seeded random instances: partial bijections, relations, elements, subsets."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .measured import WeightedSpace
from .pbij import UNDEF, PartialBijection
from .relation import FiniteRelation, LocalIso, make_relation


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_pbij(rng: np.random.Generator, n: int, full: bool = False) -> PartialBijection:
    perm = rng.permutation(n)
    if full:
        return PartialBijection(perm, check=False)
    keep = rng.random(n) < rng.random()
    return PartialBijection(np.where(keep, perm, UNDEF), check=False)


def random_pbij_rows(rng: np.random.Generator, k: int, n: int) -> np.ndarray:
    """``k`` random partial bijections of ``[n]`` as a kernel stack."""
    perms = np.argsort(rng.random((k, n)), axis=1)
    keep = rng.random((k, n)) < rng.random((k, 1))
    return np.ascontiguousarray(np.where(keep, perms, UNDEF).astype(np.int64))


def random_relation(
    rng: np.random.Generator,
    max_atoms: int = 10,
    max_den: int = 60,
    n_atoms: int | None = None,
    min_class: int = 1,
) -> FiniteRelation:
    """Random relation with class-constant weights whose denominators are at most ``max_den``.

    Each class gets an integer weight ``w_c``; atom weights are
    ``w_c / sum_c |c| w_c`` so the common denominator never exceeds
    ``max_den``.
    """
    n = n_atoms if n_atoms is not None else int(rng.integers(max(1, min_class), max_atoms + 1))
    if n > max_den:
        raise ValueError("need n_atoms <= max_den")
    order = rng.permutation(n)
    sizes = []
    left = n
    while left:
        lo = min(min_class, left)
        s = int(rng.integers(lo, left + 1))
        if left - s and left - s < min_class:
            s = left
        sizes.append(s)
        left -= s
    classes, pos = [], 0
    for s in sizes:
        classes.append(sorted(order[pos:pos + s].tolist()))
        pos += s
    cw = [1] * len(classes)
    total = n
    for _ in range(4 * len(classes)):
        k = int(rng.integers(len(classes)))
        if total + len(classes[k]) <= max_den:
            cw[k] += 1
            total += len(classes[k])
    weights = [Fraction(0)] * n
    for c, w in zip(classes, cw):
        for x in c:
            weights[x] = Fraction(w, total)
    return make_relation(WeightedSpace.from_weights(weights), classes)


def random_element(rng: np.random.Generator, R: FiniteRelation, full: bool = False) -> LocalIso:
    arr = np.full(R.n, UNDEF, dtype=np.int64)
    density = 1.0 if full else rng.random()
    for c in R.classes:
        c = np.asarray(c)
        img = rng.permutation(c)
        keep = np.ones(c.size, bool) if full else rng.random(c.size) < density
        arr[c[keep]] = img[keep]
    return LocalIso(R, PartialBijection(arr, check=False), check=False)


def random_subset(rng: np.random.Generator, n: int) -> frozenset[int]:
    return frozenset(np.flatnonzero(rng.random(n) < rng.random()).tolist())
