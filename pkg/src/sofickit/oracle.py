"""Brute-force ground truth: exhaustive enumeration and an independent embedding.

Nothing here calls the kernels or the embedding constructions of
:mod:`sofickit.embed` (only its container type and carrier closure), so
these routines can be used to check them.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from math import comb, factorial, lcm
from typing import Iterator

import numpy as np

from .embed import AlmostMorphism, carrier_products
from .errors import BudgetExceeded, RelationMismatch
from .pbij import PartialBijection
from .relation import FiniteRelation, LocalIso


@dataclass(frozen=True)
class EnumerationBudget:
    max_n: int = 5
    max_semigroup: int = 200_000
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("max_n", "max_semigroup", "trials"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_env(cls, **overrides) -> EnumerationBudget:
        """Defaults, then ``SOFICKIT_BUDGET``, then explicit overrides.

        ``SOFICKIT_BUDGET`` is either a bare integer (taken as ``max_n``) or
        comma-separated ``key=value`` pairs.
        """
        budget = cls()
        raw = os.environ.get("SOFICKIT_BUDGET", "").strip()
        if raw:
            if raw.isdigit():
                budget = replace(budget, max_n=int(raw))
            else:
                fields = {}
                for item in raw.split(","):
                    key, _, value = item.partition("=")
                    fields[key.strip()] = int(value)
                budget = replace(budget, **fields)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(budget, **overrides)


def count_pbij(n: int) -> int:
    return sum(comb(n, k) ** 2 * factorial(k) for k in range(n + 1))


def enumerate_pbij(n: int, budget: EnumerationBudget | None = None) -> Iterator[PartialBijection]:
    """Every element of [[n]] once: by domain size, then domain, range, and bijection."""
    budget = budget or EnumerationBudget.from_env()
    if n > budget.max_n:
        raise BudgetExceeded(f"[[{n}]] exceeds max_n={budget.max_n}")
    for k in range(n + 1):
        for dom in combinations(range(n), k):
            for ran in combinations(range(n), k):
                for img in permutations(ran):
                    table = [None] * n
                    for x, y in zip(dom, img):
                        table[x] = y
                    yield PartialBijection(table, check=False)


@lru_cache(maxsize=None)
def _pbij_rows(n: int) -> np.ndarray:
    rows = np.stack([f.arr for f in enumerate_pbij(n, EnumerationBudget(max_n=max(n, 1)))])
    rows.setflags(write=False)
    return rows


def pbij_rows(n: int, budget: EnumerationBudget | None = None) -> np.ndarray:
    """All of [[n]] as a ``(count_pbij(n), n)`` stack, in :func:`enumerate_pbij` order."""
    budget = budget or EnumerationBudget.from_env()
    if n > budget.max_n:
        raise BudgetExceeded(f"[[{n}]] exceeds max_n={budget.max_n}")
    return _pbij_rows(n)


def full_semigroup_size(R: FiniteRelation) -> int:
    out = 1
    for c in R.classes:
        out *= count_pbij(len(c))
    return out


def enumerate_full_semigroup(R: FiniteRelation, budget: EnumerationBudget | None = None) -> Iterator[LocalIso]:
    """Every class-respecting partial injection of the atoms of ``R``."""
    budget = budget or EnumerationBudget.from_env()
    size = full_semigroup_size(R)
    if size > budget.max_semigroup:
        raise BudgetExceeded(f"[[R]] has {size} elements, over max_semigroup={budget.max_semigroup}")
    inner = EnumerationBudget(max_n=max(len(c) for c in R.classes), max_semigroup=budget.max_semigroup)
    per_class = [[f.pairs() for f in enumerate_pbij(len(c), inner)] for c in R.classes]
    for choice in product(*per_class):
        table = [None] * R.n
        for c, pairs in zip(R.classes, choice):
            for i, j in pairs:
                table[c[i]] = c[j]
        yield LocalIso(R, PartialBijection(table, check=False), check=False)


class AltEmbedding:
    """Replication embedding with reversed block layout and a fixed relabeling.

    Blocks run from the last atom to the first, copies inside a block run
    backwards, and the resulting positions are scrambled by a permutation
    drawn once from ``seed``.  Written with plain loops, independent of
    :class:`sofickit.embed.ExactEmbedding`.
    """

    def __init__(self, R: FiniteRelation, seed: int = 12345):
        self.relation = R
        b = 1
        for w in R.space.weights:
            b = lcm(b, w.denominator)
        self.copies = [int(w * b) for w in R.space.weights]
        self.target_n = b
        start = {}
        pos = 0
        for x in reversed(range(R.n)):
            start[x] = pos
            pos += self.copies[x]
        self.start = start
        self.scramble = np.random.default_rng(seed).permutation(b).tolist()

    def position(self, x: int, t: int) -> int:
        return self.scramble[self.start[x] + self.copies[x] - 1 - t]

    def __call__(self, f: LocalIso) -> PartialBijection:
        if f.relation.structure != self.relation.structure:
            raise RelationMismatch("element from another relation")
        table = [None] * self.target_n
        for x, y in f.map.pairs():
            for t in range(self.copies[x]):
                table[self.position(x, t)] = self.position(y, t)
        return PartialBijection(table, check=False)


def alt_embedding(R: FiniteRelation, K=(), seed: int = 12345, close: bool = True) -> AlmostMorphism:
    emb = AltEmbedding(R, seed)
    K = list(K)
    elems = K + (carrier_products([R.identity(), R.empty()] + K) if close else [])
    table = {f: emb(f) for f in dict.fromkeys(elems)}
    return AlmostMorphism(R, tuple(K), emb.target_n, table, emb)


def certificate(suite: str, inputs, expected, got) -> dict:
    return {"suite": suite, "inputs": inputs, "expected": expected, "got": got}


def brute_hamming(f: PartialBijection, g: PartialBijection) -> Fraction:
    """Hamming distance straight from the definition, one point at a time."""
    if f.n == 0:
        return Fraction(0)
    df, dg = f.dom, g.dom
    sym = len(df ^ dg)
    disagree = sum(1 for x in df & dg if f(x) != g(x))
    return Fraction(sym + disagree, f.n)


def brute_compose(h: PartialBijection, g: PartialBijection) -> PartialBijection:
    table = [None] * g.n
    for x in range(g.n):
        y = g(x)
        if y is not None and h(y) is not None:
            table[x] = h(y)
    return PartialBijection(table, check=False)
