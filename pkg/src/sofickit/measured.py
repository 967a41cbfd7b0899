"""Finite atomic probability spaces with exact rational weights."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import NotPermutation, RelationMismatch
from .pbij import PartialBijection


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted as weights; pass a Fraction or 'p/q' string")
    return Fraction(value)


@dataclass(frozen=True)
class WeightedSpace:
    """Atoms with positive rational weights summing to exactly one.

    Atoms are addressed by position; ``atoms`` holds their string ids for
    serialization.
    """

    atoms: tuple[str, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(str(a) for a in self.atoms))
        object.__setattr__(self, "weights", tuple(as_fraction(w) for w in self.weights))
        if len(self.atoms) != len(self.weights):
            raise ValueError("one weight per atom required")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("atom ids must be unique")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValueError(f"weights sum to {sum(self.weights)}, not 1")

    @classmethod
    def uniform(cls, n: int) -> WeightedSpace:
        return cls(tuple(str(i) for i in range(n)), (Fraction(1, n),) * n)

    @classmethod
    def from_weights(cls, weights: Sequence) -> WeightedSpace:
        return cls(tuple(str(i) for i in range(len(weights))), tuple(weights))

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.atoms)}

    @cached_property
    def denominator(self) -> int:
        """Least common denominator ``b`` of the weights."""
        return lcm(*(w.denominator for w in self.weights))

    @cached_property
    def int_weights(self) -> np.ndarray:
        """Weights scaled by :attr:`denominator`; exact integers for the kernels."""
        b = self.denominator
        return np.array([int(w * b) for w in self.weights], dtype=np.int64)

    def subset(self, members: Iterable[int]) -> MSubset:
        return MSubset(self, frozenset(members))

    def full(self) -> MSubset:
        return MSubset(self, frozenset(range(len(self))))


@dataclass(frozen=True)
class MSubset:
    space: WeightedSpace = field(repr=False)
    members: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        bad = [m for m in self.members if not 0 <= m < len(self.space)]
        if bad:
            raise ValueError(f"atoms {bad} outside the space")

    def complement(self) -> MSubset:
        return MSubset(self.space, frozenset(range(len(self.space))) - self.members)

    def __and__(self, other: MSubset) -> MSubset:
        _same_space(self, other)
        return MSubset(self.space, self.members & other.members)

    def __or__(self, other: MSubset) -> MSubset:
        _same_space(self, other)
        return MSubset(self.space, self.members | other.members)

    def __sub__(self, other: MSubset) -> MSubset:
        _same_space(self, other)
        return MSubset(self.space, self.members - other.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))


def _same_space(A: MSubset, B: MSubset) -> None:
    if A.space != B.space:
        raise RelationMismatch("subsets live in different spaces")


def measure(A: MSubset) -> Fraction:
    w = A.space.weights
    return sum((w[i] for i in A.members), Fraction(0))


def symdiff_distance(A: MSubset, B: MSubset) -> Fraction:
    _same_space(A, B)
    return measure(MSubset(A.space, A.members ^ B.members))


def perm_action(s: PartialBijection, A: Iterable[int]) -> frozenset[int]:
    """Pointwise image of ``A`` under the permutation ``s``."""
    if not s.is_permutation():
        raise NotPermutation("action needs a full-domain element")
    return frozenset(int(s.arr[a]) for a in A)
