"""Finite measure-preserving equivalence relations and their full semigroups."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import pbij as pb
from .errors import (
    Inadmissible,
    NestingViolated,
    NotClassRespecting,
    NotInvariant,
    NotPartition,
    NotPermutation,
    NotWeightPreserving,
    NullSet,
    RelationMismatch,
)
from .measured import MSubset, WeightedSpace, measure
from .pbij import PartialBijection


@dataclass(frozen=True, eq=False)
class FiniteRelation:
    """Partition of a weighted space into classes with class-constant weights.

    Constant weights per class are exactly what makes every class-respecting
    partial injection measure preserving, so invariance is checked once here
    instead of per element.
    """

    space: WeightedSpace
    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.space)
        blocks = [tuple(sorted(int(x) for x in c)) for c in self.classes]
        if any(len(b) == 0 for b in blocks):
            raise NotPartition("empty class")
        seen = [x for b in blocks for x in b]
        if sorted(seen) != list(range(n)):
            raise NotPartition("classes must cover every atom exactly once")
        blocks.sort(key=lambda b: b[0])
        w = self.space.weights
        for b in blocks:
            if any(w[x] != w[b[0]] for x in b):
                raise NotInvariant(f"weights vary on class {b}")
        object.__setattr__(self, "classes", tuple(blocks))

    def __eq__(self, other):
        if not isinstance(other, FiniteRelation):
            return NotImplemented
        return self.space == other.space and self.classes == other.classes

    def __hash__(self):
        return hash((self.space, self.classes))

    @property
    def n(self) -> int:
        return len(self.space)

    @cached_property
    def class_of(self) -> np.ndarray:
        out = np.empty(self.n, dtype=np.int64)
        for k, b in enumerate(self.classes):
            out[list(b)] = k
        out.setflags(write=False)
        return out

    @property
    def structure(self) -> tuple:
        return (self.space.atoms, self.classes)

    # element constructors -------------------------------------------------

    def element(self, f: PartialBijection | dict[int, int]) -> LocalIso:
        if isinstance(f, dict):
            f = PartialBijection.from_dict(self.n, f)
        return LocalIso(self, f)

    def identity(self) -> LocalIso:
        return LocalIso(self, PartialBijection.identity(self.n), check=False)

    def empty(self) -> LocalIso:
        return LocalIso(self, PartialBijection.empty(self.n), check=False)

    def partial_identity(self, A: Iterable[int] | MSubset) -> LocalIso:
        members = A.members if isinstance(A, MSubset) else A
        return LocalIso(self, PartialBijection.partial_identity(self.n, members), check=False)

    def subset(self, members: Iterable[int]) -> MSubset:
        return self.space.subset(members)


@dataclass(frozen=True, eq=False)
class LocalIso:
    """Element of the full semigroup [[R]]: a class-respecting partial injection."""

    relation: FiniteRelation = field(repr=False)
    map: PartialBijection
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.map.n != self.relation.n:
            raise RelationMismatch("map size differs from the number of atoms")
        if self.check:
            a = self.map.arr
            dom = a >= 0
            cls = self.relation.class_of
            if np.any(cls[dom] != cls[a[dom]]):
                raise NotClassRespecting(f"{self.map!r} leaves an equivalence class")

    def __eq__(self, other):
        if not isinstance(other, LocalIso):
            return NotImplemented
        return self.map == other.map and self.relation.structure == other.relation.structure

    def __hash__(self):
        return hash(self.map)

    def __matmul__(self, other: LocalIso) -> LocalIso:
        _same_relation(self, other)
        return LocalIso(self.relation, pb.compose(self.map, other.map), check=False)

    def inverse(self) -> LocalIso:
        return LocalIso(self.relation, pb.inverse(self.map), check=False)

    def restrict(self, A: Iterable[int] | MSubset) -> LocalIso:
        members = A.members if isinstance(A, MSubset) else A
        return LocalIso(self.relation, pb.restrict(self.map, members), check=False)

    def join(self, other: LocalIso) -> LocalIso:
        _same_relation(self, other)
        return LocalIso(self.relation, pb.join(self.map, other.map), check=False)

    def rebind(self, relation: FiniteRelation) -> LocalIso:
        """Same map viewed in a relation with identical atoms and classes."""
        if relation.structure != self.relation.structure:
            raise RelationMismatch("relations differ in atoms or classes")
        return LocalIso(relation, self.map, check=False)

    @property
    def dom(self) -> frozenset[int]:
        return self.map.dom

    @property
    def ran(self) -> frozenset[int]:
        return self.map.ran

    @property
    def fix(self) -> frozenset[int]:
        return self.map.fix

    @property
    def supp(self) -> frozenset[int]:
        return self.map.supp

    def is_full(self) -> bool:
        return self.map.is_permutation()

    def __call__(self, x: int) -> int | None:
        return self.map(x)


def _same_relation(f: LocalIso, g: LocalIso) -> None:
    if f.relation is not g.relation and f.relation != g.relation:
        raise RelationMismatch("elements belong to different relations")


def make_relation(space: WeightedSpace, classes: Iterable[Iterable[int]]) -> FiniteRelation:
    return FiniteRelation(space, tuple(tuple(c) for c in classes))


def orbit_relation(space: WeightedSpace, generators: Sequence[PartialBijection]) -> FiniteRelation:
    """Relation whose classes are the orbits of the group generated by ``generators``."""
    n = len(space)
    w = space.weights
    rows, cols = [], []
    for g in generators:
        if g.n != n or not g.is_permutation():
            raise NotPermutation(f"generator {g!r} is not a permutation of the atoms")
        for x, y in g.pairs():
            if w[x] != w[y]:
                raise NotWeightPreserving(f"generator moves atom {x} to {y} of different weight")
            rows.append(x)
            cols.append(y)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="weak")
    blocks: dict[int, list[int]] = {}
    for x, lab in enumerate(labels):
        blocks.setdefault(int(lab), []).append(x)
    return make_relation(space, blocks.values())


def metric_mu(f: LocalIso, g: LocalIso) -> Fraction:
    _same_relation(f, g)
    w = f.relation.space.weights
    differ = np.flatnonzero(f.map.arr != g.map.arr)
    return sum((w[x] for x in differ), Fraction(0))


def trace_mu(f: LocalIso) -> Fraction:
    w = f.relation.space.weights
    return sum((w[x] for x in f.fix), Fraction(0))


def restrict_relation(R: FiniteRelation, A: MSubset) -> FiniteRelation:
    """``R`` cut down to ``A`` with the normalized measure ``mu(.)/mu(A)``.

    Atoms of the result are the members of ``A`` in increasing order.
    """
    mA = measure(A)
    if mA == 0:
        raise NullSet("cannot restrict to a null set")
    keep = sorted(A.members)
    pos = {x: i for i, x in enumerate(keep)}
    space = WeightedSpace(
        tuple(R.space.atoms[x] for x in keep),
        tuple(R.space.weights[x] / mA for x in keep),
    )
    classes = [[pos[x] for x in c if x in pos] for c in R.classes]
    return make_relation(space, [c for c in classes if c])


def to_restriction(f: LocalIso, A: MSubset, RA: FiniteRelation) -> LocalIso:
    """Relabel an element supported in ``A`` as an element of ``R|_A``."""
    keep = sorted(A.members)
    pos = {x: i for i, x in enumerate(keep)}
    pairs = []
    for x, y in f.map.pairs():
        if x not in pos or y not in pos:
            raise ValueError(f"element moves {x}->{y} outside the subset")
        pairs.append((pos[x], pos[y]))
    return LocalIso(RA, PartialBijection.from_pairs(RA.n, pairs), check=False)


def from_restriction(f: LocalIso, A: MSubset, R: FiniteRelation) -> LocalIso:
    """Inverse of :func:`to_restriction`: view an element of ``R|_A`` inside ``R``."""
    keep = sorted(A.members)
    return LocalIso(
        R, PartialBijection.from_pairs(R.n, [(keep[x], keep[y]) for x, y in f.map.pairs()])
    )


def product_relation(R: FiniteRelation, S: FiniteRelation) -> FiniteRelation:
    m = S.n
    space = WeightedSpace(
        tuple(f"({a},{b})" for a in R.space.atoms for b in S.space.atoms),
        tuple(u * v for u in R.space.weights for v in S.space.weights),
    )
    classes = [[x * m + y for x in c for y in d] for c in R.classes for d in S.classes]
    return make_relation(space, classes)


def product_element(f: LocalIso, g: LocalIso, RS: FiniteRelation) -> LocalIso:
    """``(f x g)(x, y) = (f(x), g(y))`` as an element of ``R x S``."""
    return LocalIso(RS, pb.tensor(f.map, g.map), check=False)


@dataclass(frozen=True)
class SubrelationPair:
    """Nested relations ``fine`` (R) inside ``coarse`` (S) on one space."""

    fine: FiniteRelation
    coarse: FiniteRelation

    def __post_init__(self):
        if self.fine.space != self.coarse.space:
            raise RelationMismatch("nested relations must share the space")
        cc = self.coarse.class_of
        for c in self.fine.classes:
            if len({int(cc[x]) for x in c}) != 1:
                raise NestingViolated(f"fine class {c} straddles coarse classes")

    def subclasses(self, coarse_class: int) -> list[tuple[int, ...]]:
        """R-classes inside one S-class, ordered by least atom."""
        fc = self.fine.class_of
        ids = sorted({int(fc[x]) for x in self.coarse.classes[coarse_class]})
        return [self.fine.classes[i] for i in ids]


def index_profile(P: SubrelationPair) -> tuple[int, ...]:
    """Per-atom number of R-classes inside the S-class of that atom."""
    J = [0] * P.fine.n
    for k, c in enumerate(P.coarse.classes):
        j = len(P.subclasses(k))
        for x in c:
            J[x] = j
    return tuple(J)


def periodic_part_ge2(R: FiniteRelation) -> MSubset:
    return R.subset(x for c in R.classes if len(c) >= 2 for x in c)


def support_element(R: FiniteRelation, A: MSubset | Iterable[int]) -> LocalIso:
    """Permutation in [R] whose support is exactly ``A``.

    On each class ``C`` the atoms of ``A & C`` are cycled in increasing
    order; every other atom is fixed.
    """
    members = A.members if isinstance(A, MSubset) else frozenset(A)
    arr = np.arange(R.n, dtype=np.int64)
    for c in R.classes:
        cyc = [x for x in c if x in members]
        if len(cyc) == 1:
            raise Inadmissible(f"class {c} meets the set in the single atom {cyc[0]}")
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            arr[a] = b
    return LocalIso(R, PartialBijection(arr, check=False), check=False)


def is_admissible(R: FiniteRelation, A: Iterable[int]) -> bool:
    members = frozenset(A)
    return all(len(members.intersection(c)) != 1 for c in R.classes)
