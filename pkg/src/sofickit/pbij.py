"""The inverse monoid [[n]] of partial bijections of {0, ..., n-1}.

Elements are immutable and stored as an ``int64`` array where entry ``i``
is the image of ``i`` or ``-1`` when ``i`` is outside the domain.  All
metric quantities come back as :class:`fractions.Fraction`.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import JoinConflict, SizeMismatch

UNDEF = -1


class PartialBijection:
    """Injective partial self-map of ``[n]``.

    >>> f = PartialBijection.from_pairs(3, [(0, 2), (1, 0)])
    >>> f(0), f(2)
    (2, None)
    """

    __slots__ = ("_arr", "_hash")

    def __init__(self, table: Sequence[int | None] | np.ndarray, *, check: bool = True):
        arr = np.array([UNDEF if t is None else t for t in table], dtype=np.int64) \
            if not isinstance(table, np.ndarray) else np.array(table, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("partial bijection table must be one-dimensional")
        if check:
            n = arr.size
            defined = arr[arr != UNDEF]
            if np.any(defined < 0) or np.any(defined >= n):
                raise ValueError(f"target out of range for n={n}")
            if np.unique(defined).size != defined.size:
                raise ValueError("partial bijection is not injective")
        arr.setflags(write=False)
        self._arr = arr
        self._hash = None

    # construction --------------------------------------------------------

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> PartialBijection:
        table = [UNDEF] * n
        for i, j in pairs:
            if not 0 <= i < n:
                raise ValueError(f"source {i} out of range for n={n}")
            if table[i] != UNDEF:
                raise ValueError(f"source {i} listed twice")
            table[i] = j
        return cls(table)

    @classmethod
    def from_dict(cls, n: int, mapping: dict[int, int]) -> PartialBijection:
        return cls.from_pairs(n, mapping.items())

    @classmethod
    def identity(cls, n: int) -> PartialBijection:
        return cls(np.arange(n, dtype=np.int64), check=False)

    @classmethod
    def empty(cls, n: int) -> PartialBijection:
        return cls(np.full(n, UNDEF, dtype=np.int64), check=False)

    @classmethod
    def partial_identity(cls, n: int, subset: Iterable[int]) -> PartialBijection:
        arr = np.full(n, UNDEF, dtype=np.int64)
        idx = np.fromiter(subset, dtype=np.int64)
        arr[idx] = idx
        return cls(arr, check=False)

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> PartialBijection:
        f = cls(perm)
        if not f.is_permutation():
            raise ValueError("not a full permutation")
        return f

    # accessors -----------------------------------------------------------

    @property
    def n(self) -> int:
        return int(self._arr.size)

    @property
    def arr(self) -> np.ndarray:
        return self._arr

    def __call__(self, x: int) -> int | None:
        y = int(self._arr[x])
        return None if y == UNDEF else y

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(self._arr[i])) for i in np.flatnonzero(self._arr != UNDEF)]

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs())

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self._arr != UNDEF).tolist())

    @property
    def ran(self) -> frozenset[int]:
        return frozenset(self._arr[self._arr != UNDEF].tolist())

    @property
    def fix(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self._arr == np.arange(self.n)).tolist())

    @property
    def supp(self) -> frozenset[int]:
        return (self.dom | self.ran) - self.fix

    def is_idempotent(self) -> bool:
        a = self._arr
        return bool(np.all((a == UNDEF) | (a == np.arange(a.size))))

    def is_permutation(self) -> bool:
        return bool(np.all(self._arr != UNDEF))

    # algebra -------------------------------------------------------------

    def __matmul__(self, other: PartialBijection) -> PartialBijection:
        return compose(self, other)

    def inverse(self) -> PartialBijection:
        return inverse(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartialBijection):
            return NotImplemented
        return self._arr.size == other._arr.size and bool(np.array_equal(self._arr, other._arr))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._arr.size, self._arr.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"PartialBijection({self.n}, {self.as_dict()})"


class Parts(NamedTuple):
    dom: frozenset
    ran: frozenset
    fix: frozenset
    supp: frozenset


def _same_size(f: PartialBijection, g: PartialBijection) -> None:
    if f.n != g.n:
        raise SizeMismatch(f"ground sizes differ: {f.n} vs {g.n}")


def compose(h: PartialBijection, g: PartialBijection) -> PartialBijection:
    """``h o g``: apply ``g`` first, defined where ``g(x)`` lands in ``dom h``."""
    _same_size(h, g)
    ga = g.arr
    out = np.where(ga >= 0, h.arr[np.where(ga >= 0, ga, 0)], UNDEF)
    return PartialBijection(out, check=False)


def inverse(f: PartialBijection) -> PartialBijection:
    out = np.full(f.n, UNDEF, dtype=np.int64)
    src = np.flatnonzero(f.arr != UNDEF)
    out[f.arr[src]] = src
    return PartialBijection(out, check=False)


def join(f: PartialBijection, g: PartialBijection) -> PartialBijection:
    """Union of two compatible partial bijections.

    Compatibility is checked in idempotent form (``f^-1 g`` and ``f g^-1``
    both idempotent), which also rules out the case where the two maps agree
    on common points but collide on their ranges.
    """
    _same_size(f, g)
    if not compose(inverse(f), g).is_idempotent() or not compose(f, inverse(g)).is_idempotent():
        raise JoinConflict(f"{f!r} and {g!r} are not compatible")
    out = np.where(f.arr != UNDEF, f.arr, g.arr)
    return PartialBijection(out, check=False)


def join_all(fs: Iterable[PartialBijection], n: int) -> PartialBijection:
    out = PartialBijection.empty(n)
    for f in fs:
        out = join(out, f)
    return out


def restrict(f: PartialBijection, subset: Iterable[int]) -> PartialBijection:
    """``f o 1_subset``."""
    return compose(f, PartialBijection.partial_identity(f.n, subset))


def parts(f: PartialBijection) -> Parts:
    return Parts(f.dom, f.ran, f.fix, f.supp)


def trace(f: PartialBijection) -> Fraction:
    if f.n == 0:
        return Fraction(0)
    return Fraction(len(f.fix), f.n)


def hamming_distance(f: PartialBijection, g: PartialBijection) -> Fraction:
    _same_size(f, g)
    if f.n == 0:
        return Fraction(0)
    return Fraction(int(np.count_nonzero(f.arr != g.arr)), f.n)


def tensor(f: PartialBijection, g: PartialBijection) -> PartialBijection:
    """``(f (x) g)(i, j) = (f(i), g(j))`` with ``(i, j)`` flattened to ``i*g.n + j``."""
    m = g.n
    fa = f.arr[:, None]
    ga = g.arr[None, :]
    out = np.where((fa >= 0) & (ga >= 0), fa * m + ga, UNDEF)
    return PartialBijection(out.reshape(-1), check=False)


def direct_sum(f: PartialBijection, g: PartialBijection) -> PartialBijection:
    shifted = np.where(g.arr >= 0, g.arr + f.n, UNDEF)
    return PartialBijection(np.concatenate([f.arr, shifted]), check=False)


def matrix_unit(N: int, j: int, i: int) -> PartialBijection:
    """The rank-one element sending ``i`` to ``j``."""
    if not (0 <= i < N and 0 <= j < N):
        raise ValueError(f"indices ({j}, {i}) out of range for N={N}")
    return PartialBijection.from_pairs(N, [(i, j)])


def pad_embed(f: PartialBijection, p: int) -> PartialBijection:
    """Embed ``f`` into [[p]] as ``(f (x) 1_[q]) (+) 1_[r]`` where ``p = q*n + r``.

    Distances move by at most ``n / (p - n)``; exactly zero when ``n | p``.
    """
    n = f.n
    if p < n:
        raise ValueError(f"cannot pad [[{n}]] into [[{p}]]")
    q, r = divmod(p, n)
    return direct_sum(tensor(f, PartialBijection.identity(q)), PartialBijection.identity(r))


def pad_distortion_bound(n: int, p: int) -> Fraction:
    if p <= n:
        raise ValueError("bound only defined for p > n")
    return Fraction(n, p - n)


def lift_common(fs: Sequence[PartialBijection]) -> list[PartialBijection]:
    """Lift every ``f_j`` into [[L]], ``L = lcm(n_j)``, via ``f_j (x) 1_[L / n_j]``."""
    if not fs:
        return []
    L = lcm(*(f.n for f in fs))
    return [f if f.n == L else tensor(f, PartialBijection.identity(L // f.n)) for f in fs]


def stack(fs: Sequence[PartialBijection]) -> np.ndarray:
    """Stack elements of the same [[n]] into a ``(k, n)`` kernel input."""
    if not fs:
        return np.empty((0, 0), dtype=np.int64)
    return np.ascontiguousarray(np.stack([f.arr for f in fs]))


def unstack(rows: np.ndarray) -> list[PartialBijection]:
    return [PartialBijection(r, check=False) for r in np.asarray(rows, dtype=np.int64)]
