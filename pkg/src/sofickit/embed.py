"""(K, eps)-almost morphisms into [[N]], exact embeddings and perturbations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import kernels
from . import pbij as pb
from .errors import MissingImage, RelationMismatch
from .pbij import PartialBijection
from .relation import FiniteRelation, LocalIso
from .sampling import rng_from

Rule = Callable[[LocalIso], PartialBijection]

_PAIR_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class AlmostMorphism:
    """A map ``pi`` from a finite carrier ``K`` of [[R]] into [[target_n]].

    ``table`` holds every stored image; it always covers ``carrier`` and may
    hold extra entries (typically pairwise products of carrier elements,
    which :func:`defect` needs).  ``1_X -> 1_[N]`` and ``0 -> 0`` are inserted
    structurally.  ``rule``, when present, computes images of elements that
    are not stored yet (exact constructions carry one; perturbed ones do not).
    """

    source: FiniteRelation
    carrier: tuple[LocalIso, ...]
    target_n: int
    table: Mapping[LocalIso, PartialBijection]
    rule: Rule | None = field(default=None, repr=False)

    def __post_init__(self):
        N = self.target_n
        one, zero = self.source.identity(), self.source.empty()
        table = dict(self.table)
        for key, want in ((one, PartialBijection.identity(N)), (zero, PartialBijection.empty(N))):
            if key in table and table[key] != want:
                raise ValueError(f"image of {'identity' if key == one else 'empty map'} must be {want!r}")
            table[key] = want
        carrier = [one, zero] + [f for f in self.carrier if f != one and f != zero]
        seen: dict[LocalIso, None] = {}
        for f in carrier:
            if f.relation.structure != self.source.structure:
                raise RelationMismatch("carrier element from another relation")
            seen.setdefault(f, None)
        for f in seen:
            if f not in table:
                raise MissingImage(f"carrier element {f.map!r} has no image")
        for img in table.values():
            if img.n != N:
                raise ValueError(f"image {img!r} not in [[{N}]]")
        object.__setattr__(self, "carrier", tuple(seen))
        object.__setattr__(self, "table", table)

    def image(self, f: LocalIso) -> PartialBijection:
        try:
            return self.table[f]
        except KeyError:
            raise MissingImage(f"no stored image for {f.map!r}") from None

    def resolve(self, f: LocalIso) -> PartialBijection:
        """Stored image, or the rule's image when the element is not stored."""
        img = self.table.get(f)
        if img is not None:
            return img
        if self.rule is None:
            raise MissingImage(f"no image for {f.map!r} and no rule to extend with")
        return self.rule(f)

    def with_elements(self, elements: Iterable[LocalIso], into_carrier: bool = False) -> AlmostMorphism:
        table = dict(self.table)
        extra = []
        for f in elements:
            if f not in table:
                table[f] = self.resolve(f)
            extra.append(f)
        carrier = self.carrier + tuple(extra) if into_carrier else self.carrier
        return AlmostMorphism(self.source, carrier, self.target_n, table, self.rule)

    def with_products(self) -> AlmostMorphism:
        """Store images of all pairwise carrier products (needs a rule for new ones)."""
        return self.with_elements(carrier_products(self.carrier))

    def __call__(self, f: LocalIso) -> PartialBijection:
        return self.image(f)


def carrier_products(carrier: Sequence[LocalIso]) -> list[LocalIso]:
    """Distinct products ``f g`` over all ordered pairs of ``carrier``."""
    if not carrier:
        return []
    R = carrier[0].relation
    S = pb.stack([f.map for f in carrier])
    k = len(carrier)
    ii, jj = np.divmod(np.arange(k * k), k)
    prods = kernels.compose_rows(S[ii], S[jj])
    uniq = np.unique(prods, axis=0)
    return [LocalIso(R, PartialBijection(r, check=False), check=False) for r in uniq]


class Defect(NamedTuple):
    eps_mult: Fraction
    eps_trace: Fraction
    worst_pair: tuple[int, int] | None
    worst_element: int | None


def _lookup_rows(m: AlmostMorphism, rows: np.ndarray) -> np.ndarray:
    by_bytes = {f.map.arr.tobytes(): img.arr for f, img in m.table.items()}
    out = np.empty((rows.shape[0], m.target_n), dtype=np.int64)
    for r, row in enumerate(rows):
        img = by_bytes.get(row.tobytes())
        if img is None:
            raise MissingImage(f"product {PartialBijection(row, check=False)!r} has no image")
        out[r] = img
    return out


def defect(m: AlmostMorphism) -> Defect:
    """Exact multiplicativity and trace defects of ``m`` over its carrier.

    ``eps_mult = max d_#(pi(fg), pi(f) pi(g))`` over ordered carrier pairs,
    ``eps_trace = max |tr_mu(f) - tr_#(pi(f))|`` over the carrier.
    """
    K = m.carrier
    N = m.target_n
    k = len(K)
    S = pb.stack([f.map for f in K])
    I = pb.stack([m.table[f] for f in K])
    worst, worst_pair = -1, None
    total = k * k
    for start in range(0, total, _PAIR_CHUNK):
        ii, jj = np.divmod(np.arange(start, min(total, start + _PAIR_CHUNK)), k)
        want = _lookup_rows(m, kernels.compose_rows(S[ii], S[jj]))
        got = kernels.compose_rows(I[ii], I[jj])
        counts = kernels.diff_counts(want, got)
        r = int(np.argmax(counts))
        if counts[r] > worst:
            worst, worst_pair = int(counts[r]), (int(ii[r]), int(jj[r]))
    eps_mult = Fraction(worst, N) if N else Fraction(0)

    b = m.source.space.denominator
    src = kernels.weighted_fixed(S, m.source.space.int_weights)
    tgt = kernels.fixed_counts(I)
    # |src/b - tgt/N| with a common denominator b*N
    gaps = np.abs(src * N - tgt * b)
    e = int(np.argmax(gaps))
    eps_trace = Fraction(int(gaps[e]), b * N) if N else Fraction(0)
    return Defect(eps_mult, eps_trace, worst_pair, e)


class ExactEmbedding:
    """Replication embedding of [[R]] into [[b]], ``b`` = common weight denominator.

    Atom ``x`` owns ``mu(x) * b`` contiguous points (blocks ordered by atom
    index) and ``pi(g)`` sends the ``k``-th point of ``x`` to the ``k``-th
    point of ``g(x)``.  Class-constant weights make the block sizes match, so
    ``pi`` is an exact trace-preserving morphism of the whole of [[R]].
    """

    def __init__(self, R: FiniteRelation):
        self.relation = R
        self.counts = R.space.int_weights
        self.target_n = int(self.counts.sum())
        self.starts = np.concatenate(([0], np.cumsum(self.counts)[:-1]))

    def images(self, fs: Sequence[LocalIso]) -> list[PartialBijection]:
        if not fs:
            return []
        rows = kernels.replicate_rows(pb.stack([f.map for f in fs]), self.counts)
        return pb.unstack(rows)

    def __call__(self, f: LocalIso) -> PartialBijection:
        if f.relation.structure != self.relation.structure:
            raise RelationMismatch("element from another relation")
        return self.images([f])[0]

    def block(self, x: int) -> range:
        s = int(self.starts[x])
        return range(s, s + int(self.counts[x]))

    def set_image(self, A: Iterable[int]) -> frozenset[int]:
        return frozenset(p for x in A for p in self.block(x))


def exact_embedding(R: FiniteRelation, K: Iterable[LocalIso] = (), close: bool = True) -> AlmostMorphism:
    """Exact almost morphism on carrier ``K``; ``close`` also stores pairwise products."""
    emb = ExactEmbedding(R)
    K = list(K)
    elems = K + (carrier_products([R.identity(), R.empty()] + K) if close else [])
    uniq = list(dict.fromkeys(elems))
    table = dict(zip(uniq, emb.images(uniq)))
    return AlmostMorphism(R, tuple(K), emb.target_n, table, emb)


def _random_local_perm(rng: np.random.Generator, N: int, k: int) -> PartialBijection:
    s = np.arange(N, dtype=np.int64)
    if k >= 2:
        pts = rng.choice(N, size=k, replace=False)
        s[pts] = rng.permutation(pts)
    return PartialBijection(s, check=False)


def perturb(m: AlmostMorphism, delta, seed: int) -> AlmostMorphism:
    """Pre-compose every stored image with a random permutation moving at most ``floor(delta N)`` points.

    Images of ``1_X`` and the empty map are left alone.  Each replaced image
    stays within ``delta`` of the original, which bounds the new defect by
    ``eps_mult <= old + 3 delta`` and ``eps_trace <= old + delta``.
    """
    delta = Fraction(delta)
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    N = m.target_n
    k = int(delta * N)
    rng = rng_from(seed)
    one, zero = m.source.identity(), m.source.empty()
    table = {}
    for f, img in m.table.items():
        if f == one or f == zero or k < 2:
            table[f] = img
        else:
            table[f] = pb.compose(img, _random_local_perm(rng, N, k))
    return AlmostMorphism(m.source, m.carrier, N, table, None)


def isometry_gap(m: AlmostMorphism) -> Fraction:
    """``max |d_#(pi f, pi g) - d_mu(f, g)|`` over carrier pairs."""
    K = m.carrier
    N = m.target_n
    b = m.source.space.denominator
    w = m.source.space.int_weights
    S = pb.stack([f.map for f in K])
    I = pb.stack([m.table[f] for f in K])
    k = len(K)
    worst = 0
    total = k * k
    for start in range(0, total, _PAIR_CHUNK):
        ii, jj = np.divmod(np.arange(start, min(total, start + _PAIR_CHUNK)), k)
        src = kernels.weighted_diff(S[ii], S[jj], w)
        tgt = kernels.diff_counts(I[ii], I[jj])
        worst = max(worst, int(np.max(np.abs(src * N - tgt * b))))
    return Fraction(worst, b * N)


def isometry_budget(m: AlmostMorphism) -> Fraction:
    d = defect(m)
    return 4 * d.eps_trace + 3 * d.eps_mult


def trace_profile(m: AlmostMorphism, elements: Sequence[LocalIso] | None = None) -> list[Fraction]:
    elements = m.carrier if elements is None else elements
    return [pb.trace(m.table[f]) for f in elements]


def distance_profile(m: AlmostMorphism, elements: Sequence[LocalIso] | None = None) -> np.ndarray:
    """Pairwise ``N * d_#`` between images, as an integer matrix."""
    elements = m.carrier if elements is None else elements
    I = pb.stack([m.table[f] for f in elements])
    k = len(elements)
    ii, jj = np.divmod(np.arange(k * k), k)
    return kernels.diff_counts(I[ii], I[jj]).reshape(k, k)

