"""Constructive combinators turning almost morphisms into new ones.

Each function here builds the image table that the matching permanence
argument prescribes: mixing over a disintegration, cutting down to a subset,
extending a covariant pair to the full semigroup, climbing a finite-index
inclusion through choice functions, taking products, and rebuilding the
measure algebra (and trimming off the periodic part) from a full-group
embedding.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import pbij as pb
from .embed import AlmostMorphism, ExactEmbedding, carrier_products
from .errors import (
    CarrierMismatch,
    Inadmissible,
    NonConstantIndex,
    NoSupportWitness,
    NotCovered,
    NotRectangular,
    NotRelated,
    NullRestriction,
    NullSet,
    RelationMismatch,
    UnequalSubclasses,
)
from .measured import MSubset, WeightedSpace, measure
from .pbij import PartialBijection
from .relation import (
    FiniteRelation,
    LocalIso,
    SubrelationPair,
    from_restriction,
    index_profile,
    make_relation,
    product_element,
    product_relation,
    restrict_relation,
    support_element,
    to_restriction,
)


def _compress(f: PartialBijection, Y: Sequence[int]) -> PartialBijection:
    """``1_Y f 1_Y`` relabeled onto ``[len(Y)]`` (``Y`` sorted)."""
    pos = {y: i for i, y in enumerate(Y)}
    pairs = [(pos[x], pos[y]) for x, y in f.pairs() if x in pos and y in pos]
    return PartialBijection.from_pairs(len(Y), pairs)


# -- disintegration ------------------------------------------------------------

def mix(parts: Sequence[tuple[AlmostMorphism, int]], K: Iterable[LocalIso] | None = None) -> AlmostMorphism:
    """Weighted direct sum ``theta(g) = (+)_j theta_j(g) (x) 1_[p_j]``.

    The parts may carry different invariant measures on the same atoms and
    classes; the source of the result carries the mixture
    ``sum_j p_j mu_j / M``.  Images are first lifted to a common [[n]].
    """
    if not parts:
        raise ValueError("mix needs at least one part")
    ms = [m for m, _ in parts]
    ps = [int(p) for _, p in parts]
    if any(p <= 0 for p in ps):
        raise ValueError("mixing weights must be positive integers")
    base = ms[0].source
    for m in ms[1:]:
        if m.source.structure != base.structure:
            raise RelationMismatch("parts must share atoms and classes")
    carriers = [set(m.carrier) for m in ms]
    if any(c != carriers[0] for c in carriers[1:]):
        raise CarrierMismatch("parts must share the same carrier")
    keys = [f for f in ms[0].table if all(f in m.table for m in ms[1:])]

    M = sum(ps)
    weights = [
        sum((p * m.source.space.weights[x] for m, p in zip(ms, ps)), Fraction(0)) / M
        for x in range(base.n)
    ]
    source = make_relation(WeightedSpace(base.space.atoms, tuple(weights)), base.classes)
    n = int(np.lcm.reduce([m.target_n for m in ms]))
    idents = [PartialBijection.identity(p) for p in ps]

    def image(f: LocalIso, lookup) -> PartialBijection:
        lifted = pb.lift_common([lookup(m, f) for m in ms] + [PartialBijection.empty(n)])[:-1]
        out = pb.tensor(lifted[0], idents[0])
        for g, one in zip(lifted[1:], idents[1:]):
            out = pb.direct_sum(out, pb.tensor(g, one))
        return out

    table = {f.rebind(source): image(f, lambda m, f: m.table[f]) for f in keys}
    rule = None
    if all(m.rule is not None for m in ms):
        def rule(f: LocalIso) -> PartialBijection:
            return image(f, lambda m, f: m.resolve(f.rebind(m.source)))
    carrier = ms[0].carrier if K is None else tuple(K)
    missing = [f for f in carrier if f not in carriers[0]]
    if missing:
        raise CarrierMismatch(f"{len(missing)} requested carrier elements are not in the parts")
    return AlmostMorphism(source, tuple(f.rebind(source) for f in carrier), n * M, table, rule)


# -- restriction ---------------------------------------------------------------

def restrict_morphism(
    m: AlmostMorphism, A: MSubset, K_A: Iterable[LocalIso] | None = None
) -> AlmostMorphism:
    """Almost morphism of ``R|_A`` obtained by cutting every image down to ``Y = Fix(pi(1_A))``.

    Elements of ``R|_A`` are relabeled onto ``A`` (atoms in increasing order)
    and target points onto ``Y``.  When ``pi(1_A)`` is idempotent the cut-down
    image ``1_Y pi(g) 1_Y`` equals ``pi(1_A) pi(g) pi(1_A)``.
    """
    R = m.source
    if measure(A) == 0:
        raise NullSet("cannot restrict to a null set")
    one_A = R.partial_identity(A)
    Y = sorted(m.resolve(one_A).fix)
    if not Y:
        raise NullRestriction("pi(1_A) has no fixed points")
    RA = restrict_relation(R, A)
    members = A.members
    inside = [f for f in m.table if f.dom <= members and f.ran <= members]
    table = {to_restriction(f, A, RA): _compress(m.table[f], Y) for f in inside}
    if K_A is None:
        carrier = [to_restriction(f, A, RA) for f in m.carrier if f.dom <= members and f.ran <= members]
    else:
        carrier = list(K_A)
        for g in carrier:
            if g not in table:
                table[g] = _compress(m.resolve(from_restriction(g, A, R)), Y)
    rule = None
    if m.rule is not None:
        def rule(g: LocalIso) -> PartialBijection:
            return _compress(m.resolve(from_restriction(g, A, R)), Y)
    return AlmostMorphism(RA, tuple(carrier), len(Y), table, rule)


# -- covariant pairs -----------------------------------------------------------

def generate_group(R: FiniteRelation, generators: Sequence[LocalIso]) -> list[LocalIso]:
    """All elements of the permutation group generated by ``generators``, identity first (BFS order)."""
    one = R.identity()
    seen = {one: None}
    queue = deque([one])
    while queue:
        g = queue.popleft()
        for s in generators:
            h = s @ g
            if h not in seen:
                seen[h] = None
                queue.append(h)
    return list(seen)


@dataclass(frozen=True)
class CovariantPair:
    """A homomorphism on group elements together with a measure-algebra map.

    The set map is stored on atoms: ``phi(A)`` is the union of
    ``atom_images[x]`` for ``x`` in ``A``, which is how a disjointness- and
    union-preserving map on a finite atomic algebra is determined.
    """

    relation: FiniteRelation
    target_n: int
    theta: dict
    atom_images: tuple[frozenset, ...]

    def phi(self, A: Iterable[int] | MSubset) -> frozenset[int]:
        members = A.members if isinstance(A, MSubset) else A
        out: set[int] = set()
        for x in members:
            out |= self.atom_images[x]
        return frozenset(out)

    def is_covariant(self) -> bool:
        for g, s in self.theta.items():
            for x in range(self.relation.n):
                if frozenset(int(s.arr[p]) for p in self.atom_images[x]) != self.atom_images[g(x)]:
                    return False
        return True

    def is_isometric(self) -> bool:
        w = self.relation.space.weights
        used: set[int] = set()
        for x, img in enumerate(self.atom_images):
            if Fraction(len(img), self.target_n) != w[x] or used & img:
                return False
            used |= img
        return True


def covariant_pair_from_embedding(emb: ExactEmbedding, group: Sequence[LocalIso]) -> CovariantPair:
    R = emb.relation
    theta = dict(zip(group, emb.images(list(group))))
    atoms = tuple(frozenset(emb.block(x)) for x in range(R.n))
    return CovariantPair(R, emb.target_n, theta, atoms)


def decompose(g: LocalIso, group: Sequence[LocalIso]) -> list[tuple[LocalIso, frozenset[int]]]:
    """Greedy split ``g = V_i g_i 1_{A_i}`` over ``group`` taken in the given order."""
    left = set(g.dom)
    pieces = []
    for h in group:
        A = frozenset(x for x in left if h(x) == g(x))
        if A:
            pieces.append((h, A))
            left -= A
        if not left:
            break
    if left:
        raise NotCovered(f"atoms {sorted(left)} are not matched by any group element")
    return pieces


def covariant_extension(
    cp: CovariantPair, g: LocalIso, group: Sequence[LocalIso] | None = None
) -> PartialBijection:
    """``Phi(g) = V theta(g_i) 1_{phi(A_i)}`` for the greedy decomposition of ``g``."""
    group = list(cp.theta) if group is None else list(group)
    out = PartialBijection.empty(cp.target_n)
    for h, A in decompose(g, group):
        piece = pb.compose(cp.theta[h], PartialBijection.partial_identity(cp.target_n, cp.phi(A)))
        out = pb.join(out, piece)
    return out


# -- finite index ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChoiceSystem:
    """Invertible choice functions ``psi_0 .. psi_{N-1}`` for ``fine`` inside ``coarse``.

    Within each coarse class the fine subclasses are numbered ``c`` by least
    atom and their atoms by position ``t``; ``psi_i(c, t) = (c + i mod N, t)``.
    ``psi_0`` is the identity.
    """

    pair: SubrelationPair
    N: int
    psi: tuple[LocalIso, ...]
    fine_class: np.ndarray

    @property
    def fine(self) -> FiniteRelation:
        return self.pair.fine

    @property
    def coarse(self) -> FiniteRelation:
        return self.pair.coarse


def build_choice_system(P: SubrelationPair) -> ChoiceSystem:
    J = set(index_profile(P))
    if len(J) != 1:
        raise NonConstantIndex(f"index takes several values {sorted(J)}; restrict to a level set first")
    (N,) = J
    S = P.coarse
    tables = np.tile(np.arange(S.n, dtype=np.int64), (N, 1))
    for k in range(len(S.classes)):
        subs = P.subclasses(k)
        sizes = {len(c) for c in subs}
        if len(sizes) != 1:
            raise UnequalSubclasses(f"subclass sizes {[len(c) for c in subs]} in coarse class {k}")
        for i in range(N):
            for c, sub in enumerate(subs):
                tgt = subs[(c + i) % N]
                for t, x in enumerate(sub):
                    tables[i, x] = tgt[t]
    psi = tuple(LocalIso(S, PartialBijection(row, check=False)) for row in tables)
    return ChoiceSystem(P, N, psi, P.fine.class_of)


def cocycle(cs: ChoiceSystem, y: int, x: int) -> tuple[int, ...]:
    """The permutation ``s`` of ``[N]`` with ``psi_i(x) R psi_{s(i)}(y)``."""
    S = cs.coarse
    if S.class_of[x] != S.class_of[y]:
        raise NotRelated(f"atoms {x} and {y} lie in different coarse classes")
    fc = cs.fine_class
    where = {int(fc[p.map.arr[y]]): j for j, p in enumerate(cs.psi)}
    return tuple(where[int(fc[p.map.arr[x]])] for p in cs.psi)


def xi_terms(
    Phi: AlmostMorphism, cs: ChoiceSystem, f: LocalIso
) -> list[tuple[int, int, LocalIso, PartialBijection]]:
    """The nonempty pieces ``(i, j, psi_j f psi_i^-1 | psi_i(A_{f;j,i}), image)`` of ``Xi(f)``.

    ``image`` is ``Phi(piece) (x) E_{j,i}`` in [[M N]].
    """
    N = cs.N
    groups: dict[tuple[int, int], list[int]] = {}
    for x in sorted(f.dom):
        s = cocycle(cs, f(x), x)
        for i in range(N):
            groups.setdefault((i, s[i]), []).append(x)
    R = cs.fine
    out = []
    for (i, j), A in sorted(groups.items()):
        pi, pj = cs.psi[i].map.arr, cs.psi[j].map.arr
        piece = LocalIso(R, PartialBijection.from_pairs(R.n, [(int(pi[x]), int(pj[f(x)])) for x in A]))
        img = pb.tensor(Phi.resolve(piece), pb.matrix_unit(N, j, i))
        out.append((i, j, piece, img))
    return out


def xi_image(Phi: AlmostMorphism, cs: ChoiceSystem, f: LocalIso) -> PartialBijection:
    out = PartialBijection.empty(Phi.target_n * cs.N)
    for _, _, _, img in xi_terms(Phi, cs, f):
        out = pb.join(out, img)
    return out


def extend_finite_index(
    Phi: AlmostMorphism, cs: ChoiceSystem, K_S: Iterable[LocalIso], close: bool = True
) -> AlmostMorphism:
    """Almost morphism of the coarse relation built from one of the fine relation.

    ``Xi(f) = V_{i,j} Phi(psi_j f psi_i^-1 | psi_i(A_{f;j,i})) (x) E_{j,i}``;
    target points are ``a * N + b`` for ``a`` in [[M]] and block ``b``.
    Missing images of the pieces are filled through ``Phi``'s rule, if any.
    """
    S = cs.coarse
    if Phi.source.structure != cs.fine.structure:
        raise RelationMismatch("Phi must be a morphism of the fine relation")
    K_S = [f.rebind(S) if f.relation is not S else f for f in K_S]
    elems = list(K_S) + (carrier_products([S.identity(), S.empty()] + list(K_S)) if close else [])
    table = {f: xi_image(Phi, cs, f) for f in dict.fromkeys(elems)}
    rule = None
    if Phi.rule is not None:
        def rule(f: LocalIso) -> PartialBijection:
            return xi_image(Phi, cs, f)
    return AlmostMorphism(S, tuple(K_S), Phi.target_n * cs.N, table, rule)


# -- products --------------------------------------------------------------------

def _pieces(item) -> list[tuple[LocalIso, LocalIso]]:
    if isinstance(item, tuple) and len(item) == 2 and all(isinstance(p, LocalIso) for p in item):
        return [item]
    if isinstance(item, (list, tuple)) and item and all(
        isinstance(p, tuple) and len(p) == 2 and all(isinstance(q, LocalIso) for q in p) for p in item
    ):
        return list(item)
    raise NotRectangular(f"carrier item {item!r} is not a rectangle piece or a list of pieces")


def point_pieces(F: LocalIso, R: FiniteRelation, S: FiniteRelation) -> list[tuple[LocalIso, LocalIso]]:
    """Split an element of ``R x S`` into single-point rectangles ``E_{x'x} x E_{y'y}``."""
    m = S.n
    out = []
    for p, q in F.map.pairs():
        x, y = divmod(p, m)
        x2, y2 = divmod(q, m)
        out.append((R.element({x: x2}), S.element({y: y2})))
    return out


def product_pair(
    mR: AlmostMorphism, mS: AlmostMorphism, K: Iterable, close: bool = True
) -> AlmostMorphism:
    """Product morphism ``kappa(g x h) = pi_R(g) (x) pi_S(h)`` on rectangle-form carriers.

    ``K`` items are ``(g, h)`` pairs or lists of such pieces (joined).
    """
    R, S = mR.source, mS.source
    RS = product_relation(R, S)
    N = mR.target_n * mS.target_n

    def from_pieces(pieces, lookup_R, lookup_S) -> tuple[LocalIso, PartialBijection]:
        elem = RS.empty()
        img = PartialBijection.empty(N)
        for g, h in pieces:
            elem = elem.join(product_element(g, h, RS))
            img = pb.join(img, pb.tensor(lookup_R(g), lookup_S(h)))
        return elem, img

    table = {}
    carrier = []
    for item in K:
        elem, img = from_pieces(_pieces(item), mR.resolve, mS.resolve)
        table[elem] = img
        carrier.append(elem)
    rule = None
    if mR.rule is not None and mS.rule is not None:
        def rule(F: LocalIso) -> PartialBijection:
            return from_pieces(point_pieces(F, R, S), mR.resolve, mS.resolve)[1]
    out = AlmostMorphism(RS, tuple(carrier), N, table, rule)
    return out.with_products() if close and rule is not None else out


def canonical_T(g: LocalIso, S: FiniteRelation, RS: FiniteRelation | None = None) -> LocalIso:
    """``T(g)(x, y) = (g(x), y)``: the tracial copy of [[R]] inside [[R x S]]."""
    RS = RS if RS is not None else product_relation(g.relation, S)
    return product_element(g, S.identity(), RS)


def pullback_along_T(m: AlmostMorphism, R: FiniteRelation, S: FiniteRelation, K_R: Iterable[LocalIso]) -> AlmostMorphism:
    """Morphism of ``R`` given by ``g -> m(T(g))``."""
    RS = m.source
    K_R = list(K_R)
    table = {g: m.resolve(canonical_T(g, S, RS)) for g in K_R}
    rule = None
    if m.rule is not None:
        def rule(g: LocalIso) -> PartialBijection:
            return m.resolve(canonical_T(g, S, RS))
    return AlmostMorphism(R, tuple(K_R), m.target_n, table, rule)


# -- full groups -----------------------------------------------------------------

ImageFn = Callable[[LocalIso], PartialBijection]


def _image_fn(theta) -> ImageFn:
    if isinstance(theta, AlmostMorphism):
        return theta.resolve
    return theta


def reconstruct_measure_algebra(theta, A: MSubset | Iterable[int], g: LocalIso | None = None) -> frozenset[int]:
    """``phi(A) = supp theta(g)`` for a full-group element ``g`` supported on ``A``.

    ``theta`` is an :class:`AlmostMorphism` (stored images or rule) or any
    callable on full-group elements.  ``g`` defaults to the canonical cycle
    element of :func:`support_element`.
    """
    R = theta.source if isinstance(theta, AlmostMorphism) else theta.relation
    if any(len(c) < 2 for c in R.classes):
        raise Inadmissible("relation has singleton classes")
    if g is None:
        g = support_element(R, A)
    else:
        members = A.members if isinstance(A, MSubset) else frozenset(A)
        if g.supp != members or not g.is_full():
            raise ValueError("g must be a full-group element supported exactly on A")
    return _image_fn(theta)(g).supp


def trim_support(theta, P: MSubset) -> tuple[LocalIso, frozenset[int]]:
    """The witness ``alpha`` with ``supp alpha = P`` and the target set ``supp theta(alpha)``."""
    R = theta.source if isinstance(theta, AlmostMorphism) else theta.relation
    try:
        alpha = support_element(R, P)
    except Inadmissible as exc:
        raise NoSupportWitness(str(exc)) from None
    return alpha, _image_fn(theta)(alpha).supp


def extend_by_identity(f: LocalIso, Q: MSubset, R: FiniteRelation) -> LocalIso:
    """``f~ = f v 1_P`` for ``f`` in ``[R|_Q]`` and ``P`` the complement of ``Q``."""
    return from_restriction(f, Q, R).join(R.partial_identity(Q.complement()))


def trim_periodic(theta, P: MSubset, K: Iterable[LocalIso] | None = None) -> AlmostMorphism:
    """Morphism of ``[R|_{X \\ P}]`` from one of ``[R]``, discarding ``supp theta(alpha)``.

    ``eta(f) = theta(f v 1_P)`` restricted to the complement of
    ``A = supp theta(alpha)`` and relabeled.  ``K`` defaults to the trivial
    carrier; an exact ``theta`` gives ``eta`` a rule, so products can be added
    with :meth:`AlmostMorphism.with_products`.
    """
    R = theta.source if isinstance(theta, AlmostMorphism) else theta.relation
    image = _image_fn(theta)
    for c in R.classes:
        inside = P.members.intersection(c)
        if inside and len(inside) != len(c):
            raise ValueError("P must be a union of classes")
    _, A = trim_support(theta, P)
    Q = P.complement()
    if not Q.members:
        raise NullSet("nothing left after trimming")
    RQ = restrict_relation(R, Q)
    keep = sorted(set(range(image(R.identity()).n)) - A)

    def eta(f: LocalIso) -> PartialBijection:
        big = image(extend_by_identity(f, Q, R))
        if big.supp & A:
            raise ValueError("theta(f~) moves points of supp theta(alpha)")
        return _compress(big, keep)

    K = [] if K is None else list(K)
    table = {f: eta(f) for f in K}
    return AlmostMorphism(RQ, tuple(K), len(keep), table, eta)


def trim_trace_quotient(tr_extended: Fraction, mu_P: Fraction) -> Fraction:
    """Normalized trace on the complement of ``P``: ``(tr f~ - mu(P)) / (1 - mu(P))``."""
    return (tr_extended - mu_P) / (1 - mu_P)


def trim_trace_product(tr_extended: Fraction, mu_P: Fraction) -> Fraction:
    """The product-form variant ``(tr f~ - mu(P)) * (1 - mu(P))`` kept for comparison."""
    return (tr_extended - mu_P) * (1 - mu_P)
