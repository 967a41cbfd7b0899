from fractions import Fraction

import pytest

from sofickit import combinators as cb
from sofickit import pbij as pb
from sofickit.embed import ExactEmbedding, defect, exact_embedding, perturb
from sofickit.errors import (
    CarrierMismatch,
    Inadmissible,
    NoSupportWitness,
    NonConstantIndex,
    NotCovered,
    NotRelated,
    NullSet,
    UnequalSubclasses,
)
from sofickit.measured import WeightedSpace, measure
from sofickit.pbij import PartialBijection as P
from sofickit.relation import (
    SubrelationPair,
    make_relation,
    product_element,
    restrict_relation,
    support_element,
    trace_mu,
)
from sofickit.sampling import random_element, random_relation, rng_from
from sofickit.suites import inflate

Q = Fraction


def quarter():
    return make_relation(WeightedSpace.from_weights([Q(1, 4), Q(1, 4), Q(1, 2)]), [[0, 1], [2]])


# -- mix -------------------------------------------------------------------------

def test_mix_single_part_is_identity():
    R = quarter()
    m = exact_embedding(R, [R.element({0: 1, 1: 0})])
    out = cb.mix([(m, 1)])
    assert out.target_n == m.target_n
    assert all(out.table[f.rebind(out.source)] == img for f, img in m.table.items())


def test_mix_exact_parts_stays_exact():
    rng = rng_from(0)
    R = random_relation(rng, 6, 30)
    K = [random_element(rng, R) for _ in range(10)]
    out = cb.mix([(exact_embedding(R, K), 1), (exact_embedding(R, K), 1)])
    assert defect(out)[:2] == (0, 0)


def test_mix_defect_below_max():
    rng = rng_from(1)
    R = random_relation(rng, 6, 30)
    K = [random_element(rng, R) for _ in range(10)]
    base = inflate(exact_embedding(R, K), 20)
    a, b = perturb(base, Q(1, 100), 1), perturb(base, Q(1, 20), 2)
    out = cb.mix([(a, 2), (b, 3)])
    assert defect(out).eps_mult <= max(defect(a).eps_mult, defect(b).eps_mult)


def test_mix_carrier_mismatch():
    R = quarter()
    a = exact_embedding(R, [R.element({0: 1})])
    b = exact_embedding(R, [R.element({1: 0})])
    with pytest.raises(CarrierMismatch):
        cb.mix([(a, 1), (b, 1)])


# -- restriction -----------------------------------------------------------------

def test_restrict_full_set_is_identity():
    rng = rng_from(2)
    R = random_relation(rng, 6, 30)
    m = exact_embedding(R, [random_element(rng, R) for _ in range(5)])
    r = cb.restrict_morphism(m, R.space.full())
    assert r.target_n == m.target_n
    assert all(r.table[f.rebind(r.source)] == m.table[f] for f in m.carrier)


def test_restrict_quarter_example():
    R = quarter()
    m = exact_embedding(R)
    r = cb.restrict_morphism(m, R.subset([2]))
    assert r.target_n == 2
    one = r.source.identity()
    assert pb.trace(r.resolve(one)) == 1


def test_restrict_exact_on_admissible_sets():
    rng = rng_from(3)
    for _ in range(5):
        R = random_relation(rng, 8, 40, min_class=2)
        A = R.subset(x for c in R.classes[:1] for x in c)
        m = exact_embedding(R, [random_element(rng, R) for _ in range(10)])
        RA = restrict_relation(R, A)
        r = cb.restrict_morphism(m, A, [random_element(rng, RA) for _ in range(8)]).with_products()
        assert defect(r)[:2] == (0, 0)
    with pytest.raises(NullSet):
        cb.restrict_morphism(m, R.subset([]))


# -- covariant extension ---------------------------------------------------------

def _pair(seed=0):
    rng = rng_from(seed)
    R = random_relation(rng, 6, 24)
    gens = [random_element(rng, R, full=True)] + [support_element(R, c) for c in R.classes if len(c) > 1]
    group = cb.generate_group(R, gens)
    emb = ExactEmbedding(R)
    return R, emb, group, cb.covariant_pair_from_embedding(emb, group)


def test_covariant_examples():
    R, emb, group, cp = _pair()
    assert cp.is_covariant() and cp.is_isometric()
    g = group[-1]
    assert cb.covariant_extension(cp, g) == emb(g)
    A = [x for x in range(R.n) if x % 2 == 0]
    assert cb.covariant_extension(cp, R.partial_identity(A)) == P.partial_identity(emb.target_n, cp.phi(A))
    rng = rng_from(9)
    for _ in range(20):
        f = random_element(rng, R)
        assert cb.covariant_extension(cp, f) == cb.covariant_extension(cp, f, group[::-1]) == emb(f)


def test_decompose_not_covered():
    R = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    with pytest.raises(NotCovered):
        cb.decompose(R.element({0: 1}), [R.identity()])


# -- finite index ----------------------------------------------------------------

def test_choice_system_examples():
    s = WeightedSpace.uniform(4)
    S = make_relation(s, [range(4)])
    cs = cb.build_choice_system(SubrelationPair(S, S))
    assert cs.N == 1 and cs.psi[0] == S.identity()
    fine = make_relation(s, [[0, 1], [2, 3]])
    cs = cb.build_choice_system(SubrelationPair(fine, S))
    assert cs.psi[1] == S.element({0: 2, 1: 3, 2: 0, 3: 1})
    assert cb.cocycle(cs, 0, 0) == (0, 1)
    assert cb.cocycle(cs, 2, 0) == (1, 0)
    bad = make_relation(WeightedSpace.uniform(6), [[0, 1], [2, 3, 4, 5]])
    with pytest.raises(UnequalSubclasses):
        cb.build_choice_system(SubrelationPair(bad, make_relation(WeightedSpace.uniform(6), [range(6)])))


def test_non_constant_index_and_unrelated():
    s = WeightedSpace.uniform(4)
    fine = make_relation(s, [[0], [1], [2, 3]])
    coarse = make_relation(s, [[0, 1], [2, 3]])
    with pytest.raises(NonConstantIndex):
        cb.build_choice_system(SubrelationPair(fine, coarse))
    cs = cb.build_choice_system(SubrelationPair(coarse, coarse))
    with pytest.raises(NotRelated):
        cb.cocycle(cs, 0, 2)


def test_extend_trivial_index_is_phi():
    rng = rng_from(4)
    R = random_relation(rng, 6, 30)
    cs = cb.build_choice_system(SubrelationPair(R, R))
    Phi = exact_embedding(R)
    K = [random_element(rng, R) for _ in range(10)]
    Xi = cb.extend_finite_index(Phi, cs, K)
    assert all(Xi.table[f] == Phi.resolve(f) for f in K)


def test_extend_four_class_example():
    s = WeightedSpace.uniform(4)
    S = make_relation(s, [range(4)])
    fine = make_relation(s, [[0, 1], [2, 3]])
    cs = cb.build_choice_system(SubrelationPair(fine, S))
    rng = rng_from(5)
    K = [random_element(rng, S) for _ in range(100)]
    Xi = cb.extend_finite_index(exact_embedding(fine), cs, K)
    assert defect(Xi)[:2] == (0, 0)
    for f in K:
        terms = cb.xi_terms(exact_embedding(fine), cs, f)
        for a in range(len(terms)):
            for b in range(a + 1, len(terms)):
                assert not terms[a][3].dom & terms[b][3].dom
                assert not terms[a][3].ran & terms[b][3].ran


# -- product ---------------------------------------------------------------------

def test_product_examples():
    rng = rng_from(6)
    R, S = random_relation(rng, 4, 12), random_relation(rng, 4, 12)
    mR, mS = exact_embedding(R), exact_embedding(S)
    K = [(random_element(rng, R), random_element(rng, S)) for _ in range(100)]
    kappa = cb.product_pair(mR, mS, K, close=False)
    RS = kappa.source
    assert kappa(RS.identity()) == P.identity(kappa.target_n)
    for g, h in K:
        img = kappa(product_element(g, h, RS))
        assert pb.trace(img) == trace_mu(g) * trace_mu(h)
    back = cb.pullback_along_T(kappa, R, S, [g for g, _ in K[:10]])
    assert all(pb.trace(back(g)) == trace_mu(g) for g, _ in K[:10])


# -- reconstruction and trimming ---------------------------------------------------

def test_reconstruct_examples():
    rng = rng_from(7)
    R = random_relation(rng, 8, 40, min_class=2)
    theta = exact_embedding(R)
    assert cb.reconstruct_measure_algebra(theta, []) == frozenset()
    assert cb.reconstruct_measure_algebra(theta, range(R.n)) == frozenset(range(theta.target_n))
    big = max(R.classes, key=len)
    if len(big) >= 3:
        A = big
        g1 = support_element(R, A)
        g2 = g1.inverse()
        assert g1 != g2 and g2.supp == g1.supp
        assert cb.reconstruct_measure_algebra(theta, A, g1) == cb.reconstruct_measure_algebra(theta, A, g2)
    with pytest.raises(Inadmissible):
        cb.reconstruct_measure_algebra(exact_embedding(quarter()), [0, 1])


def test_trim_examples():
    s = WeightedSpace.uniform(5)
    R = make_relation(s, [[0, 1], [2, 3, 4]])
    theta = exact_embedding(R)
    P2 = R.subset([0, 1])
    Q_ = P2.complement()
    RQ = restrict_relation(R, Q_)
    rng = rng_from(8)
    K = [random_element(rng, RQ, full=True) for _ in range(10)]
    eta = cb.trim_periodic(theta, P2, K).with_products()
    assert defect(eta)[:2] == (0, 0)
    for f in K:
        ft = cb.extend_by_identity(f, Q_, R)
        assert trace_mu(f) == cb.trim_trace_quotient(trace_mu(ft), measure(P2))
    alpha, A = cb.trim_support(theta, P2)
    assert alpha.supp == P2.members and len(A) == 2
    with pytest.raises(NoSupportWitness):
        cb.trim_support(exact_embedding(quarter()), quarter().subset([0, 2]))


def test_trim_empty_p():
    R = make_relation(WeightedSpace.uniform(3), [[0, 1, 2]])
    theta = exact_embedding(R)
    f = R.element({0: 1, 1: 0})
    eta = cb.trim_periodic(theta, R.subset([]), [f])
    assert eta(eta.source.element(f.map)) == theta.resolve(f)


def test_trim_formula_product_form_differs():
    # mu(P) = 1/5 and tr f~ = 2/5: the product form gives 4/25, direct count 1/4
    assert cb.trim_trace_quotient(Q(2, 5), Q(1, 5)) == Q(1, 4)
    assert cb.trim_trace_product(Q(2, 5), Q(1, 5)) == Q(4, 25)
