from fractions import Fraction

import pytest

from sofickit import pbij as pb
from sofickit.embed import (
    AlmostMorphism,
    ExactEmbedding,
    defect,
    exact_embedding,
    isometry_budget,
    isometry_gap,
    perturb,
)
from sofickit.errors import MissingImage
from sofickit.measured import WeightedSpace
from sofickit.oracle import alt_embedding
from sofickit.pbij import PartialBijection as P
from sofickit.relation import make_relation, trace_mu
from sofickit.sampling import random_element, random_relation, rng_from
from sofickit.suites import inflate

Q = Fraction


def test_uniform_embedding_is_identity_map():
    R = make_relation(WeightedSpace.uniform(4), [[0, 1, 2], [3]])
    g = R.element({0: 2, 2: 1})
    assert ExactEmbedding(R)(g) == g.map


def test_quarter_example():
    R = make_relation(WeightedSpace.from_weights([Q(1, 4), Q(1, 4), Q(1, 2)]), [[0, 1], [2]])
    swap = R.element({0: 1, 1: 0})
    m = exact_embedding(R, [swap])
    assert m.target_n == 4
    assert m(swap) == P.from_dict(4, {0: 1, 1: 0})
    assert pb.trace(m(swap)) == 0 == trace_mu(swap)
    assert defect(m)[:2] == (0, 0)


def test_trace_preserved_on_random_relations():
    rng = rng_from(7)
    for _ in range(10):
        R = random_relation(rng, 10, 60)
        emb = ExactEmbedding(R)
        gs = [random_element(rng, R) for _ in range(200)]
        assert all(pb.trace(img) == trace_mu(g) for g, img in zip(gs, emb.images(gs)))


def test_missing_product_raises():
    R = make_relation(WeightedSpace.uniform(3), [[0, 1, 2]])
    f = R.element({0: 1, 1: 2, 2: 0})
    m = AlmostMorphism(R, (f,), 3, {f: f.map})
    with pytest.raises(MissingImage):
        defect(m)


def test_identity_and_empty_forced():
    R = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    with pytest.raises(ValueError):
        AlmostMorphism(R, (), 2, {R.identity(): P.empty(2)})
    m = AlmostMorphism(R, (), 2, {})
    assert m(R.identity()) == P.identity(2) and m(R.empty()) == P.empty(2)


def _inflated(seed):
    rng = rng_from(seed)
    R = random_relation(rng, 8, 40)
    m = exact_embedding(R, [random_element(rng, R) for _ in range(15)])
    return inflate(m, -(-200 // m.target_n))


def test_perturb_zero_and_determinism():
    m = _inflated(1)
    assert all(perturb(m, 0, 5).table[f] == img for f, img in m.table.items())
    a, b = perturb(m, Q(1, 20), 5), perturb(m, Q(1, 20), 5)
    assert all(a.table[f] == b.table[f] for f in m.table)


@pytest.mark.parametrize("delta", [Q(1, 100), Q(1, 20)])
def test_perturb_bounds(delta):
    for seed in range(5):
        d = defect(perturb(_inflated(seed), delta, seed))
        assert d.eps_mult <= 3 * delta and d.eps_trace <= delta


def test_isometry_gap():
    m = _inflated(3)
    assert isometry_gap(m) == 0
    p = perturb(m, Q(1, 100), 0)
    assert isometry_gap(p) <= isometry_budget(p)
    R = m.source
    assert isometry_gap(AlmostMorphism(R, (R.identity(),), m.target_n, {})) == 0


def test_alt_embedding_profiles():
    rng = rng_from(2)
    R = random_relation(rng, 8, 60)
    K = [random_element(rng, R) for _ in range(30)]
    a, b = exact_embedding(R, K), alt_embedding(R, K)
    assert [pb.trace(a(f)) for f in K] == [pb.trace(b(f)) for f in K]
    assert all(pb.hamming_distance(a(f), a(g)) == pb.hamming_distance(b(f), b(g)) for f in K for g in K)
    assert defect(b)[:2] == (0, 0)
    if a.target_n > 1:
        assert any(a(f) != b(f) for f in K)
