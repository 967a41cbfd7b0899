from fractions import Fraction

import pytest

from sofickit.errors import Inadmissible, NestingViolated, NotClassRespecting, NotInvariant, NotPartition
from sofickit.measured import WeightedSpace
from sofickit.pbij import PartialBijection as P
from sofickit.relation import (
    LocalIso,
    SubrelationPair,
    index_profile,
    make_relation,
    metric_mu,
    orbit_relation,
    periodic_part_ge2,
    product_element,
    product_relation,
    restrict_relation,
    support_element,
    trace_mu,
)

Q = Fraction


def quarter_space():
    return WeightedSpace.from_weights([Q(1, 4), Q(1, 4), Q(1, 2)])


def test_make_relation_checks():
    make_relation(WeightedSpace.uniform(4), [[0, 3], [1], [2]])
    make_relation(quarter_space(), [[0, 1], [2]])
    with pytest.raises(NotInvariant):
        make_relation(WeightedSpace.from_weights([Q(1, 4), Q(3, 4)]), [[0, 1]])
    with pytest.raises(NotPartition):
        make_relation(WeightedSpace.uniform(3), [[0, 1]])
    with pytest.raises(NotPartition):
        make_relation(WeightedSpace.uniform(3), [[0, 1], [1, 2]])


def test_orbit_relation_examples():
    s = WeightedSpace.uniform(4)
    assert orbit_relation(s, [P([1, 0, 2, 3])]).classes == ((0, 1), (2,), (3,))
    assert orbit_relation(s, [P.identity(4)]).classes == ((0,), (1,), (2,), (3,))
    assert orbit_relation(s, [P([1, 2, 3, 0])]).classes == ((0, 1, 2, 3),)


def test_metric_and_trace_examples():
    R = make_relation(quarter_space(), [[0, 1], [2]])
    swap = R.element({0: 1, 1: 0})
    assert metric_mu(swap, swap) == 0
    assert trace_mu(R.identity()) == 1
    assert metric_mu(swap, R.identity()) == 1
    assert trace_mu(swap) == 0
    with pytest.raises(NotClassRespecting):
        R.element({0: 2})


def test_restrict_relation_examples():
    R = make_relation(WeightedSpace.uniform(4), [[0, 1], [2, 3]])
    assert restrict_relation(R, R.space.full()) == R
    RA = restrict_relation(R, R.subset([0, 1]))
    assert RA.classes == ((0, 1),) and RA.space.weights == (Q(1, 2), Q(1, 2))
    RB = restrict_relation(R, R.subset([0, 2, 3]))
    assert (0,) in RB.classes


def test_product_relation_examples():
    R = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    S = make_relation(WeightedSpace.from_weights([Q(1, 6), Q(1, 6), Q(1, 6), Q(1, 2)]), [[0, 1, 2], [3]])
    RS = product_relation(R, S)
    assert sorted(len(c) for c in RS.classes) == [2, 6]
    assert RS.space.weights[0 * 4 + 3] == Q(1, 2) * Q(1, 2)
    point = make_relation(WeightedSpace.uniform(1), [[0]])
    RP = product_relation(R, point)
    assert RP.classes == R.classes and RP.space.weights == R.space.weights
    g = product_element(R.element({0: 1, 1: 0}), S.identity(), RS)
    assert trace_mu(g) == 0


def test_index_profile_examples():
    s = WeightedSpace.uniform(6)
    S = make_relation(s, [range(6)])
    assert set(index_profile(SubrelationPair(S, S))) == {1}
    assert set(index_profile(SubrelationPair(make_relation(s, [[0, 1], [2, 3], [4, 5]]), S))) == {3}
    t = WeightedSpace.uniform(3)
    assert set(index_profile(SubrelationPair(make_relation(t, [[0], [1], [2]]), make_relation(t, [[0, 1, 2]])))) == {3}
    with pytest.raises(NestingViolated):
        SubrelationPair(make_relation(s, [[0, 1, 2, 3, 4, 5]]), make_relation(s, [[0, 1, 2], [3, 4, 5]]))


def test_periodic_part_examples():
    s = WeightedSpace.uniform(3)
    assert periodic_part_ge2(make_relation(s, [[0], [1], [2]])).members == frozenset()
    assert periodic_part_ge2(make_relation(s, [[0, 1, 2]])).members == frozenset({0, 1, 2})
    assert periodic_part_ge2(make_relation(quarter_space(), [[0, 1], [2]])).members == frozenset({0, 1})


def test_support_element_examples():
    R = make_relation(WeightedSpace.uniform(3), [[0, 1, 2]])
    assert support_element(R, []) == R.identity()
    assert support_element(R, [0, 1]) == R.element({0: 1, 1: 0, 2: 2})
    R2 = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    with pytest.raises(Inadmissible):
        support_element(R2, [0])


def test_localiso_equality_needs_same_structure():
    a = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    b = make_relation(WeightedSpace.uniform(2), [[0], [1]])
    assert a.identity() != b.identity()
    assert a.identity() == LocalIso(a, P.identity(2))
