import pytest

from sofickit.errors import BudgetExceeded
from sofickit.measured import WeightedSpace
from sofickit.oracle import (
    EnumerationBudget,
    count_pbij,
    enumerate_full_semigroup,
    enumerate_pbij,
    full_semigroup_size,
)
from sofickit.relation import make_relation


def test_counts():
    assert [len(list(enumerate_pbij(n))) for n in range(5)] == [1, 2, 7, 34, 209]
    assert [count_pbij(n) for n in range(5)] == [1, 2, 7, 34, 209]
    assert len(set(enumerate_pbij(4))) == 209


def test_full_semigroup_counts():
    singletons = make_relation(WeightedSpace.uniform(4), [[0], [1], [2], [3]])
    elems = list(enumerate_full_semigroup(singletons))
    assert len(elems) == 2 ** 4
    assert all(f.map.is_idempotent() for f in elems)
    pair = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    assert len(list(enumerate_full_semigroup(pair))) == 7
    mixed = make_relation(WeightedSpace.uniform(5), [[0, 1], [2, 3, 4]])
    assert full_semigroup_size(mixed) == 7 * 34 == len(set(enumerate_full_semigroup(mixed)))


def test_budget(monkeypatch):
    with pytest.raises(BudgetExceeded):
        list(enumerate_pbij(6))
    monkeypatch.setenv("SOFICKIT_BUDGET", "6")
    assert EnumerationBudget.from_env().max_n == 6
    monkeypatch.setenv("SOFICKIT_BUDGET", "max_n=3,max_semigroup=10")
    b = EnumerationBudget.from_env()
    assert (b.max_n, b.max_semigroup) == (3, 10)
    with pytest.raises(BudgetExceeded):
        list(enumerate_full_semigroup(make_relation(WeightedSpace.uniform(3), [[0, 1, 2]]), b))
