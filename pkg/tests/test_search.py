import itertools
import json

import pytest

from mcsunflower.errors import DomainError
from mcsunflower.search import canonical_form, exhaustive_max_sum, exhaustive_max_sum_uniform
from mcsunflower.setfam import (
    FamilyTuple,
    find_uniform_sunflower,
    is_sunflower_free,
    parse_families,
    s_formula,
    subsets_of_size,
    uniform_bound,
)


def brute_max_sum(n):
    """Every triple of families over [n], checked by the detector."""
    fams = [[m for m in range(1 << n) if (bits >> m) & 1] for bits in range(1 << (1 << n))]
    best = 0
    for trip in itertools.combinations_with_replacement(fams, 3):
        total = sum(map(len, trip))
        if total > best and is_sunflower_free(FamilyTuple.from_masks(n, trip)):
            best = total
    return best


def brute_max_uniform(n, s, c, t, k):
    layer = subsets_of_size(n, s)
    fams = [[x for i, x in enumerate(layer) if (bits >> i) & 1] for bits in range(1 << len(layer))]
    best = 0
    for combo in itertools.product(fams, repeat=k):
        total = sum(map(len, combo))
        if total > best and find_uniform_sunflower(FamilyTuple.from_masks(n, combo), t, c) is None:
            best = total
    return best


def test_small_exact(backend):
    res = exhaustive_max_sum(3, 3)
    assert res.best_total == 21 == s_formula(3, 3) and res.proven_optimal
    assert sorted(res.witness_tuple.sizes, reverse=True)[:2] == [8, 8]
    assert is_sunflower_free(res.witness_tuple)


def test_n2_against_brute_force(backend):
    res = exhaustive_max_sum(2, 3)
    assert res.proven_optimal
    assert res.best_total == brute_max_sum(2)


def test_n4_proven(backend):
    res = exhaustive_max_sum(4, 3)
    assert res.best_total == 38 == s_formula(4, 3)
    assert res.proven_optimal


def test_threads_do_not_change_result():
    one = exhaustive_max_sum(3, 3, threads=1)
    three = exhaustive_max_sum(3, 3, threads=3)
    assert one == three
    assert one.to_json() == three.to_json()


def test_level_bound_agrees(backend):
    plain = exhaustive_max_sum(3, 3)
    pruned = exhaustive_max_sum(3, 3, use_level_bound=True)
    assert plain.best_total == pruned.best_total
    assert pruned.nodes_explored <= plain.nodes_explored


def test_budget_exhaustion():
    res = exhaustive_max_sum(3, 3, budget=10)
    assert not res.proven_optimal
    assert res.best_total >= 21
    assert is_sunflower_free(res.witness_tuple)


def test_heuristic_beyond_desk_scale():
    res = exhaustive_max_sum(5, 3)
    assert not res.proven_optimal and res.best_total >= 71
    assert is_sunflower_free(res.witness_tuple)
    assert exhaustive_max_sum(3, 4).best_total >= 25


def test_domain():
    with pytest.raises(DomainError):
        exhaustive_max_sum(0, 3)
    with pytest.raises(DomainError):
        exhaustive_max_sum(3, 1)
    with pytest.raises(DomainError):
        exhaustive_max_sum_uniform(3, 4, 0, 2, 3)


def test_witness_is_canonical_and_serializes():
    res = exhaustive_max_sum(3, 3)
    assert canonical_form(res.witness_tuple) == res.witness_tuple
    d = json.loads(res.to_json())
    assert d["best_total"] == 21 and d["schema"] == 1
    assert parse_families(d["witness"]) == res.witness_tuple
    assert exhaustive_max_sum(3, 3) == res


@pytest.mark.parametrize("case,expected", [
    ((3, 1, 0, 3, 3), 6),
    ((4, 2, 1, 3, 3), 12),
    ((4, 2, 0, 2, 3), 9),
])
def test_uniform_examples(backend, case, expected):
    res = exhaustive_max_sum_uniform(*case)
    assert res.best_total == expected == uniform_bound(*case)
    assert res.proven_optimal
    assert find_uniform_sunflower(res.witness_tuple, case[3], case[2]) is None


@pytest.mark.parametrize("case", [(3, 1, 0, 3, 3), (3, 1, 0, 2, 3), (3, 2, 1, 2, 3), (3, 2, 0, 2, 2)])
def test_uniform_against_brute_force(case):
    res = exhaustive_max_sum_uniform(*case)
    assert res.proven_optimal
    assert res.best_total == brute_max_uniform(*case)


def test_uniform_pruning_sound():
    for case in [(3, 1, 0, 3, 3), (4, 2, 1, 3, 3), (4, 2, 0, 2, 3)]:
        plain = exhaustive_max_sum_uniform(*case)
        pruned = exhaustive_max_sum_uniform(*case, use_level_bound=True)
        assert plain.best_total == pruned.best_total
