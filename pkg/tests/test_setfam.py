import itertools
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsunflower.errors import DomainError, UsageError
from mcsunflower.setfam import (
    Family,
    FamilyTuple,
    GroundSet,
    amgm_factor,
    amgm_product_bound,
    elements_of,
    find_multicolor_sunflower,
    find_uniform_sunflower,
    format_families,
    is_multicolor_sunflower,
    is_sunflower_free,
    level_bound,
    mask_of,
    pairwise_core,
    parse_families,
    popcount,
    read_families,
    s_formula,
    subsets_of_size,
    uniform_bound,
    write_families,
)


def S(*xs):
    return mask_of(xs)


def brute_sunflower(sets):
    """Independent check on Python sets."""
    sets = [frozenset(elements_of(m)) for m in sets]
    core = sets[0] & sets[1]
    if any(a & b != core for a, b in itertools.combinations(sets, 2)):
        return False
    return all(s - core for s in sets)


def brute_free(ft):
    return not any(brute_sunflower(c) for c in itertools.product(*[f.sorted() for f in ft]))


def tuples(max_n=4, max_k=4):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        k = draw(st.integers(2, max_k))
        fams = [draw(st.sets(st.integers(0, (1 << n) - 1), max_size=6)) for _ in range(k)]
        return FamilyTuple.from_masks(n, fams)
    return build()


# masks and types

def test_mask_roundtrip():
    assert mask_of([1, 3]) == 0b101
    assert elements_of(0b101) == (1, 3)
    assert popcount(0b1011) == 3
    assert subsets_of_size(3, 2) == [0b011, 0b101, 0b110]


@pytest.mark.parametrize("n", [0, 65, -1])
def test_ground_set_range(n):
    with pytest.raises(DomainError):
        GroundSet(n)


def test_family_rejects_wide_mask():
    with pytest.raises(DomainError):
        Family.from_masks(2, [0b100])


def test_tuple_needs_shared_ground():
    with pytest.raises(DomainError):
        FamilyTuple((Family.from_masks(2, [1]), Family.from_masks(3, [1])))
    with pytest.raises(DomainError):
        FamilyTuple((Family.from_masks(2, [1]),))


# pairwise_core and is_multicolor_sunflower

def test_pairwise_core_examples():
    assert pairwise_core([S(1, 2), S(1, 3), S(1, 4)]) == S(1)
    assert pairwise_core([S(1, 2), S(1, 2, 3), S(1, 4)]) is None
    assert pairwise_core([S(1), S(2), S(3)]) == 0


def test_pairwise_core_needs_two():
    with pytest.raises(UsageError):
        pairwise_core([S(1)])


def test_is_multicolor_sunflower_examples():
    assert is_multicolor_sunflower([S(1, 2), S(1, 3), S(1, 4)])
    assert not is_multicolor_sunflower([S(1), S(1, 2), S(1, 3)])
    assert not is_multicolor_sunflower([0, S(1), S(2)])


@given(st.lists(st.integers(0, 31), min_size=2, max_size=5))
def test_sunflower_sets_are_distinct(sets):
    if is_multicolor_sunflower(sets):
        assert len(set(sets)) == len(sets)
    assert is_multicolor_sunflower(sets) == brute_sunflower(sets)


# detection

def test_find_examples(backend):
    from mcsunflower.constructions import sum_extremal
    assert find_multicolor_sunflower(sum_extremal(5, 3).tuple) is None
    ft = FamilyTuple((Family.of(4, [(), {1}]), Family.of(4, [{1, 2}]), Family.of(4, [{1, 3}])))
    assert find_multicolor_sunflower(ft) is None
    ft = FamilyTuple((Family.of(4, [{1, 2}]), Family.of(4, [{1, 3}]), Family.of(4, [{1, 4}])))
    w = find_multicolor_sunflower(ft)
    assert w.core == S(1) and w.petalsets == (S(1, 2), S(1, 3), S(1, 4)) and w.is_valid()


def test_uniform_examples(backend):
    fam = Family.of(4, [{2, 3}, {2, 4}, {3, 4}])
    ft = FamilyTuple((fam,) * 3)
    assert find_uniform_sunflower(ft, 2, 0) is None
    w = find_uniform_sunflower(ft, 2, 1)
    assert w is not None and w.is_valid() and popcount(w.core) == 1
    assert len(set(w.family_indices)) == 2
    assert find_uniform_sunflower(ft, 1, 0) is None


def test_uniform_needs_distinct_families(backend):
    # both sets would have to come from the same family
    ft = FamilyTuple.from_masks(3, [[S(1), S(2)], [], []])
    assert find_uniform_sunflower(ft, 2, 0) is None
    ft = FamilyTuple.from_masks(3, [[S(1)], [], [S(2)]])
    assert find_uniform_sunflower(ft, 2, 0).family_indices == (0, 2)


@settings(max_examples=150, deadline=None)
@given(tuples())
def test_detector_matches_brute_force(backend, ft):
    w = find_multicolor_sunflower(ft)
    assert (w is None) == brute_free(ft)
    if w is not None:
        assert w.is_valid() and brute_sunflower(w.petalsets)
        assert all(p in ft[i] for i, p in zip(w.family_indices, w.petalsets))


@settings(max_examples=60, deadline=None)
@given(tuples(max_k=3), st.permutations(range(3)))
def test_color_symmetry(ft, order):
    order = [i for i in order if i < ft.k] + list(range(3, ft.k))
    w = find_multicolor_sunflower(ft)
    wp = find_multicolor_sunflower(ft.permuted(order))
    assert (w is None) == (wp is None)
    if wp is not None:
        assert all(p in ft[order[i]] for i, p in enumerate(wp.petalsets))


@settings(max_examples=60, deadline=None)
@given(tuples(max_k=3), st.data())
def test_downward_closure(ft, data):
    if not is_sunflower_free(ft):
        return
    i = data.draw(st.integers(0, ft.k - 1))
    if len(ft[i]):
        m = data.draw(st.sampled_from(ft[i].sorted()))
        assert is_sunflower_free(ft.replace(i, ft[i].without(m)))


# bounds

def test_s_formula_examples():
    assert s_formula(3, 3) == 21
    assert s_formula(4, 3) == 38
    assert s_formula(5, 4) == 113
    with pytest.raises(DomainError):
        s_formula(2, 3)


def test_uniform_bound_examples():
    assert uniform_bound(4, 2, 0, 2, 3) == 9
    assert uniform_bound(4, 2, 1, 3, 3) == 12
    assert uniform_bound(3, 1, 0, 3, 3) == 6
    assert uniform_bound(5, 2, 0, 2, 3) == Fraction(15)
    # a non-integral first-branch value stays exact
    assert uniform_bound(7, 3, 0, 2, 3) == Fraction(3 * comb(7, 3), 2)
    with pytest.raises(DomainError):
        uniform_bound(3, 2, 0, 2, 3)
    with pytest.raises(DomainError):
        uniform_bound(4, 2, 2, 2, 3)


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("s", [1, 2, 3])
@pytest.mark.parametrize("c", [0, 1])
def test_uniform_bound_branches_agree(k, s, c):
    if c >= s:
        return
    n = c + k * (s - c)
    assert uniform_bound(n, s, c, k, k) == (k - 1) * comb(n, s)
    for extra in range(3):
        assert uniform_bound(n + extra, s, c, k, k) == (k - 1) * comb(n + extra, s)


def test_level_bound():
    assert level_bound(3, 1, 3) == 6
    assert level_bound(4, 4, 3) == 3
    assert level_bound(4, 2, 3) == 12


def test_amgm():
    assert amgm_factor(3) == Fraction(8, 27)
    assert amgm_product_bound(1, 3) == Fraction(8, 27) * 8
    assert amgm_product_bound(2, 3) == Fraction(8, 27) * 64
    for k in range(3, 17):
        assert float(amgm_factor(k)) < 0.367880


@pytest.mark.parametrize("k", range(3, 8))
def test_s_formula_matches_construction(k):
    from mcsunflower.constructions import sum_extremal
    for n in range(k, 13):
        assert sum_extremal(n, k).total == s_formula(n, k)


# file format

def test_parse_format_roundtrip(tmp_path):
    ft = FamilyTuple.from_masks(4, [[0, S(1, 2)], [S(4)], []])
    text = format_families(ft)
    assert parse_families(text) == ft
    assert parse_families(format_families(ft, hex_masks=True)) == ft
    path = tmp_path / "f.txt"
    write_families(path, ft)
    assert read_families(path) == ft


def test_parse_comments_and_hex():
    text = "# a comment\nn=3\n0x3\n---\n1,3\n\n"
    ft = parse_families(text)
    assert ft[0].sorted() == [0b011]
    assert ft[1].sorted() == [0, 0b101]


@pytest.mark.parametrize("text, line", [
    ("n=3\n1,4\n", 2),
    ("m=3\n1\n", 1),
    ("n=3\n1\n1\n", 3),
    ("n=3\n1,x\n", 2),
    ("n=3\n0x10\n", 2),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(UsageError, match=f"line {line}"):
        parse_families(text)


@settings(max_examples=50, deadline=None)
@given(tuples(max_n=5))
def test_roundtrip_property(ft):
    assert parse_families(format_families(ft)) == ft
