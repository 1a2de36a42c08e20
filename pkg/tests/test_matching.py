import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsunflower.errors import DomainError
from mcsunflower.matching import (
    TEMPLATES,
    PetalGraph,
    StructurePreconditionError,
    candidate_graphs,
    classify,
    classify_json,
    count_m2,
    count_t,
    graph_stats,
    max_matching,
    min_vertex_cover,
    verify_structure_lemma,
)

G1, G2, G3 = TEMPLATES["G1"], TEMPLATES["G2"], TEMPLATES["G3"]


def graphs(max_k=6):
    @st.composite
    def build(draw):
        k = draw(st.integers(1, max_k))
        rows = draw(st.lists(st.integers(0, (1 << k) - 1), min_size=k, max_size=k))
        return PetalGraph(k, tuple(rows))
    return build()


def brute_matching(g):
    best = 0
    for perm in itertools.permutations(range(g.k)):
        best = max(best, sum(g.has_edge(i, perm[i]) for i in range(g.k)))
    return best


def brute_cover(g):
    edges = g.edges()
    verts = [("r", i) for i in range(g.k)] + [("c", j) for j in range(g.k)]
    for size in range(len(verts) + 1):
        for cov in itertools.combinations(verts, size):
            cov = set(cov)
            if all(("r", i) in cov or ("c", j) in cov for i, j in edges):
                return size


def brute_t(g):
    """Count 5-vertex subgraphs: a column with two edges plus an edge
    avoiding those three vertices."""
    edges = set(g.edges())
    total = 0
    for e1, e2, e3 in itertools.permutations(edges, 3):
        if e1 < e2 and e1[1] == e2[1] and e3[0] not in (e1[0], e2[0]) and e3[1] != e1[1]:
            total += 1
    return total


def test_matching_examples():
    full = PetalGraph(3, (0b111,) * 3)
    assert max_matching(full)[0] == 3
    assert max_matching(PetalGraph(3, (0, 0, 0)))[0] == 0
    assert max_matching(G2)[0] == 2


def test_cover_examples():
    cov = min_vertex_cover(G1)
    assert cov.size == 2 and cov.rows == {0, 1} and not cov.cols
    assert min_vertex_cover(PetalGraph.from_edges(3, [(1, 2)])).size == 1
    assert min_vertex_cover(G3).size == 2 == brute_cover(G3)


@pytest.mark.parametrize("name,stats", [("G1", (6, 0)), ("G2", (4, 2)), ("G3", (3, 2))])
def test_template_stats(name, stats):
    g = TEMPLATES[name]
    assert graph_stats(g)[:2] == stats
    assert classify(g) == {name}


def test_stats_need_k3():
    with pytest.raises(DomainError):
        graph_stats(PetalGraph(2, (1, 2)))


def test_classify_examples():
    assert classify(PetalGraph(3, (0, 0, 0))) == {"G1", "G2", "G3"}
    with pytest.raises(StructurePreconditionError) as exc:
        classify(PetalGraph(3, (0b001, 0b010, 0b100)))
    assert "matching" in exc.value.failed
    with pytest.raises(StructurePreconditionError) as exc:
        classify(PetalGraph(3, (0b001, 0b001, 0b001)))
    assert "degree" in exc.value.failed
    assert json.loads(classify_json(G2)) == ["G2"]


def test_fixed_labels_would_fail():
    # the lemma needs relabelling: this graph is no literal subgraph of any template
    g = PetalGraph(3, (0, 0b111, 0b111))
    assert classify(g) == {"G1"}
    assert not any(g.is_subgraph_of(t) for t in TEMPLATES.values())


def test_verify_lemma():
    res = verify_structure_lemma()
    assert res and res.scanned == 343 and res.max_statistic == 6
    assert res.qualifying > 0
    assert len(list(candidate_graphs())) == 343


def test_verify_lemma_catches_tight_bound():
    res = verify_structure_lemma(bound=5)
    assert not res and res.counterexample is not None
    assert sum(graph_stats(res.counterexample)[:2]) == 6


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_konig(g):
    nu, pairs = max_matching(g)
    cov = min_vertex_cover(g)
    assert nu == cov.size == len(pairs)
    assert all(g.has_edge(i, j) for i, j in pairs)
    assert len({j for _, j in pairs}) == nu
    assert all(i in cov.rows or j in cov.cols for i, j in g.edges())
    if g.k <= 4:
        assert nu == brute_matching(g)
        assert cov.size == brute_cover(g)


@settings(max_examples=200, deadline=None)
@given(graphs(max_k=3).filter(lambda g: g.k == 3), st.integers(0, 2), st.integers(0, 2))
def test_monotone_under_edges(g, i, j):
    h = g.with_edge(i, j)
    assert count_m2(g) <= count_m2(h)
    assert count_t(g) <= count_t(h)
    assert max_matching(g)[0] <= max_matching(h)[0]
    assert g.is_subgraph_of(h)


def test_t_against_subgraph_count():
    for rows in itertools.product(range(8), repeat=3):
        g = PetalGraph(3, rows)
        assert count_t(g) == brute_t(g)


def test_text_roundtrip():
    assert PetalGraph.from_text(G2.to_text()) == G2
    with pytest.raises(DomainError):
        PetalGraph.from_text("012\n000\n000")
    with pytest.raises(DomainError):
        PetalGraph(2, (0b100, 0))
