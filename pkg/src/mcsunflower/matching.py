"""Bipartite petal graphs: matchings, König covers, and the 3x3 structure lemma.

Rows are families (left side), columns are petal slots (right side).  A
graph is stored as one bitmask per row; bit j of row i is the edge (i, j).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DomainError

MAX_K = 16


@dataclass(frozen=True)
class PetalGraph:
    k: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise DomainError(f"graph order must be in 1..{MAX_K}, got {self.k}")
        rows = tuple(int(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != self.k or any(r < 0 or r >> self.k for r in rows):
            raise DomainError(f"rows {rows} do not describe a {self.k}x{self.k} graph")

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]]) -> PetalGraph:
        rows = tuple(sum(1 << j for j, x in enumerate(r) if x) for r in matrix)
        return cls(len(rows), rows)

    @classmethod
    def from_edges(cls, k: int, edges) -> PetalGraph:
        rows = [0] * k
        for i, j in edges:
            rows[i] |= 1 << j
        return cls(k, tuple(rows))

    @classmethod
    def from_text(cls, text: str) -> PetalGraph:
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if any(set(ln) - {"0", "1"} for ln in lines):
            raise DomainError("graph rows must consist of 0/1 characters")
        return cls.from_matrix([[ch == "1" for ch in ln] for ln in lines])

    def to_text(self) -> str:
        return "\n".join("".join("1" if (r >> j) & 1 else "0" for j in range(self.k))
                         for r in self.rows)

    def has_edge(self, i: int, j: int) -> bool:
        return bool((self.rows[i] >> j) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.k) for j in range(self.k) if self.has_edge(i, j)]

    def column_degree(self, j: int) -> int:
        return sum((r >> j) & 1 for r in self.rows)

    def with_edge(self, i: int, j: int) -> PetalGraph:
        rows = list(self.rows)
        rows[i] |= 1 << j
        return PetalGraph(self.k, tuple(rows))

    def relabel(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> PetalGraph:
        """Move edge (i, j) to (row_perm[i], col_perm[j])."""
        return PetalGraph.from_edges(self.k, [(row_perm[i], col_perm[j]) for i, j in self.edges()])

    def is_subgraph_of(self, other: PetalGraph) -> bool:
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))


class VertexCover(NamedTuple):
    rows: frozenset[int]
    cols: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.rows) + len(self.cols)


class GraphStats(NamedTuple):
    m2: int
    t: int
    matching_number: int
    cover_size: int


def max_matching(g: PetalGraph) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Maximum matching by repeated augmenting-path search.

    Returns the size and the matched (row, col) pairs sorted by row.
    """
    match_col = [-1] * g.k  # column -> row

    def augment(i, seen):
        for j in range(g.k):
            if g.has_edge(i, j) and not seen[j]:
                seen[j] = True
                if match_col[j] < 0 or augment(match_col[j], seen):
                    match_col[j] = i
                    return True
        return False

    for i in range(g.k):
        augment(i, [False] * g.k)
    pairs = tuple(sorted((i, j) for j, i in enumerate(match_col) if i >= 0))
    return len(pairs), pairs


def min_vertex_cover(g: PetalGraph) -> VertexCover:
    """Minimum vertex cover built from a maximum matching (König).

    Let Z be everything reachable from unmatched rows by alternating paths;
    the cover is (rows not in Z) plus (columns in Z).
    """
    _, pairs = max_matching(g)
    row_match = {i: j for i, j in pairs}
    col_match = {j: i for i, j in pairs}
    z_rows = {i for i in range(g.k) if i not in row_match}
    z_cols = set()
    frontier = list(z_rows)
    while frontier:
        i = frontier.pop()
        for j in range(g.k):
            if g.has_edge(i, j) and j not in z_cols and row_match.get(i) != j:
                z_cols.add(j)
                nxt = col_match.get(j)
                if nxt is not None and nxt not in z_rows:
                    z_rows.add(nxt)
                    frontier.append(nxt)
    return VertexCover(frozenset(range(g.k)) - z_rows, frozenset(z_cols))


def _require_three(g):
    if g.k != 3:
        raise DomainError(f"statistic defined for 3x3 graphs, got k={g.k}")


def count_m2(g: PetalGraph) -> int:
    """Number of 2-edge matchings."""
    return sum(1 for (a, b), (c, d) in itertools.combinations(g.edges(), 2)
               if a != c and b != d)


def count_t(g: PetalGraph) -> int:
    """Cherry-plus-edge configurations.

    A cherry is a column v with two of its edges (rows i, i'); the extra
    edge must avoid i, i' and v.  Counted once per (cherry, extra edge).
    """
    edges = g.edges()
    total = 0
    for v in range(g.k):
        nbrs = [i for i in range(g.k) if g.has_edge(i, v)]
        for i, ii in itertools.combinations(nbrs, 2):
            total += sum(1 for r, w in edges if r not in (i, ii) and w != v)
    return total


def graph_stats(g: PetalGraph) -> GraphStats:
    _require_three(g)
    nu, _ = max_matching(g)
    return GraphStats(count_m2(g), count_t(g), nu, min_vertex_cover(g).size)


# the three extremal templates; rows are V1, columns are V2
TEMPLATES: dict[str, PetalGraph] = {
    # K_{2,3}: two rows joined to every column
    "G1": PetalGraph(3, (0b111, 0b111, 0b000)),
    # two disjoint 2-edge paths: row 0 centred, column 2 centred
    "G2": PetalGraph(3, (0b011, 0b100, 0b100)),
    # path r0-c0-r1-c1-r2
    "G3": PetalGraph(3, (0b001, 0b011, 0b010)),
}


class StructurePreconditionError(DomainError):
    def __init__(self, failed: str, graph: PetalGraph):
        super().__init__(f"precondition failed: {failed}\n{graph.to_text()}")
        self.failed = failed
        self.graph = graph


def _embeds(g: PetalGraph, template: PetalGraph) -> bool:
    for rp in itertools.permutations(range(3)):
        for cp in itertools.permutations(range(3)):
            if g.relabel(rp, cp).is_subgraph_of(template):
                return True
    return False


def classify(g: PetalGraph) -> frozenset[str]:
    """Templates that contain g up to independent row and column relabelling."""
    _require_three(g)
    if any(g.column_degree(j) > 2 for j in range(3)):
        raise StructurePreconditionError("a column vertex has degree above 2", g)
    if max_matching(g)[0] > 2:
        raise StructurePreconditionError("matching number exceeds 2", g)
    return frozenset(name for name, tpl in TEMPLATES.items() if _embeds(g, tpl))


@dataclass(frozen=True)
class LemmaCheck:
    passed: bool
    scanned: int
    qualifying: int
    max_statistic: int
    counterexample: PetalGraph | None = None
    reason: str = ""

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "passed": self.passed,
            "scanned": self.scanned,
            "qualifying": self.qualifying,
            "max_m2_plus_t": self.max_statistic,
            "counterexample": None if self.counterexample is None
            else self.counterexample.to_text().split("\n"),
            "reason": self.reason,
        }


def candidate_graphs():
    """All 3x3 graphs whose column degrees are at most 2 (7^3 of them)."""
    neighbourhoods = [0] + [1 << i for i in range(3)] + [0b011, 0b101, 0b110]
    for cols in itertools.product(neighbourhoods, repeat=3):
        rows = tuple(sum(((cols[j] >> i) & 1) << j for j in range(3)) for i in range(3))
        yield PetalGraph(3, rows)


def verify_structure_lemma(bound: int = 6) -> LemmaCheck:
    """Exhaustively check the 3x3 structure lemma and m2 + t <= bound."""
    scanned = qualifying = best = 0
    for g in candidate_graphs():
        scanned += 1
        nu, _ = max_matching(g)
        if nu > 2:
            continue
        qualifying += 1
        stats = graph_stats(g)
        best = max(best, stats.m2 + stats.t)
        reason = ""
        if stats.matching_number != stats.cover_size:
            reason = "matching number differs from cover size"
        elif not classify(g):
            reason = "graph embeds in no template"
        elif stats.m2 + stats.t > bound:
            reason = f"m2 + t = {stats.m2 + stats.t} exceeds {bound}"
        if reason:
            return LemmaCheck(False, scanned, qualifying, best, g, reason)
    return LemmaCheck(True, scanned, qualifying, best)


def classify_json(g: PetalGraph) -> str:
    return json.dumps(sorted(classify(g)))
