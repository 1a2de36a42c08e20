"""Exhaustive maximum-sum oracles over sunflower-free family tuples.

Only inclusion-maximal tuples matter (removing a set never creates a
sunflower), so for k = 3 the last family is determined by the first two:
it is every candidate set that does not complete a forbidden sunflower.
The first family is enumerated up to relabelling of [n]; for each one a
subset-DP kernel scans every second family and reports the best total.
"""
from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .constructions import sum_extremal
from .errors import DomainError, VerificationError
from .setfam import (
    MAX_ENUM_N,
    Family,
    FamilyTuple,
    all_subsets,
    find_multicolor_sunflower,
    find_uniform_sunflower,
    format_families,
    level_bound,
    pairwise_core,
    popcount,
    subsets_of_size,
    uniform_bound,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**9
CHECKPOINT = 10**7
MAX_DP_BITS = 20


@dataclass(frozen=True)
class SearchResult:
    best_total: int
    witness_tuple: FamilyTuple
    nodes_explored: int
    proven_optimal: bool

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "best_total": self.best_total,
            "sizes": self.witness_tuple.sizes,
            "nodes_explored": self.nodes_explored,
            "proven_optimal": self.proven_optimal,
            "witness": format_families(self.witness_tuple),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def canonical_key(ft: FamilyTuple):
    return tuple(sorted((-len(f), tuple(f.sorted())) for f in ft))


def canonical_form(ft: FamilyTuple) -> FamilyTuple:
    """Families reordered by size (descending), ties by sorted members."""
    order = sorted(range(ft.k), key=lambda i: (-len(ft[i]), tuple(ft[i].sorted())))
    return ft.permuted(order)


# ---------------------------------------------------------------------------
# problem description


@dataclass
class _Problem:
    n: int
    k: int
    t: int
    universe: list[int]          # candidate sets; bit b of a family mask = universe[b]
    tri: list[list[int]] | None  # t == 3: tri[a][b] = mask of c completing a sunflower
    pair: list[int] | None       # t == 2: pair[a] = mask of b forming a sunflower with a
    levels: list[tuple[int, int]]  # (universe-bit mask of a layer, bound on that layer)

    @property
    def size(self) -> int:
        return len(self.universe)


def _is_sunflower(sets, core_size):
    core = pairwise_core(sets)
    if core is None or any(s == core for s in sets):
        return False
    return core_size < 0 or popcount(core) == core_size


def _build_problem(n, k, t, universe, core_size, levels):
    nb = len(universe)
    tri = pair = None
    if t == 3:
        tri = [[0] * nb for _ in range(nb)]
        for a, b, c in itertools.combinations(range(nb), 3):
            if _is_sunflower([universe[a], universe[b], universe[c]], core_size):
                for x, y, z in itertools.permutations((a, b, c)):
                    tri[x][y] |= 1 << z
    elif t == 2:
        pair = [0] * nb
        for a, b in itertools.combinations(range(nb), 2):
            if _is_sunflower([universe[a], universe[b]], core_size):
                pair[a] |= 1 << b
                pair[b] |= 1 << a
    elif t != 1:
        raise DomainError(f"exhaustive search supports t <= 3, got t={t}")
    return _Problem(n, k, t, universe, tri, pair, levels)


def _to_tuple(p: _Problem, masks) -> FamilyTuple:
    return FamilyTuple.from_masks(
        p.n, [[p.universe[b] for b in range(p.size) if (m >> b) & 1] for m in masks])


def _from_tuple(p: _Problem, ft: FamilyTuple) -> list[int]:
    index = {x: b for b, x in enumerate(p.universe)}
    return [sum(1 << index[x] for x in fam.members) for fam in ft]


# ---------------------------------------------------------------------------
# completion step for k = 3


def _completion_inputs(p: _Problem, f0: int):
    """(col, base, avoid) so that forbidden(F1) = base | OR col[b], b in F1."""
    nb = p.size
    if p.t == 3:
        col = [0] * nb
        for a in range(nb):
            if (f0 >> a) & 1:
                row = p.tri[a]
                for b in range(nb):
                    col[b] |= row[b]
        return col, 0, 0
    if p.t == 2:
        base = 0
        for a in range(nb):
            if (f0 >> a) & 1:
                base |= p.pair[a]
        return list(p.pair), base, base
    return [0] * nb, 0, 0


def _forbidden(col, base, f1):
    forb = base
    b = 0
    while f1:
        if f1 & 1:
            forb |= col[b]
        f1 >>= 1
        b += 1
    return forb


def _solve_chunk(p: _Problem, reps):
    """Best total over first families ``reps``; returns (best, masks list, nodes)."""
    full = (1 << p.size) - 1
    best = -1
    winners = []
    nodes = 0
    next_mark = CHECKPOINT
    for f0 in reps:
        col, base, avoid = _completion_inputs(p, f0)
        value, f1, visited = kernels.best_completion(
            np.array(col, dtype=np.uint64), base, avoid, p.size)
        nodes += visited
        if nodes >= next_mark:
            log.info("search progress: %d nodes", nodes)
            next_mark += CHECKPOINT
        total = popcount(f0) + value
        if total < best:
            continue
        f2 = full & ~_forbidden(col, base, f1)
        if total > best:
            best, winners = total, []
        winners.append((f0, f1, f2))
    return best, winners, nodes


def _orbit_representatives(p: _Problem) -> np.ndarray:
    """First-family masks that are least in their orbit under relabelling [n]."""
    nb = p.size
    index = {x: b for b, x in enumerate(p.universe)}
    perms = []
    for perm in itertools.permutations(range(p.n)):
        img = []
        for x in p.universe:
            y = 0
            for i in range(p.n):
                if (x >> i) & 1:
                    y |= 1 << perm[i]
            img.append(index[y])
        perms.append(img)
    masks = np.arange(1 << nb, dtype=np.int64)
    least = masks.copy()
    for img in perms:
        moved = np.zeros_like(masks)
        for b in range(nb):
            moved |= ((masks >> b) & 1) << img[b]
        np.minimum(least, moved, out=least)
    return masks[least == masks]


def _level_prune(p: _Problem, reps: np.ndarray, floor_value: int) -> np.ndarray:
    """Drop first families whose layer-by-layer bound falls below ``floor_value``."""
    bound = np.zeros(len(reps), dtype=np.int64)
    for layer, cap in p.levels:
        width = layer.bit_count()
        inside = np.bitwise_count((reps & layer).astype(np.uint64)).astype(np.int64)
        bound += np.minimum(inside + (p.k - 1) * width, cap)
    return reps[bound >= floor_value]


def _costs(p: _Problem, reps) -> list[int]:
    if p.t != 2:
        return [1 << p.size] * len(reps)
    return [1 << (p.size - _completion_inputs(p, int(f0))[2].bit_count()) for f0 in reps]


def _run_k3(p, seed_ft, budget, threads, use_level_bound):
    seed_value = sum(seed_ft.sizes)
    reps = _orbit_representatives(p)
    if use_level_bound:
        reps = _level_prune(p, reps, seed_value)
    reps = [int(x) for x in reps]
    # truncate deterministically so thread count never changes the outcome
    costs = _costs(p, reps)
    complete = True
    spent = 0
    for i, c in enumerate(costs):
        if spent + c > budget:
            reps = reps[:i]
            complete = False
            break
        spent += c
    if threads > 1 and len(reps) > 1:
        size = -(-len(reps) // threads)
        chunks = [reps[i:i + size] for i in range(0, len(reps), size)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_solve_chunk, [p] * len(chunks), chunks))
    else:
        parts = [_solve_chunk(p, reps)]
    best = max([seed_value] + [b for b, _, _ in parts])
    nodes = sum(n for _, _, n in parts)
    candidates = [seed_ft] if seed_value == best else []
    for b, winners, _ in parts:
        if b == best:
            candidates.extend(_to_tuple(p, w) for w in winners)
    witness = min(candidates, key=canonical_key)
    return best, canonical_form(witness), nodes, complete


def _run_k2(p, seed_ft, budget):
    full = (1 << p.size) - 1
    col = p.pair if p.t == 2 else [0] * p.size
    if 1 << p.size > budget:
        return sum(seed_ft.sizes), seed_ft, 0, False
    value, f0, nodes = kernels.best_completion(np.array(col, dtype=np.uint64), 0, 0, p.size)
    f1 = full & ~_forbidden(col, 0, f0)
    cand = _to_tuple(p, [f0, f1])
    seed_value = sum(seed_ft.sizes)
    if seed_value > value:
        return seed_value, canonical_form(seed_ft), nodes, True
    pool = [cand] + ([seed_ft] if seed_value == value else [])
    return value, canonical_form(min(pool, key=canonical_key)), nodes, True


# ---------------------------------------------------------------------------
# greedy fallback for instances beyond exhaustive reach


def _greedy_extend(ft: FamilyTuple, universe, is_free) -> FamilyTuple:
    """Add every candidate set that keeps the tuple free, in a fixed order."""
    for i in range(ft.k):
        for x in universe:
            if x in ft[i]:
                continue
            probe = ft.replace(i, Family.from_masks(ft.n, [x]))
            if is_free(probe):
                ft = ft.replace(i, Family(ft.ground, ft[i].members | {x}))
    return ft


def _finish(best, witness, nodes, proven, is_free):
    if not is_free(witness):
        raise VerificationError("search returned a tuple containing a sunflower", witness)
    if sum(witness.sizes) != best:
        raise VerificationError("witness size does not match reported optimum", witness)
    return SearchResult(best, witness, nodes, proven)


def _feasible_size(nb, k):
    return k in (2, 3) and nb <= MAX_DP_BITS


def exhaustive_max_sum(n: int, k: int = 3, budget: int = DEFAULT_BUDGET, threads: int = 1,
                       use_level_bound: bool = False) -> SearchResult:
    """Maximum total size of k sunflower-free families over [n].

    Exhaustive (``proven_optimal``) for k = 3 while the node budget lasts;
    otherwise the construction seed is greedily extended and reported as a
    lower bound.  ``use_level_bound`` prunes with the per-layer uniform
    bounds, which makes the result rely on that lemma.
    """
    if k < 2 or n < 1 or n > MAX_ENUM_N:
        raise DomainError(f"need k >= 2 and 1 <= n <= {MAX_ENUM_N}, got n={n}, k={k}")
    if n >= k >= 3:
        seed = sum_extremal(n, k).tuple
    else:
        full = Family.from_masks(n, all_subsets(n))
        seed = FamilyTuple((full,) * (k - 1) + (Family.from_masks(n, [0]),))

    def is_free(ft):
        return find_multicolor_sunflower(ft) is None

    universe = list(all_subsets(n))
    if k != 3 or not _feasible_size(len(universe), k):
        witness = canonical_form(_greedy_extend(seed, universe, is_free))
        return _finish(sum(witness.sizes), witness, 0, False, is_free)
    levels = []
    for s in range(n + 1):
        layer = sum(1 << b for b, x in enumerate(universe) if popcount(x) == s)
        levels.append((layer, level_bound(n, s, k) if s >= 1 else k))
    p = _build_problem(n, k, 3, universe, -1, levels)
    best, witness, nodes, complete = _run_k3(p, seed, budget, threads, use_level_bound)
    if not complete:
        greedy = canonical_form(_greedy_extend(witness, universe, is_free))
        best, witness = sum(greedy.sizes), greedy
    return _finish(best, witness, nodes, complete, is_free)


def _uniform_seed(n, s, c, t, k):
    layer = subsets_of_size(n, s)
    if t == 1:
        fams = [layer] * k
    elif c == 0 and n % s == 0 and t == n // s and t < k:
        fams = [[x for x in layer if not x & 1]] * k
    else:
        fams = [layer] * (t - 1) + [[]] * (k - t + 1)
    return FamilyTuple.from_masks(n, fams)


def exhaustive_max_sum_uniform(n: int, s: int, c: int, t: int, k: int,
                               budget: int = DEFAULT_BUDGET, threads: int = 1,
                               use_level_bound: bool = False) -> SearchResult:
    """Maximum total size of k s-uniform families over [n] with no t-petal
    core-c sunflower drawn from t distinct families."""
    if not (1 <= s <= n <= MAX_ENUM_N and 0 <= c and 1 <= t <= k and k >= 2):
        raise DomainError(f"invalid parameters n={n}, s={s}, c={c}, t={t}, k={k}")
    universe = subsets_of_size(n, s)

    def is_free(ft):
        return find_uniform_sunflower(ft, t, c) is None

    seed = _uniform_seed(n, s, c, t, k)
    if not _feasible_size(len(universe), k) or t > 3:
        witness = canonical_form(_greedy_extend(seed, universe, is_free))
        return _finish(sum(witness.sizes), witness, 0, False, is_free)
    try:
        cap = int(uniform_bound(n, s, c, t, k))
    except DomainError:
        cap = k * comb(n, s)
    levels = [((1 << len(universe)) - 1, cap)]
    p = _build_problem(n, k, t, universe, c, levels)
    if k == 2:
        best, witness, nodes, complete = _run_k2(p, seed, budget)
    else:
        best, witness, nodes, complete = _run_k3(p, seed, budget, threads, use_level_bound)
    if not complete:
        greedy = canonical_form(_greedy_extend(witness, universe, is_free))
        best, witness = sum(greedy.sizes), greedy
    return _finish(best, witness, nodes, complete, is_free)
