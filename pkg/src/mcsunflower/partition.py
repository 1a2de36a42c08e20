"""Random-partition averaging: exact rational expectations and Monte Carlo.

Two partition models are covered.  The uniform-family model splits [n]
into parts X1..X_{k+2} of prescribed sizes and looks at the k candidate
sets X2 | Xj.  The four-part model splits [n] into X1..X4 with X2, X3, X4
nonempty and looks at the three sets X1 | Xj.
"""
from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels
from ._pykernels import pq_from_adjacency
from .errors import DomainError, InconsistencyError, UsageError, VerificationError
from .matching import PetalGraph
from .setfam import (
    Family,
    FamilyTuple,
    find_multicolor_sunflower,
    find_uniform_sunflower,
    full_mask,
    popcount,
)

ENUM_LIMIT_UNIFORM = 10
ENUM_LIMIT_PQ = 8
ENUM_LIMIT_COUNT = 12
PQ_BOUND = 6


def _fraction_str(x: Fraction | None):
    return None if x is None else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ExpectationReport:
    exact_value: Fraction | None = None
    enumerated_value: Fraction | None = None
    mc_estimate: float | None = None
    mc_stderr: float | None = None
    sample_count: int | None = None
    seed: int | None = None
    bound_checked: bool = False

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "exact_value": _fraction_str(self.exact_value),
            "exact_float": None if self.exact_value is None else float(self.exact_value),
            "enumerated_value": _fraction_str(self.enumerated_value),
            "mc_estimate": self.mc_estimate,
            "mc_stderr": self.mc_stderr,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "bound_checked": self.bound_checked,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# uniform-family partitions


@dataclass(frozen=True)
class UniformPartitionSpec:
    n: int
    s: int
    c: int
    k: int

    def __post_init__(self):
        if self.s < 1 or not 0 <= self.c <= self.s - 1 or self.k < 2:
            raise DomainError(f"infeasible partition spec {self}")
        if self.n < self.c + self.k * (self.s - self.c):
            raise DomainError(f"n={self.n} < c + k(s - c) = {self.c + self.k * (self.s - self.c)}")

    @property
    def part_sizes(self) -> tuple[int, ...]:
        petal = self.s - self.c
        return (self.n - (self.c + self.k * petal), self.c) + (petal,) * self.k

    def count(self) -> int:
        """Number of ordered partitions with these part sizes."""
        total = math.factorial(self.n)
        for size in self.part_sizes:
            total //= math.factorial(size)
        return total

    def partitions(self):
        """Yield every ordered partition as a tuple of masks (X1, ..., X_{k+2})."""
        sizes = self.part_sizes

        def rec(remaining, idx):
            if idx == len(sizes):
                yield ()
                return
            for chosen in itertools.combinations(remaining, sizes[idx]):
                rest = [x for x in remaining if x not in chosen]
                m = sum(1 << x for x in chosen)
                for tail in rec(rest, idx + 1):
                    yield (m,) + tail

        yield from rec(list(range(self.n)), 0)


def _require_small(n, limit, what):
    if n > limit:
        raise DomainError(f"{what} enumerates partitions and needs n <= {limit}, got {n}")


def membership_probability_check(spec: UniformPartitionSpec, a: int, j: int) -> Fraction:
    """Exact probability that X2 | Xj equals the set ``a`` (slots j = 3..k+2)."""
    if popcount(a) != spec.s or a >> spec.n:
        raise DomainError(f"set {a:#x} is not an {spec.s}-subset of [{spec.n}]")
    if not 3 <= j <= spec.k + 2:
        raise DomainError(f"slot j must lie in 3..{spec.k + 2}, got {j}")
    _require_small(spec.n, ENUM_LIMIT_UNIFORM, "membership_probability_check")
    hits = total = 0
    for parts in spec.partitions():
        total += 1
        if parts[1] | parts[j - 1] == a:
            hits += 1
    return Fraction(hits, total)


def expected_edge_count_uniform(ft: FamilyTuple, spec: UniformPartitionSpec) -> ExpectationReport:
    """Expected number of edges of the uniform-model petal graph.

    Computed in closed form and, for n <= 10, by averaging over every
    partition.  If the tuple has no k-petal core-c sunflower the value must
    not exceed (k - 1) k.
    """
    if spec.k != ft.k or spec.n != ft.n:
        raise DomainError("partition spec does not match the family tuple")
    if not all(f.is_uniform(spec.s) for f in ft):
        raise DomainError(f"every family must be {spec.s}-uniform")
    closed = Fraction(spec.k * sum(ft.sizes), comb(spec.n, spec.s))
    enumerated = None
    if spec.n <= ENUM_LIMIT_UNIFORM:
        edges = total = 0
        members = [f.members for f in ft]
        for parts in spec.partitions():
            total += 1
            core = parts[1]
            for xj in parts[2:]:
                cand = core | xj
                edges += sum(cand in m for m in members)
        enumerated = Fraction(edges, total)
        if enumerated != closed:
            raise InconsistencyError(f"closed form {closed} != enumeration {enumerated}")
    checked = False
    if find_uniform_sunflower(ft, spec.k, spec.c) is None:
        checked = True
        if closed > (spec.k - 1) * spec.k:
            raise VerificationError(
                f"expected edge count {closed} exceeds (k-1)k = {(spec.k - 1) * spec.k}", ft)
    return ExpectationReport(exact_value=closed, enumerated_value=enumerated,
                             bound_checked=checked)


# ---------------------------------------------------------------------------
# four-part partitions


def four_partition_formula(n: int) -> int:
    return 4**n - 3 * 3**n + 3 * 2**n - 1


def count_four_partitions(n: int, check: bool = True) -> int:
    """Ordered partitions of [n] into X1..X4 with X2, X3, X4 nonempty.

    For n <= 12 the closed form is compared with explicit enumeration
    unless ``check`` is False.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    value = four_partition_formula(n)
    if check and n <= ENUM_LIMIT_COUNT:
        counted = kernels.count_assignments(n)
        if counted != value:
            raise InconsistencyError(f"p({n}): formula {value} != enumeration {counted}")
    return value


@dataclass(frozen=True)
class FourPartSample:
    n: int
    parts: tuple[int, int, int, int]

    def __post_init__(self):
        x1, x2, x3, x4 = self.parts
        if x1 | x2 | x3 | x4 != full_mask(self.n) or \
                sum(popcount(x) for x in self.parts) != self.n:
            raise DomainError(f"parts {self.parts} do not partition [{self.n}]")
        if not (x2 and x3 and x4):
            raise DomainError("parts X2, X3, X4 must be nonempty")

    @classmethod
    def from_labels(cls, labels) -> FourPartSample:
        """``labels[i]`` in 1..4 is the part holding element i + 1."""
        parts = [0, 0, 0, 0]
        for i, lab in enumerate(labels):
            parts[lab - 1] |= 1 << i
        return cls(len(labels), tuple(parts))

    @property
    def slots(self) -> tuple[int, int, int]:
        x1 = self.parts[0]
        return (x1 | self.parts[1], x1 | self.parts[2], x1 | self.parts[3])


def petal_graph(ft: FamilyTuple, sample: FourPartSample) -> PetalGraph:
    """Row i joins column j iff slot set j lies in family i."""
    if ft.k != 3:
        raise DomainError(f"four-part model needs k = 3, got {ft.k}")
    slots = sample.slots
    return PetalGraph.from_matrix([[y in fam for y in slots] for fam in ft])


def pq_statistic(ft: FamilyTuple, sample: FourPartSample) -> tuple[int, int]:
    """(P, Q) from their indicator-sum definitions at one partition."""
    if ft.k != 3:
        raise DomainError(f"four-part model needs k = 3, got {ft.k}")
    slots = sample.slots
    fams = [f.members for f in ft]
    p2 = q2 = 0
    for y1, y2 in itertools.permutations(slots, 2):
        for b1, b2 in itertools.permutations(range(3), 2):
            p2 += y1 in fams[b1] and y2 in fams[b2]
        for b1, b2, b3 in itertools.permutations(range(3), 3):
            q2 += y1 in fams[b1] and y2 in fams[b2] and y2 in fams[b3]
    # each configuration appears twice in the ordered sums
    assert p2 % 2 == 0 and q2 % 2 == 0
    return p2 // 2, q2 // 2


def good_pair_count(f: Family, g: Family) -> int:
    """Ordered pairs (x, y) in f x g with x - y, y - x nonempty and x | y != [n]."""
    if f.ground != g.ground:
        raise DomainError("families live on different ground sets")
    return kernels.good_pair_count(f.array, g.array, f.ground.full)


def _membership_tables(ft: FamilyTuple) -> np.ndarray:
    tables = np.zeros((ft.k, 1 << ft.n), dtype=np.uint8)
    for i, fam in enumerate(ft):
        if len(fam):
            tables[i, fam.array.astype(np.int64)] = 1
    return tables


def pq_numerator(ft: FamilyTuple) -> int:
    """Sum of good-pair counts weighted so that E(P + Q) = 3 * this / p(n)."""
    fams = list(ft)
    inter = {(j, l): fams[j].intersection(fams[l]) for j, l in ((1, 2), (0, 2), (0, 1))}
    total = 0
    for i, j in itertools.permutations(range(3), 2):
        total += good_pair_count(fams[i], fams[j])
    for i, (j, l) in zip(range(3), ((1, 2), (0, 2), (0, 1))):
        total += 2 * good_pair_count(fams[i], inter[(j, l)])
    return total


def exact_pq_expectation(ft: FamilyTuple, check_bound: bool = True,
                         enumerate_limit: int = ENUM_LIMIT_PQ) -> ExpectationReport:
    """Exact E(P + Q) over a uniform four-part partition.

    Evaluated through good-pair counts; for n <= ``enumerate_limit`` it is
    also averaged over every partition and the two must agree.  With
    ``check_bound``, a sunflower-free tuple with no set common to all three
    families must give a value of at most 6.
    """
    if ft.k != 3:
        raise DomainError(f"four-part model needs k = 3, got {ft.k}")
    p = count_four_partitions(ft.n, check=False)
    if p == 0:
        raise DomainError(f"no admissible four-part partitions of [{ft.n}]")
    value = Fraction(3 * pq_numerator(ft), p)
    enumerated = None
    if ft.n <= enumerate_limit:
        total, count = kernels.pq_enumeration_total(_membership_tables(ft), ft.n)
        enumerated = Fraction(total, count)
        if count != p or enumerated != value:
            raise InconsistencyError(f"good-pair formula {value} != enumeration {enumerated}")
    checked = False
    if check_bound and len(ft.common()) == 0 and find_multicolor_sunflower(ft) is None:
        checked = True
        if value > PQ_BOUND:
            raise VerificationError(f"E(P+Q) = {value} exceeds {PQ_BOUND}", ft)
    return ExpectationReport(exact_value=value, enumerated_value=enumerated,
                             bound_checked=checked)


MC_CHUNK = 4096


def _mc_chunk(tables, n, size, seed):
    """Sum and sum of squares of P + Q over ``size`` rejection samples."""
    rng = np.random.default_rng(seed)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    got = []
    need = size
    while need > 0:
        labels = rng.integers(0, 4, size=(max(need * 2, 64), n))
        parts = [((labels == p) * weights).sum(axis=1) for p in range(4)]
        keep = (parts[1] != 0) & (parts[2] != 0) & (parts[3] != 0)
        kept = [x[keep][:need] for x in parts]
        got.append(kept)
        need -= len(kept[0])
    x1, x2, x3, x4 = (np.concatenate([g[p] for g in got]) for p in range(4))
    slots = [x1 | x2, x1 | x3, x1 | x4]
    adj = np.stack([np.stack([tables[i][y] for y in slots], axis=1) for i in range(3)], axis=1)
    m2, t = pq_from_adjacency(adj)
    h = m2 + t
    return int(h.sum()), int((h * h).sum())


def mc_pq_expectation(ft: FamilyTuple, samples: int, seed: int, threads: int = 1,
                      with_exact: bool = False) -> ExpectationReport:
    """Monte Carlo estimate of E(P + Q).

    Samples are drawn in fixed chunks of 4096; chunk c uses seed + c, so
    the estimate depends only on (samples, seed), never on ``threads``.
    """
    if samples <= 0:
        raise UsageError("samples must be positive")
    if seed < 0:
        raise UsageError("seed must be non-negative")
    if ft.k != 3:
        raise DomainError(f"four-part model needs k = 3, got {ft.k}")
    if count_four_partitions(ft.n, check=False) == 0:
        raise DomainError(f"no admissible four-part partitions of [{ft.n}]")
    tables = _membership_tables(ft).astype(bool)
    jobs = []
    for c, lo in enumerate(range(0, samples, MC_CHUNK)):
        jobs.append((tables, ft.n, min(MC_CHUNK, samples - lo), seed + c))
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_mc_chunk, *zip(*jobs)))
    else:
        parts = [_mc_chunk(*job) for job in jobs]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / samples
    if samples > 1:
        var = Fraction(s2 * samples - s1 * s1, samples * (samples - 1))
        stderr = math.sqrt(var / samples)
    else:
        stderr = 0.0
    exact = exact_pq_expectation(ft, check_bound=False).exact_value if with_exact else None
    return ExpectationReport(exact_value=exact, mc_estimate=mean, mc_stderr=stderr,
                             sample_count=samples, seed=seed)
