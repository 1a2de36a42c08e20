"""Extremal sunflower-free constructions with exact size accounting."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod

from .errors import DomainError
from .setfam import (
    MAX_ENUM_N,
    Family,
    FamilyTuple,
    all_subsets,
    popcount,
    subsets_of_size,
)


@dataclass(frozen=True)
class ConstructionReport:
    """Sizes of a construction; ``tuple`` is None when n is too large to list."""

    n: int
    k: int
    sizes: tuple[int, ...]
    claimed_formula: str
    tuple: FamilyTuple | None = None

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def product(self) -> int:
        return prod(self.sizes)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "claimed_formula": self.claimed_formula,
            "n": self.n,
            "k": self.k,
            "sizes": list(self.sizes),
            "total": self.total,
            "product": self.product,
            "materialized": self.tuple is not None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sum_extremal(n: int, k: int) -> ConstructionReport:
    """k-1 copies of the power set plus {empty} and every set of size >= n-k+2."""
    if not (k >= 3 and n >= k):
        raise DomainError(f"sum construction needs n >= k >= 3, got n={n}, k={k}")
    big = sum(comb(n, s) for s in range(n - k + 2, n + 1))
    sizes = (2**n,) * (k - 1) + (1 + big,)
    ft = None
    if n <= MAX_ENUM_N:
        full = Family.from_masks(n, all_subsets(n))
        last = Family.from_masks(n, [0] + [m for m in all_subsets(n) if popcount(m) >= n - k + 2])
        ft = FamilyTuple((full,) * (k - 1) + (last,))
    return ConstructionReport(n, k, sizes, "s_formula", ft)


def product_extremal(n: int, k: int) -> ConstructionReport:
    """Two copies of {1 in S or |S| >= n-1}, one of {1 not in S or |S| >= n-1},
    and k-3 power sets."""
    if n < 3 or k < 3:
        raise DomainError(f"product construction needs n >= 3, k >= 3, got n={n}, k={k}")
    half = 2 ** (n - 1)
    sizes = (half + 1, half + 1, half + n) + (2**n,) * (k - 3)
    ft = None
    if n <= MAX_ENUM_N:
        big = n - 1
        with_one = Family.from_masks(n, [m for m in all_subsets(n) if m & 1 or popcount(m) >= big])
        without_one = Family.from_masks(
            n, [m for m in all_subsets(n) if not m & 1 or popcount(m) >= big])
        full = Family.from_masks(n, all_subsets(n))
        ft = FamilyTuple((with_one, with_one, without_one) + (full,) * (k - 3))
    return ConstructionReport(n, k, sizes, "product_one_eighth", ft)


def tk_matching_extremal(s: int, m: int, k: int) -> ConstructionReport:
    """k copies of all s-subsets of [m*s] avoiding element 1.

    Tight for the first branch of the t-petal bound with c = 0, t = m.
    """
    n = m * s
    if s < 1 or m < 2 or k < m or n > MAX_ENUM_N:
        raise DomainError(f"need s >= 1, 2 <= m <= k and m*s <= {MAX_ENUM_N}; "
                          f"got s={s}, m={m}, k={k}")
    fam = Family.from_masks(n, [x for x in subsets_of_size(n, s) if not x & 1])
    ft = FamilyTuple((fam,) * k)
    report = ConstructionReport(n, k, (comb(n - 1, s),) * k, "uniform_bound_first_branch", ft)
    assert report.total == Fraction((m - 1) * k * comb(n, s), m)
    return report


def uniform_tight(n: int, s: int, k: int) -> ConstructionReport:
    """k-1 copies of all s-subsets of [n] plus one empty family."""
    if k < 3 or not 0 <= s <= n:
        raise DomainError(f"need k >= 3 and 0 <= s <= n, got n={n}, s={s}, k={k}")
    sizes = (comb(n, s),) * (k - 1) + (0,)
    ft = None
    if n <= MAX_ENUM_N:
        layer = Family.from_masks(n, subsets_of_size(n, s))
        ft = FamilyTuple((layer,) * (k - 1) + (Family.from_masks(n, ()),))
    return ConstructionReport(n, k, sizes, "uniform_bound_second_branch", ft)
