"""Set families over [n] as bitmasks, sunflower detection, closed-form bounds.

A subset S of [n] = {1..n} is an int whose bit i-1 is set iff i is in S.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, UsageError

MAX_N = 64
MAX_ENUM_N = 24
MAX_K = 16


# ---------------------------------------------------------------------------
# masks


def mask_of(elements: Iterable[int]) -> int:
    """Bitmask of a collection of 1-based elements."""
    m = 0
    for x in elements:
        if x < 1:
            raise UsageError(f"element {x} is not a positive integer")
        m |= 1 << (x - 1)
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return mask.bit_count()


def full_mask(n: int) -> int:
    return (1 << n) - 1


def all_subsets(n: int) -> range:
    return range(1 << n)


def subsets_of_size(n: int, s: int) -> list[int]:
    """All s-subsets of [n] in increasing mask order."""
    return sorted(mask_of(c) for c in itertools.combinations(range(1, n + 1), s))


def format_mask(mask: int) -> str:
    return "{" + ",".join(map(str, elements_of(mask))) + "}"


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class GroundSet:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or not 1 <= self.n <= MAX_N:
            raise DomainError(f"ground set size must be in 1..{MAX_N}, got {self.n!r}")

    @property
    def full(self) -> int:
        return full_mask(self.n)

    def require_enumerable(self):
        if self.n > MAX_ENUM_N:
            raise DomainError(f"n={self.n} exceeds the enumeration limit {MAX_ENUM_N}")


@dataclass(frozen=True)
class Family:
    ground: GroundSet
    members: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.members, frozenset):
            object.__setattr__(self, "members", frozenset(self.members))
        limit = 1 << self.ground.n
        for m in self.members:
            if not 0 <= m < limit:
                raise DomainError(f"mask {m:#x} does not fit in [{self.ground.n}]")

    @classmethod
    def of(cls, n: int, sets: Iterable[Iterable[int]]) -> Family:
        """Build from element collections, e.g. ``Family.of(3, [{1, 2}, ()])``."""
        return cls(GroundSet(n), frozenset(mask_of(s) for s in sets))

    @classmethod
    def from_masks(cls, n: int, masks: Iterable[int]) -> Family:
        return cls(GroundSet(n), frozenset(masks))

    def __len__(self):
        return len(self.members)

    def __contains__(self, mask):
        return mask in self.members

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def intersection(self, other: Family) -> Family:
        return Family(self.ground, self.members & other.members)

    def difference(self, other: Family) -> Family:
        return Family(self.ground, self.members - other.members)

    def without(self, mask: int) -> Family:
        return Family(self.ground, self.members - {mask})

    def is_uniform(self, s: int) -> bool:
        return all(popcount(m) == s for m in self.members)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.sorted(), dtype=np.uint64)


@dataclass(frozen=True)
class FamilyTuple:
    families: tuple[Family, ...]

    def __post_init__(self):
        fams = tuple(self.families)
        object.__setattr__(self, "families", fams)
        if not 2 <= len(fams) <= MAX_K:
            raise DomainError(f"need 2..{MAX_K} families, got {len(fams)}")
        grounds = {f.ground for f in fams}
        if len(grounds) != 1:
            raise DomainError("families do not share a ground set")

    @classmethod
    def from_masks(cls, n: int, families: Sequence[Iterable[int]]) -> FamilyTuple:
        return cls(tuple(Family.from_masks(n, f) for f in families))

    @property
    def k(self) -> int:
        return len(self.families)

    @property
    def ground(self) -> GroundSet:
        return self.families[0].ground

    @property
    def n(self) -> int:
        return self.ground.n

    @property
    def sizes(self) -> list[int]:
        return [len(f) for f in self.families]

    def __getitem__(self, i):
        return self.families[i]

    def __iter__(self):
        return iter(self.families)

    def __len__(self):
        return len(self.families)

    def permuted(self, order: Sequence[int]) -> FamilyTuple:
        """Tuple whose i-th family is ``self[order[i]]``."""
        return FamilyTuple(tuple(self.families[j] for j in order))

    def common(self) -> Family:
        """Sets lying in every family."""
        members = self.families[0].members
        for f in self.families[1:]:
            members = members & f.members
        return Family(self.ground, members)

    def replace(self, i: int, family: Family) -> FamilyTuple:
        fams = list(self.families)
        fams[i] = family
        return FamilyTuple(tuple(fams))


@dataclass(frozen=True)
class SunflowerWitness:
    """A core plus one set per participating family.

    ``family_indices`` records which families the sets came from; for a full
    multicolor sunflower it is ``(0, 1, ..., k-1)``.
    """

    core: int
    petalsets: tuple[int, ...]
    family_indices: tuple[int, ...]

    def is_valid(self) -> bool:
        if len(self.petalsets) < 2 or len(self.petalsets) != len(self.family_indices):
            return False
        return pairwise_core(list(self.petalsets)) == self.core and all(
            p & ~self.core for p in self.petalsets
        )

    def describe(self) -> str:
        sets = ", ".join(f"A{i + 1}={format_mask(p)}"
                         for i, p in zip(self.family_indices, self.petalsets))
        return f"core={format_mask(self.core)}; {sets}"


# ---------------------------------------------------------------------------
# detection


def pairwise_core(sets: Sequence[int]) -> int | None:
    """Common pairwise intersection of ``sets``, or None if they differ."""
    if len(sets) < 2:
        raise UsageError("pairwise_core needs at least two sets")
    core = sets[0] & sets[1]
    for a, b in itertools.combinations(sets, 2):
        if a & b != core:
            return None
    return core


def is_multicolor_sunflower(sets: Sequence[int]) -> bool:
    core = pairwise_core(sets)
    return core is not None and all(s != core for s in sets)


def _kernel_search(families: Sequence[Family], core_size: int):
    """Run the compiled/numpy detector; returns indices into each family."""
    # smallest families first keeps the outer loops short
    order = sorted(range(len(families)), key=lambda i: len(families[i]))
    arrays = [families[i].array for i in order]
    offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(a) for a in arrays])
    members = np.concatenate(arrays) if offsets[-1] else np.zeros(0, dtype=np.uint64)
    hit = kernels.find_sunflower(members, offsets, core_size)
    if hit is None:
        return None
    chosen = [0] * len(families)
    for pos, fam_idx in enumerate(order):
        chosen[fam_idx] = int(members[hit[pos]])
    return chosen


def find_multicolor_sunflower(ft: FamilyTuple) -> SunflowerWitness | None:
    """A multicolor sunflower with one set from each family, or None."""
    if any(len(f) == 0 for f in ft):
        return None
    for f in ft:
        f.ground.require_enumerable()
    chosen = _kernel_search(ft.families, -1)
    if chosen is None:
        return None
    return SunflowerWitness(pairwise_core(chosen), tuple(chosen), tuple(range(ft.k)))


def find_uniform_sunflower(ft: FamilyTuple, t: int, c: int) -> SunflowerWitness | None:
    """A t-petal sunflower with core size c using t distinct families.

    Families are tried in increasing index combinations; within the chosen
    families the sets are listed in family order.  ``t = 1`` never yields a
    sunflower.
    """
    if not 1 <= t <= ft.k:
        raise DomainError(f"need 1 <= t <= k={ft.k}, got t={t}")
    if c < 0:
        raise DomainError(f"core size must be >= 0, got {c}")
    if t == 1:
        return None
    for combo in itertools.combinations(range(ft.k), t):
        fams = [ft[i] for i in combo]
        if any(len(f) == 0 for f in fams):
            continue
        chosen = _kernel_search(fams, c)
        if chosen is not None:
            return SunflowerWitness(pairwise_core(chosen), tuple(chosen), combo)
    return None


def is_sunflower_free(ft: FamilyTuple) -> bool:
    return find_multicolor_sunflower(ft) is None


# ---------------------------------------------------------------------------
# closed-form bounds


def s_formula(n: int, k: int) -> int:
    """Maximum total size of k sunflower-free families over [n]."""
    if not (k >= 3 and n >= k):
        raise DomainError(f"formula needs n >= k >= 3, got n={n}, k={k}")
    return (k - 1) * 2**n + 1 + sum(comb(n, s) for s in range(n - k + 2, n + 1))


def uniform_bound(n: int, s: int, c: int, t: int, k: int) -> int | Fraction:
    """Upper bound on the total size of k s-uniform families with no
    t-petal core-c multicolor sunflower.

    Returns an int when the bound is integral, else an exact Fraction.
    """
    if s < 1 or not 1 <= t <= k or not 0 <= c <= s - 1:
        raise DomainError(f"invalid parameters s={s}, c={c}, t={t}, k={k}")
    if n < c + t * (s - c):
        raise DomainError(f"need n >= c + t(s - c) = {c + t * (s - c)}, got n={n}")
    if n >= c + k * (s - c):
        value = Fraction((t - 1) * comb(n, s))
    else:
        m = (n - c) // (s - c)
        value = Fraction((t - 1) * k * comb(n, s), m)
    return int(value) if value.denominator == 1 else value


def level_bound(n: int, s: int, k: int) -> int:
    """Bound on the size-s layer of a sunflower-free k-tuple over [n]."""
    if 1 <= s <= n - k + 1:
        c = max(0, -((n - k * s) // (k - 1)))  # ceil((k*s - n) / (k - 1))
        return int(uniform_bound(n, s, c, k, k))
    return k * comb(n, s)


def amgm_factor(k: int) -> Fraction:
    if k < 3:
        raise DomainError(f"k must be >= 3, got {k}")
    return Fraction(k - 1, k) ** k


def amgm_product_bound(n: int, k: int) -> Fraction:
    """Leading-order product bound ((k-1)/k)^k * 2^(kn)."""
    return amgm_factor(k) * 2 ** (k * n)


# ---------------------------------------------------------------------------
# family file format


def _parse_set(line: str, n: int, lineno: int) -> int:
    if line.lower().startswith("0x"):
        try:
            m = int(line, 16)
        except ValueError:
            raise UsageError(f"line {lineno}: bad hex mask {line!r}") from None
        if m >> n:
            raise UsageError(f"line {lineno}: mask {line} exceeds n={n}")
        return m
    try:
        elems = [int(tok) for tok in line.split(",")]
    except ValueError:
        raise UsageError(f"line {lineno}: expected comma-separated integers, got {line!r}") from None
    for x in elems:
        if not 1 <= x <= n:
            raise UsageError(f"line {lineno}: element {x} outside 1..{n}")
    return mask_of(elems)


def parse_families(text: str) -> FamilyTuple | Family:
    """Parse the shared family file format.

    First non-comment line is ``n=<int>``.  Each following line is one set:
    comma-separated 1-based elements, a ``0x`` hex mask, or an empty line
    for the empty set.  A line ``---`` starts the next family; ``#`` lines
    are comments.  A file with a single family returns a Family.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    n = None
    groups: list[list[int]] = [[]]
    seen: list[set[int]] = [set()]
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise UsageError(f"line {lineno}: expected header 'n=<int>', got {raw!r}")
            try:
                n = int(line[2:])
                GroundSet(n)
            except (ValueError, DomainError):
                raise UsageError(f"line {lineno}: bad ground set size {line[2:]!r}") from None
            continue
        if line == "---":
            groups.append([])
            seen.append(set())
            continue
        m = 0 if line == "" else _parse_set(line, n, lineno)
        if m in seen[-1]:
            raise UsageError(f"line {lineno}: duplicate set {format_mask(m)}")
        seen[-1].add(m)
        groups[-1].append(m)
    if n is None:
        raise UsageError("line 1: missing header 'n=<int>'")
    fams = tuple(Family.from_masks(n, g) for g in groups)
    if len(fams) == 1:
        return fams[0]
    return FamilyTuple(fams)


def format_families(obj: FamilyTuple | Family, hex_masks: bool = False) -> str:
    fams = [obj] if isinstance(obj, Family) else list(obj.families)
    out = [f"n={fams[0].ground.n}"]
    for i, fam in enumerate(fams):
        if i:
            out.append("---")
        for m in fam.sorted():
            if hex_masks:
                out.append(hex(m))
            else:
                out.append(",".join(map(str, elements_of(m))))
    return "\n".join(out) + "\n"


def read_families(path) -> FamilyTuple | Family:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_families(text)


def write_families(path, obj: FamilyTuple | Family, hex_masks: bool = False):
    with open(path, "w") as fh:
        fh.write(format_families(obj, hex_masks))
