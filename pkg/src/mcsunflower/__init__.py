"""Multicolor sunflower-free families: bounds, constructions, exhaustive search."""
from .constructions import product_extremal, sum_extremal, tk_matching_extremal, uniform_tight
from .errors import DomainError, InconsistencyError, UsageError, VerificationError
from .kernels import BACKEND
from .search import SearchResult, exhaustive_max_sum, exhaustive_max_sum_uniform
from .setfam import (
    Family,
    FamilyTuple,
    GroundSet,
    SunflowerWitness,
    find_multicolor_sunflower,
    find_uniform_sunflower,
    is_sunflower_free,
    level_bound,
    parse_families,
    read_families,
    s_formula,
    uniform_bound,
    write_families,
)

__version__ = "0.1.0"
