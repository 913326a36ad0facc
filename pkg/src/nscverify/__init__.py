"""Certify the null space condition for l1 recovery: bounds and exact alpha_k."""
__version__ = "0.1.0"

from .bounds import (
    AlphaValue,
    BoundMethod,
    BoundReport,
    ScoreTable,
    SubsetScore,
    beta_subset,
    pick_l_bound,
    pick_l_optimized_bound,
    pick_one_bound,
    score_all_subsets,
)
from .ensembles import Ensemble, EnsembleSpec, generate
from .errors import ArgumentError, CapacityError, DimensionError, NscError, NumericalBreakdown, RankDeficient
from .exact import (
    SandwichTrace,
    VerificationReport,
    alpha_exact_on_set,
    cheap_upper_bound,
    find_max_certified_k,
    lp_upper_bound,
    sandwich,
)
from .linalg import NullBasis, null_space_basis, validate_basis
from .lp import LpOutcome, LpProblem, LpStatus, solve_lp
from .oracle import exhaustive_alpha
