"""Brute-force alpha_k: evaluate every k-support, no pruning."""
from math import comb

from .bounds import parallel_map
from .errors import CapacityError, DimensionError
from .exact import alpha_exact_on_set
from .linalg import as_matrix
from .lp import FEAS_TOL
from .subsets import all_subsets

ORACLE_LIMIT = 10**5


def exhaustive_alpha(H, k, feas_tol=FEAS_TOL, limit=ORACLE_LIMIT, threads=None, use_numba=None):
    """Max of alpha_{k,K} over all k-supports; returns ``(AlphaValue, K)``.

    Ties resolve to the lexicographically smallest support.
    """
    H = as_matrix(H, "H")
    n = H.shape[0]
    if not 1 <= k < n:
        raise DimensionError(f"need 1 <= k < n, got k={k}, n={n}")
    if comb(n, k) > limit:
        raise CapacityError(f"C({n},{k}) = {comb(n, k)} exceeds oracle limit {limit}")
    supports = all_subsets(n, k)
    values = parallel_map(lambda K: alpha_exact_on_set(H, K, feas_tol, use_numba), supports, threads)
    best = 0
    for i, v in enumerate(values):
        if v.alpha > values[best].alpha:
            best = i
    return values[best], tuple(int(i) for i in supports[best])
