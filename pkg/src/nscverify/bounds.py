"""Per-subset scores and polynomial-time upper bounds on alpha_k.

For an index set L, ``beta_subset`` computes

    beta_L = max ||(Hx)_L||_1   s.t.  ||(Hx)_{not L}||_1 <= 1

and reports ``alpha_L = beta_L / (1 + beta_L)``: the largest fraction of the
l1 mass of a null-space vector that can sit on L.  The bounds combine those
scores over all l-subsets into upper bounds on alpha_k.
"""
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import enum
from math import comb
import os

import numpy as np

from .errors import ArgumentError, CapacityError, DimensionError
from .linalg import as_matrix
from .lp import FEAS_TOL, LpProblem, LpStatus, solve_lp
from .subsets import MATERIALIZATION_LIMIT, all_subsets, check_capacity, rank_subsets

# dense LP tableau entries allowed for the optimized-coefficients program
DENSE_LP_LIMIT = 5 * 10**7


@dataclass(frozen=True)
class AlphaValue:
    alpha: float
    beta_unbounded: bool = False
    beta: float = None

    @classmethod
    def from_beta(cls, beta):
        if beta is None or np.isinf(beta):
            return cls(alpha=1.0, beta_unbounded=True, beta=float("inf"))
        beta = max(float(beta), 0.0)
        return cls(alpha=beta / (1.0 + beta), beta=beta)


@dataclass(frozen=True)
class SubsetScore:
    L: tuple
    score: AlphaValue


class BoundMethod(str, enum.Enum):
    PICK1 = "Pick1"
    PICKL = "PickL"
    PICKL_OPTIMIZED = "PickLOptimized"


@dataclass(frozen=True)
class BoundReport:
    k: int
    l: int
    method: BoundMethod
    bound: float
    nsc_certified: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nsc_certified", bool(self.bound < 0.5))


@dataclass(frozen=True, eq=False)
class ScoreTable(Sequence):
    """All C(n, l) subset scores, stored column-wise, in lexicographic subset order."""

    n: int
    l: int
    subsets: np.ndarray
    alpha: np.ndarray
    unbounded: np.ndarray

    def __len__(self):
        return len(self.alpha)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        beta = float("inf") if self.unbounded[i] else None
        value = AlphaValue(1.0, True, beta) if self.unbounded[i] else AlphaValue(float(self.alpha[i]))
        return SubsetScore(tuple(int(x) for x in self.subsets[i]), value)

    @classmethod
    def from_scores(cls, scores, n):
        """Build a table from SubsetScore items; they must cover every l-subset once."""
        if isinstance(scores, ScoreTable):
            if scores.n != n:
                raise ArgumentError(f"score table is for n={scores.n}, not {n}")
            return scores
        scores = list(scores)
        if not scores:
            raise ArgumentError("empty score list")
        l = len(scores[0].L)
        subsets = np.array([s.L for s in scores], dtype=np.int64).reshape(len(scores), l)
        if len(scores) != comb(n, l) or (subsets.min() < 0 or subsets.max() >= n):
            raise ArgumentError(f"expected {comb(n, l)} scores over range({n}), got {len(scores)}")
        order = rank_subsets(subsets, n)
        if len(np.unique(order)) != len(order):
            raise ArgumentError("duplicate subsets in score list")
        inv = np.argsort(order)
        alpha = np.array([s.score.alpha for s in scores])[inv]
        unb = np.array([s.score.beta_unbounded for s in scores])[inv]
        return cls(n, l, all_subsets(n, l), alpha, unb)

    def descending(self):
        """Indices sorted by alpha descending; ties keep lexicographic subset order."""
        return np.argsort(-self.alpha, kind="stable")


def sign_patterns(size):
    """The 2**(size-1) sign vectors with a leading +1, in binary counting order."""
    count = 1 << (size - 1)
    bits = (np.arange(count)[:, None] >> np.arange(size - 2, -1, -1)[None, :]) & 1
    return np.hstack([np.ones((count, 1)), 1.0 - 2.0 * bits])


def _support_lp(H, L):
    """Constraint block shared by every sign pattern for support L."""
    n, m = H.shape
    mask = np.ones(n, dtype=bool)
    mask[list(L)] = False
    rest = H[mask]
    r = len(rest)
    eye = np.eye(r)
    G = np.zeros((2 * r + 1, m + r))
    G[:r, :m] = rest
    G[:r, m:] = -eye
    G[r:2 * r, :m] = -rest
    G[r:2 * r, m:] = -eye
    G[-1, m:] = 1.0
    h = np.zeros(2 * r + 1)
    h[-1] = 1.0
    nonneg = np.concatenate([np.zeros(m, dtype=bool), np.ones(r, dtype=bool)])
    return G, h, nonneg


def beta_subset(H, L, feas_tol=FEAS_TOL, use_numba=None):
    """Exact ``alpha_{l,L}`` for index set L (an AlphaValue).

    Solves one LP per sign pattern of (Hx)_L with the first sign fixed to +1
    (flipping x flips every sign), over free x and slack masses u_j >= |(Hx)_j|
    off the support.
    """
    H = as_matrix(H, "H")
    n, m = H.shape
    L = tuple(sorted(int(i) for i in L))
    if not L or len(L) >= n or len(set(L)) != len(L) or L[0] < 0 or L[-1] >= n:
        raise DimensionError(f"support {L} invalid for n={n}")
    G, h, nonneg = _support_lp(H, L)
    rows = H[list(L)]
    best = 0.0
    for s in sign_patterns(len(L)):
        c = np.concatenate([s @ rows, np.zeros(G.shape[1] - m)])
        out = solve_lp(LpProblem(c, G, h, nonneg), feas_tol=feas_tol, use_numba=use_numba)
        if out.status is LpStatus.UNBOUNDED:
            return AlphaValue.from_beta(float("inf"))
        # x = 0, u = 0 is always feasible, so Infeasible cannot occur
        best = max(best, out.value)
    return AlphaValue.from_beta(best)


def _default_threads():
    return os.cpu_count() or 1


def parallel_map(fn, items, threads=None):
    """Ordered map; runs on a thread pool when ``threads > 1``."""
    threads = threads or _default_threads()
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def score_all_subsets(H, l, feas_tol=FEAS_TOL, threads=None, limit=MATERIALIZATION_LIMIT, use_numba=None):
    """Score every l-subset of the rows of H; returns a ScoreTable in lexicographic order."""
    H = as_matrix(H, "H")
    n = H.shape[0]
    if not 1 <= l < n:
        raise DimensionError(f"need 1 <= l < n, got l={l}, n={n}")
    subsets = all_subsets(n, l, limit)
    values = parallel_map(lambda L: beta_subset(H, L, feas_tol, use_numba), subsets, threads)
    alpha = np.array([v.alpha for v in values])
    unb = np.array([v.beta_unbounded for v in values], dtype=bool)
    return ScoreTable(n, l, subsets, alpha, unb)


def _complete_table(scores, l, n=None):
    if isinstance(scores, ScoreTable):
        table = scores
    else:
        scores = list(scores)
        if not scores:
            raise ArgumentError("empty score list")
        if n is None:
            raise ArgumentError("n is required for a plain score list")
        table = ScoreTable.from_scores(scores, n)
    if table.l != l:
        raise ArgumentError(f"scores are for l={table.l}, expected l={l}")
    if len(table) != comb(table.n, l):
        raise ArgumentError("score table is incomplete")
    return table


def pick_one_bound(scores, k, n=None):
    """Sum of the k largest single-index scores."""
    table = _complete_table(scores, 1, n)
    if not 1 <= k <= table.n:
        raise ArgumentError(f"need 1 <= k <= n, got k={k}")
    top = table.descending()[:k]
    return BoundReport(k, 1, BoundMethod.PICK1, float(table.alpha[top].sum()))


def pick_l_bound(scores, k, l, n=None):
    """Top C(k, l) scores summed, scaled by 1 / C(k-1, l-1)."""
    if not 1 <= l <= k:
        raise ArgumentError(f"need 1 <= l <= k, got l={l}, k={k}")
    table = _complete_table(scores, l, n)
    if k > table.n:
        raise ArgumentError(f"k={k} exceeds n={table.n}")
    top = table.descending()[: comb(k, l)]
    bound = float(table.alpha[top].sum()) / comb(k - 1, l - 1)
    method = BoundMethod.PICK1 if l == 1 else BoundMethod.PICKL
    return BoundReport(k, l, method, bound)


def optimized_coefficients_lp(table, k):
    """The weight LP over gamma (one weight per l-subset) as an LpProblem."""
    n, l = table.n, table.l
    n_rows = 1 + sum(comb(n, b) for b in range(1, l + 1))
    check_capacity(n_rows, "optimized-coefficient constraints")
    if n_rows * (n_rows + len(table)) > DENSE_LP_LIMIT:
        raise CapacityError(f"dense weight LP would need {n_rows} x {n_rows + len(table)} entries")
    G = np.zeros((n_rows, len(table)))
    h = np.empty(n_rows)
    G[0] = 1.0
    h[0] = k / l
    cols = np.arange(len(table))
    offset = 1
    for b in range(1, l + 1):
        h[offset:offset + comb(n, b)] = comb(k - b, l - b) / comb(k - 1, l - 1)
        for pos in all_subsets(l, b):
            G[offset + rank_subsets(table.subsets[:, pos], n), cols] = 1.0
        offset += comb(n, b)
    return LpProblem(table.alpha.copy(), G, h, np.ones(len(table), dtype=bool))


def pick_l_optimized_bound(scores, k, l, n=None, feas_tol=FEAS_TOL, use_numba=None):
    """Optimal value of the weight LP; never worse than ``pick_l_bound``."""
    if not 1 <= l <= k:
        raise ArgumentError(f"need 1 <= l <= k, got l={l}, k={k}")
    table = _complete_table(scores, l, n)
    if k > table.n:
        raise ArgumentError(f"k={k} exceeds n={table.n}")
    out = solve_lp(optimized_coefficients_lp(table, k), feas_tol=feas_tol, use_numba=use_numba)
    if out.status is not LpStatus.OPTIMAL:
        raise ArgumentError(f"weight LP returned {out.status.value}")
    return BoundReport(k, l, BoundMethod.PICKL_OPTIMIZED, max(out.value, 0.0))
