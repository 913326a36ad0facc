"""Exact alpha_k by sandwiching.

Every k-support K gets a cheap upper bound on alpha_{k,K} from the l-subset
scores.  Supports are visited in descending order of that bound while the
best exact value seen so far (the global lower bound) climbs; the run stops
as soon as the next cheap bound cannot beat it.  A second, LP-based bound
filters supports before paying for the exact 2**(k-1)-LP evaluation.
"""
from dataclasses import dataclass, field
from math import comb
import time

import numpy as np

from .bounds import (
    AlphaValue,
    BoundMethod,
    ScoreTable,
    beta_subset,
    pick_l_bound,
    pick_l_optimized_bound,
    pick_one_bound,
    score_all_subsets,
)
from .errors import ArgumentError, DimensionError
from .linalg import as_matrix
from .lp import FEAS_TOL, LpProblem, LpStatus, solve_lp
from .subsets import MATERIALIZATION_LIMIT, all_subsets, rank_subsets, support_sums

CMP_TOL = 1e-9

EXACT = "Exact"


def alpha_exact_on_set(H, K, feas_tol=FEAS_TOL, use_numba=None):
    """alpha_{k,K}: the worst-case l1 fraction a null-space vector can put on K."""
    return beta_subset(H, K, feas_tol=feas_tol, use_numba=use_numba)


def _as_table(scores, n=None):
    if isinstance(scores, ScoreTable):
        return scores
    if n is None:
        raise ArgumentError("n is required for a plain score list")
    return ScoreTable.from_scores(scores, n)


def _check_support(K, k, l, n):
    K = tuple(sorted(int(i) for i in K))
    if len(K) != k or len(set(K)) != k:
        raise ArgumentError(f"support {K} does not have {k} distinct indices")
    if not 1 <= l <= k:
        raise ArgumentError(f"need 1 <= l <= k, got l={l}, k={k}")
    if n is not None and (K[0] < 0 or K[-1] >= n):
        raise ArgumentError(f"support {K} out of range for n={n}")
    return K


def cheap_upper_bound(scores, K, k, l, n=None):
    """Sum of alpha over the l-subsets of K, divided by C(k-1, l-1)."""
    table = _as_table(scores, n)
    if table.l != l:
        raise ArgumentError(f"scores are for l={table.l}, expected l={l}")
    K = _check_support(K, k, l, table.n)
    return float(_scores_on(table, K, l).sum()) / comb(k - 1, l - 1)


def _scores_on(scores, K, l):
    """alpha of every l-subset of K, in lexicographic order of the subsets."""
    inner = np.array(K, dtype=np.int64)[all_subsets(len(K), l)]
    if isinstance(scores, ScoreTable):
        return scores.alpha[rank_subsets(inner, scores.n)]
    lookup = {tuple(s.L): s.score.alpha for s in scores}
    try:
        return np.array([lookup[tuple(int(i) for i in L)] for L in inner])
    except KeyError as exc:
        raise ArgumentError(f"missing score for subset {exc.args[0]}") from None


def lp_upper_bound(scores, K, k, l, feas_tol=FEAS_TOL, use_numba=None):
    """max sum(z) over z >= 0 with sum(z[L]) <= alpha_L for every l-subset L of K.

    ``scores`` may be a full ScoreTable or any iterable of SubsetScore that
    covers the l-subsets of K.
    """
    K = _check_support(K, k, l, scores.n if isinstance(scores, ScoreTable) else None)
    alpha = _scores_on(scores, K, l)
    positions = all_subsets(k, l)
    G = np.zeros((len(positions), k))
    G[np.arange(len(positions))[:, None], positions] = 1.0
    out = solve_lp(LpProblem(np.ones(k), G, alpha, np.ones(k, dtype=bool)), feas_tol=feas_tol, use_numba=use_numba)
    if out.status is not LpStatus.OPTIMAL:
        raise ArgumentError(f"support LP returned {out.status.value}")
    return out.value


@dataclass(frozen=True)
class TraceRow:
    step: int
    K: tuple
    cub: float
    lpub: float
    exact_alpha: float
    gub: float
    glb: float


@dataclass
class SandwichTrace:
    rows: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass
class VerificationReport:
    n: int
    m: int
    k: int
    alpha: float
    method: str
    steps_examined: int = 0
    max_certified_k: int = None
    l: int = None
    best_set: tuple = None
    wall_seconds: float = 0.0

    @property
    def rho(self):
        return (self.n - self.m) / self.n

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "l": self.l,
            "rho": self.rho,
            "alpha": self.alpha,
            "method": self.method,
            "steps_examined": self.steps_examined,
            "max_certified_k": self.max_certified_k,
            "best_set": list(self.best_set) if self.best_set is not None else None,
            "wall_seconds": self.wall_seconds,
        }


@dataclass
class SandwichResult:
    alpha: AlphaValue
    best_set: tuple
    trace: SandwichTrace
    report: VerificationReport


def cheap_bounds_all(table, k, limit=MATERIALIZATION_LIMIT, use_numba=None):
    """All k-supports (lexicographic) with their cheap upper bounds."""
    supports = all_subsets(table.n, k, limit)
    cubs = support_sums(supports, table.alpha, table.n, table.l, use_numba) / comb(k - 1, table.l - 1)
    return supports, cubs


def sandwich_sorted(H, supports, cubs, table, k, trace_sink=None, feas_tol=FEAS_TOL, cmp_tol=CMP_TOL, use_numba=None):
    """Run the pruning loop over supports already sorted by descending cheap bound.

    Returns ``(alpha_value, best_set, trace, steps_examined)``.
    """
    if len(cubs) > 1 and np.any(np.diff(cubs) > 0):
        raise ArgumentError("supports must be sorted by descending cheap bound")
    trace = SandwichTrace()

    def emit(row):
        trace.rows.append(row)
        if trace_sink is not None:
            trace_sink(row)

    glb = 0.0
    best_value, best_set = AlphaValue(0.0, beta=0.0), None
    steps = 0
    for K, cub in zip(supports, cubs):
        steps += 1
        K = tuple(int(i) for i in K)
        cub = float(cub)
        if glb + cmp_tol >= cub:
            emit(TraceRow(steps, K, cub, None, None, glb, glb))
            break
        gub = cub
        lpub = lp_upper_bound(table, K, k, table.l, feas_tol, use_numba)
        exact = None
        if glb + cmp_tol < lpub:
            value = alpha_exact_on_set(H, K, feas_tol, use_numba)
            exact = value.alpha
            if exact > glb:
                glb = exact
                best_value, best_set = value, K
        emit(TraceRow(steps, K, cub, lpub, exact, gub, glb))
    else:
        emit(TraceRow(steps + 1, (), None, None, None, glb, glb))
    return best_value, best_set, trace, steps


def sandwich(H, k, l, trace_sink=None, scores=None, feas_tol=FEAS_TOL, cmp_tol=CMP_TOL,
             limit=MATERIALIZATION_LIMIT, threads=None, use_numba=None):
    """Exact alpha_k certified by matching global upper and lower bounds."""
    start = time.perf_counter()
    H = as_matrix(H, "H")
    n, m = H.shape
    if not 1 <= l <= k < n:
        raise DimensionError(f"need 1 <= l <= k < n, got l={l}, k={k}, n={n}")
    table = scores if scores is not None else score_all_subsets(H, l, feas_tol, threads, limit, use_numba)
    if table.l != l or table.n != n:
        raise ArgumentError(f"score table (n={table.n}, l={table.l}) does not match (n={n}, l={l})")
    supports, cubs = cheap_bounds_all(table, k, limit, use_numba)
    order = np.argsort(-cubs, kind="stable")
    value, best_set, trace, steps = sandwich_sorted(
        H, supports[order], cubs[order], table, k, trace_sink, feas_tol, cmp_tol, use_numba
    )
    report = VerificationReport(
        n=n, m=m, k=k, l=l, alpha=value.alpha, method=EXACT, steps_examined=steps,
        max_certified_k=k if value.alpha < 0.5 else None, best_set=best_set,
        wall_seconds=time.perf_counter() - start,
    )
    return SandwichResult(value, best_set, trace, report)


def find_max_certified_k(H, k_max, l, mode=EXACT, feas_tol=FEAS_TOL, cmp_tol=CMP_TOL,
                         limit=MATERIALIZATION_LIMIT, threads=None, score_source=None, use_numba=None):
    """Per-k reports for k = 1..k_max and the largest k whose value is below 1/2.

    ``mode`` is ``"Exact"`` or a BoundMethod.  For k < l the subset size drops
    to k.  ``score_source(l)`` may supply cached score tables.
    """
    H = as_matrix(H, "H")
    n, m = H.shape
    if not 1 <= k_max < n:
        raise DimensionError(f"need 1 <= k_max < n, got {k_max}")
    if mode != EXACT:
        mode = BoundMethod(mode)
    tables = {}

    def scores_for(size):
        if size not in tables:
            if score_source is not None:
                tables[size] = score_source(size)
            else:
                tables[size] = score_all_subsets(H, size, feas_tol, threads, limit, use_numba)
        return tables[size]

    reports = []
    for k in range(1, k_max + 1):
        start = time.perf_counter()
        size = 1 if mode is BoundMethod.PICK1 else min(l, k)
        table = scores_for(size)
        if mode == EXACT:
            res = sandwich(H, k, size, scores=table, feas_tol=feas_tol, cmp_tol=cmp_tol,
                           limit=limit, use_numba=use_numba)
            rep = res.report
        else:
            if mode is BoundMethod.PICK1:
                b = pick_one_bound(table, k)
            elif mode is BoundMethod.PICKL:
                b = pick_l_bound(table, k, size)
            else:
                b = pick_l_optimized_bound(table, k, size, feas_tol=feas_tol, use_numba=use_numba)
            rep = VerificationReport(n=n, m=m, k=k, l=size, alpha=b.bound, method=b.method.value)
        rep.wall_seconds = time.perf_counter() - start
        reports.append(rep)
    certified = [r.k for r in reports if r.alpha < 0.5]
    # alpha_k is nondecreasing in k, so the certified set is a prefix for exact values
    best = max(certified) if certified else None
    for r in reports:
        r.max_certified_k = best
    return reports
