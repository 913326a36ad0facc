"""Dense two-phase simplex for small linear programs.

Every LP in this package is posed as

    maximize    c @ v
    subject to  G @ v <= h,   v[j] >= 0 where nonneg_mask[j]

Free variables are split into a difference of two nonnegative columns.  The
pivot loop prices with Dantzig's rule and drops to Bland's rule (lowest-index
entering column, lowest-index leaving basic variable among ratio ties) on
degenerate stretches, so it cannot cycle and the result is a deterministic
function of the input arrays.  The tableau is rebuilt from the original data
every few dozen pivots and again before any verdict is accepted.
"""
from dataclasses import dataclass
import enum

import numpy as np

from ._accel import ENABLE_NUMBA, njit
from .errors import DimensionError, NumericalBreakdown

FEAS_TOL = 1e-9
# consecutive degenerate pivots before switching to Bland's rule
BLAND_AFTER = 20
# relative size of the anti-degeneracy shift of the right-hand side
PERTURB = 1e-6
# smallest usable pivot element
PIVOT_TOL = 1e-7
# infeasibility a rebuilt basis may show before it is rejected; smaller is clipped
DRIFT_TOL = 1e-6
# pivots between tableau rebuilds (at least the row count)
REINVERT_EVERY = 50

# kernel return codes
_OPTIMAL, _UNBOUNDED, _PAUSED = 0, 1, 2


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class LpProblem:
    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    nonneg_mask: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        h = np.asarray(self.rhs, dtype=float).reshape(-1)
        G = np.asarray(self.constraint_matrix, dtype=float)
        if G.size == 0:
            G = G.reshape(len(h), len(c))
        mask = np.asarray(self.nonneg_mask, dtype=bool).reshape(-1)
        if G.ndim != 2 or G.shape != (len(h), len(c)) or len(mask) != len(c):
            raise DimensionError(
                f"LP dimensions do not conform: c={len(c)}, G={G.shape}, h={len(h)}, mask={len(mask)}"
            )
        if not (np.isfinite(c).all() and np.isfinite(G).all() and np.isfinite(h).all()):
            raise DimensionError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", G)
        object.__setattr__(self, "rhs", h)
        object.__setattr__(self, "nonneg_mask", mask)

    @property
    def num_vars(self):
        return len(self.objective)

    @property
    def num_constraints(self):
        return len(self.rhs)


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    value: float = None
    point: np.ndarray = None
    iterations: int = 0

    @property
    def is_optimal(self):
        return self.status is LpStatus.OPTIMAL


def _pivot_loop_loops(T, basis, n_enter, tol, piv_tol, max_iter, bland_after, stalled):
    nrow = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    while True:
        bland = stalled >= bland_after
        col = -1
        most = -tol
        for j in range(n_enter):
            d = T[nrow, j]
            if d < -tol:
                if bland:
                    col = j
                    break
                if d < most:
                    most = d
                    col = j
        if col < 0:
            return _OPTIMAL, it, stalled
        if it >= max_iter:
            return _PAUSED, it, stalled
        # Harris pass: smallest ratio with every RHS relaxed by tol
        bound = np.inf
        for i in range(nrow):
            a = T[i, col]
            if a > piv_tol:
                r = (T[i, rhs] + tol) / a
                if r < bound:
                    bound = r
        if bound == np.inf:
            return _UNBOUNDED, it, stalled
        row = -1
        best = np.inf
        if bland:
            for i in range(nrow):
                a = T[i, col]
                if a > piv_tol and T[i, rhs] / a < best:
                    best = T[i, rhs] / a
            for i in range(nrow):
                a = T[i, col]
                if a > piv_tol and T[i, rhs] / a <= best + tol:
                    if row < 0 or basis[i] < basis[row]:
                        row = i
        else:
            # largest pivot whose ratio fits under the relaxed bound
            for i in range(nrow):
                a = T[i, col]
                if a > piv_tol and T[i, rhs] / a <= bound:
                    if row < 0 or a > T[row, col] or (a == T[row, col] and basis[i] < basis[row]):
                        row = i
            best = T[row, rhs] / T[row, col]
        if best <= tol:
            stalled += 1
        else:
            stalled = 0
        if T[row, rhs] < 0.0:
            T[row, rhs] = 0.0
        piv = T[row, col]
        for j in range(rhs + 1):
            T[row, j] /= piv
        for i in range(nrow + 1):
            if i != row:
                f = T[i, col]
                if f != 0.0:
                    for j in range(rhs + 1):
                        T[i, j] -= f * T[row, j]
        basis[row] = col
        it += 1


def _pivot_loop_numpy(T, basis, n_enter, tol, piv_tol, max_iter, bland_after, stalled):
    nrow = T.shape[0] - 1
    it = 0
    while True:
        bland = stalled >= bland_after
        reduced = T[nrow, :n_enter]
        neg = np.flatnonzero(reduced < -tol)
        if neg.size == 0:
            return _OPTIMAL, it, stalled
        if it >= max_iter:
            return _PAUSED, it, stalled
        col = neg[0] if bland else neg[np.argmin(reduced[neg])]
        a = T[:nrow, col]
        ok = a > piv_tol
        if not ok.any():
            return _UNBOUNDED, it, stalled
        ratios = np.full(nrow, np.inf)
        ratios[ok] = T[:nrow, -1][ok] / a[ok]
        if bland:
            best = ratios.min()
            tied = np.flatnonzero(ratios <= best + tol)
            row = tied[np.argmin(basis[tied])]
        else:
            # Harris pass: largest pivot whose ratio fits under the relaxed bound
            bound = ((T[:nrow, -1][ok] + tol) / a[ok]).min()
            fits = np.flatnonzero(ratios <= bound)
            row = fits[np.lexsort((basis[fits], -a[fits]))[0]]
            best = ratios[row]
        stalled = stalled + 1 if best <= tol else 0
        # a Harris step never moves backwards
        T[row, -1] = max(T[row, -1], 0.0)
        T[row] /= T[row, col]
        f = T[:, col].copy()
        f[row] = 0.0
        nz = np.flatnonzero(f)
        T[nz] -= np.outer(f[nz], T[row])
        basis[row] = col
        it += 1


_pivot_loop_jit = njit(_pivot_loop_loops)


def pivot_loop(T, basis, n_enter, tol, max_iter, use_numba=None, bland_after=BLAND_AFTER, stalled=0,
               piv_tol=PIVOT_TOL):
    """Run up to ``max_iter`` simplex pivots in place on tableau ``T``.

    The last row of ``T`` holds reduced costs (negative entries may enter) and
    the last column holds the right-hand side.  Entering columns are priced by
    most negative reduced cost until ``bland_after`` consecutive degenerate
    pivots, then by lowest index until a pivot makes progress again.  Returns
    ``(code, pivots, stalled)``; pass ``stalled`` back in to resume.  Column
    entries at or below ``piv_tol`` never serve as pivots.
    """
    if use_numba is None:
        use_numba = ENABLE_NUMBA
    loop = _pivot_loop_jit if use_numba else _pivot_loop_numpy
    code, it, stalled = loop(T, basis, n_enter, tol, piv_tol, max_iter, bland_after, stalled)
    return int(code), int(it), int(stalled)


class _Tableau:
    """A simplex tableau that remembers the columns it was derived from."""

    def __init__(self, M, b, basis, tol, use_numba):
        self.M = M
        self.b_true = b
        self.b = b.copy()
        self.rows = M.shape[0]
        self.T = np.zeros((M.shape[0] + 1, M.shape[1] + 1))
        self.T[:-1, :-1] = M
        self.T[:-1, -1] = b
        self.basis = basis
        self.cost = np.zeros(M.shape[1])
        self.tol = tol
        self.scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        self.use_numba = use_numba
        self.pivots = 0

    def set_cost(self, cost):
        self.cost = cost
        self._price()

    def _price(self):
        cb = self.cost[self.basis]
        self.T[-1, :-1] = cb @ self.T[:-1, :-1] - self.cost
        self.T[-1, -1] = cb @ self.T[:-1, -1]

    def _pivot(self, row, col):
        T = self.T
        T[row] /= T[row, col]
        f = T[:, col].copy()
        f[row] = 0.0
        T -= np.outer(f, T[row])
        self.basis[row] = col
        self.pivots += 1

    def reinvert(self, clip=True):
        """Rebuild the tableau as B^-1 [M | b]; False leaves it untouched.

        With ``clip`` a basis more than DRIFT_TOL infeasible is rejected and
        smaller negative values are set to zero.
        """
        try:
            body = np.linalg.solve(self.M[:, self.basis], np.column_stack([self.M, self.b]))
        except np.linalg.LinAlgError:
            return False
        if not np.isfinite(body).all():
            return False
        if clip:
            if body[:, -1].min(initial=0.0) < -DRIFT_TOL * self.scale:
                return False
            np.maximum(body[:, -1], 0.0, out=body[:, -1])
        body[:, self.basis] = np.eye(self.rows)
        self.T[:-1] = body
        self._price()
        return True

    def perturb(self):
        """Lift every basic value by a distinct small amount to break degeneracy."""
        eps = PERTURB * self.scale * (1.0 + (np.arange(self.rows) * 0.6180339887498949) % 1.0)
        self.b = self.b_true + self.M[:, self.basis] @ eps
        self.T[:-1, -1] += eps
        self._price()

    def dual_repair(self, n_enter, cap):
        """Dual simplex pivots until the basis is primal feasible again."""
        T = self.T
        floor = -self.tol * self.scale
        while True:
            row = int(np.argmin(T[:-1, -1]))
            if T[row, -1] >= floor:
                np.maximum(T[:-1, -1], 0.0, out=T[:-1, -1])
                self._price()
                return True
            if self.pivots >= cap:
                raise NumericalBreakdown(f"simplex exceeded {cap} pivots")
            a = T[row, :n_enter]
            cand = np.flatnonzero(a < -PIVOT_TOL)
            if cand.size == 0:
                return False
            ratios = np.maximum(T[-1, cand], 0.0) / -a[cand]
            fits = cand[ratios <= ratios.min() + self.tol]
            self._pivot(row, fits[np.argmin(a[fits])])

    def run(self, n_enter, cap):
        """Pivot to a verdict that survives a rebuild from the original data."""
        chunk = max(REINVERT_EVERY, self.rows)
        stalled = 0
        fresh = False
        while True:
            budget = min(chunk, cap - self.pivots)
            code, it, stalled = pivot_loop(self.T, self.basis, n_enter, self.tol, budget,
                                           self.use_numba, stalled=stalled)
            self.pivots += it
            if code != _PAUSED and it == 0 and fresh:
                return code
            if code == _PAUSED and self.pivots >= cap:
                raise NumericalBreakdown(f"simplex exceeded {cap} pivots")
            fresh = self.reinvert()
            if code != _PAUSED and not fresh:
                return code

    def phase(self, cost, n_enter, cap):
        """Optimize ``cost`` on a perturbed copy, then clean up on the true data."""
        self.set_cost(cost)
        self.perturb()
        code = self.run(n_enter, cap)
        if code == _UNBOUNDED:
            return code
        self.b = self.b_true
        if not self.reinvert(clip=False):
            raise NumericalBreakdown("singular basis after removing the perturbation")
        if not self.dual_repair(n_enter, cap):
            raise NumericalBreakdown("basis could not be made feasible after removing the perturbation")
        return self.run(n_enter, cap)


def _standardize(p):
    """Split free columns; returns (A, c, recover) with v = recover @ v_std."""
    free = np.flatnonzero(~p.nonneg_mask)
    G, c = p.constraint_matrix, p.objective
    A = np.hstack([G, -G[:, free]])
    c_std = np.concatenate([c, -c[free]])
    recover = np.zeros((p.num_vars, A.shape[1]))
    recover[np.arange(p.num_vars), np.arange(p.num_vars)] = 1.0
    recover[free, p.num_vars + np.arange(len(free))] = -1.0
    return A, c_std, recover


def solve_lp(p, feas_tol=FEAS_TOL, use_numba=None):
    """Solve ``p`` with a two-phase dense simplex.

    Raises NumericalBreakdown when the pivot count passes
    ``50 * (vars + constraints)`` or an unbounded verdict is not backed by a
    recession ray of the original data.
    """
    A, c, recover = _standardize(p)
    h = p.rhs
    mrows, nstd = A.shape
    cap = 50 * (p.num_vars + p.num_constraints)

    neg_rows = np.flatnonzero(h < 0)
    na = len(neg_rows)
    sign = np.ones(mrows)
    sign[neg_rows] = -1.0
    art_start = nstd + mrows
    ncols = art_start + na

    M = np.zeros((mrows, ncols))
    M[:, :nstd] = A * sign[:, None]
    M[:, nstd:art_start] = np.diag(sign)
    M[neg_rows, art_start + np.arange(na)] = 1.0
    basis = np.arange(nstd, art_start, dtype=np.int64)
    basis[neg_rows] = art_start + np.arange(na)
    tab = _Tableau(M, h * sign, basis, feas_tol, use_numba)

    if na:
        cost = np.zeros(ncols)
        cost[art_start:] = -1.0
        tab.phase(cost, ncols, cap)
        if tab.T[-1, -1] < -feas_tol * tab.scale:
            return LpOutcome(LpStatus.INFEASIBLE, iterations=tab.pivots)
        # drive zero-valued artificials out of the basis where possible
        for i in np.flatnonzero(tab.basis >= art_start):
            row = np.abs(tab.T[i, :art_start])
            if row.max() > PIVOT_TOL:
                tab._pivot(i, int(np.argmax(row)))

    cost = np.zeros(ncols)
    cost[:nstd] = c
    code = tab.phase(cost, art_start, cap)
    if code == _UNBOUNDED:
        if not _verify_ray(tab.T, tab.basis, A, c, art_start, feas_tol):
            raise NumericalBreakdown("unbounded verdict not backed by a ray of the original data")
        return LpOutcome(LpStatus.UNBOUNDED, iterations=tab.pivots)

    v_std = np.zeros(ncols)
    v_std[tab.basis] = np.maximum(tab.T[:-1, -1], 0.0)
    point = recover @ v_std[:nstd]
    value = float(p.objective @ point)
    return LpOutcome(LpStatus.OPTIMAL, value=value, point=point, iterations=tab.pivots)


def _verify_ray(T, basis, A, c, art_start, tol):
    """Check that some improving tableau column is a genuine recession ray."""
    mrows, nstd = A.shape
    reduced = T[mrows, :art_start]
    for j in np.flatnonzero(reduced < -tol):
        if (T[:mrows, j] > tol).any():
            continue
        d = np.zeros(T.shape[1] - 1)
        d[j] = 1.0
        d[basis] -= T[:mrows, j]
        r = d[:nstd]
        size = np.abs(r).max()
        if size == 0.0:
            continue
        r = r / size
        slack = 1e3 * tol * max(1.0, float(np.abs(A).max(initial=0.0)))
        if (A @ r).max(initial=0.0) <= slack and r.min() >= -slack and c @ r > slack:
            return True
    return False
