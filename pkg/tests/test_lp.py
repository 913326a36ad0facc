from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nscverify import lp
from nscverify.errors import DimensionError, NumericalBreakdown
from nscverify.lp import LpProblem, LpStatus, solve_lp


def test_single_bound():
    out = solve_lp(LpProblem([1.0], [[1.0]], [0.5], [True]))
    assert out.status is LpStatus.OPTIMAL
    assert out.value == pytest.approx(0.5, abs=1e-12)


def test_free_variable_without_constraints_is_unbounded():
    out = solve_lp(LpProblem([1.0], np.zeros((0, 1)), [], [False]))
    assert out.status is LpStatus.UNBOUNDED


def test_three_pair_packing():
    G = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]
    out = solve_lp(LpProblem([1, 1, 1], G, [0.6, 0.1, 0.1], [True] * 3))
    assert out.value == pytest.approx(0.2, abs=1e-12)


def test_infeasible():
    # x <= -1 and x >= 0
    out = solve_lp(LpProblem([1.0], [[1.0]], [-1.0], [True]))
    assert out.status is LpStatus.INFEASIBLE


def test_negative_rhs_feasible():
    # x >= 2 (as -x <= -2), x <= 3: max -x -> -2
    out = solve_lp(LpProblem([-1.0], [[-1.0], [1.0]], [-2.0, 3.0], [False]))
    assert out.status is LpStatus.OPTIMAL
    assert out.value == pytest.approx(-2.0, abs=1e-12)
    assert out.point[0] == pytest.approx(2.0, abs=1e-12)


def test_bad_dimensions():
    with pytest.raises(DimensionError):
        LpProblem([1.0, 2.0], [[1.0]], [1.0], [True])
    with pytest.raises(DimensionError):
        LpProblem([np.nan], [[1.0]], [1.0], [True])


def _vertex_max(c, G, h, mask):
    """Best objective over all basic feasible points of a bounded LP (None if infeasible)."""
    nv = len(c)
    rows = [(g, b) for g, b in zip(G, h)]
    rows += [(-np.eye(nv)[j], 0.0) for j in range(nv) if mask[j]]
    best = None
    for active in combinations(range(len(rows)), nv):
        M = np.array([rows[i][0] for i in active])
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        v = np.linalg.solve(M, [rows[i][1] for i in active])
        if all(g @ v <= b + 1e-9 for g, b in rows):
            val = c @ v
            best = val if best is None else max(best, val)
    return best


def _random_box_lp(rng):
    nv = int(rng.integers(1, 5))
    nc = int(rng.integers(1, 6))
    G = rng.standard_normal((nc, nv))
    h = rng.standard_normal(nc)
    # box rows keep the feasible set bounded
    G = np.vstack([G, np.eye(nv), -np.eye(nv)])
    h = np.concatenate([h, np.full(2 * nv, 3.0)])
    return rng.standard_normal(nv), G, h, rng.random(nv) < 0.5


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(60):
        c, G, h, mask = _random_box_lp(rng)
        ref = _vertex_max(c, G, h, mask)
        out = solve_lp(LpProblem(c, G, h, mask))
        if ref is None:
            assert out.status is LpStatus.INFEASIBLE
        else:
            assert out.status is LpStatus.OPTIMAL
            assert out.value == pytest.approx(ref, abs=1e-8)


def test_matches_vertex_enumeration_eight_vars():
    rng = np.random.default_rng(12)
    for _ in range(15):
        nv, nc = int(rng.integers(5, 9)), int(rng.integers(1, 5))
        # nonnegative simplex-capped region, always bounded
        G = np.vstack([rng.standard_normal((nc, nv)), np.ones(nv)])
        h = np.append(rng.standard_normal(nc), 5.0)
        c, mask = rng.standard_normal(nv), np.ones(nv, dtype=bool)
        ref = _vertex_max(c, G, h, mask)
        out = solve_lp(LpProblem(c, G, h, mask))
        if ref is None:
            assert out.status is LpStatus.INFEASIBLE
        else:
            assert out.value == pytest.approx(ref, abs=1e-8)


def test_matches_scipy_highs():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(5)
    for _ in range(150):
        nv, nc = int(rng.integers(1, 8)), int(rng.integers(1, 10))
        G, h, c = rng.standard_normal((nc, nv)), rng.standard_normal(nc), rng.standard_normal(nv)
        mask = rng.random(nv) < 0.6
        out = solve_lp(LpProblem(c, G, h, mask))
        ref = scipy_opt.linprog(-c, A_ub=G, b_ub=h, bounds=[(0, None) if m else (None, None) for m in mask])
        expected = {0: LpStatus.OPTIMAL, 2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}[ref.status]
        assert out.status is expected
        if expected is LpStatus.OPTIMAL:
            assert out.value == pytest.approx(-ref.fun, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_optimal_point_is_feasible_and_attains_value(seed):
    rng = np.random.default_rng(seed)
    c, G, h, mask = _random_box_lp(rng)
    out = solve_lp(LpProblem(c, G, h, mask))
    if out.status is LpStatus.OPTIMAL:
        tol = lp.FEAS_TOL
        assert (G @ out.point <= h + tol).all()
        assert (out.point[mask] >= -tol).all()
        assert abs(c @ out.point - out.value) <= tol * (1 + abs(out.value))


def test_deterministic():
    rng = np.random.default_rng(2)
    c, G, h, mask = _random_box_lp(rng)
    p = LpProblem(c, G, h, mask)
    a, b = solve_lp(p), solve_lp(p)
    assert a.status is b.status and a.value == b.value
    assert np.array_equal(a.point, b.point) and a.iterations == b.iterations


def test_backends_agree_bit_for_bit():
    rng = np.random.default_rng(8)
    for _ in range(20):
        c, G, h, mask = _random_box_lp(rng)
        p = LpProblem(c, G, h, mask)
        fast, slow = solve_lp(p, use_numba=True), solve_lp(p, use_numba=False)
        assert fast.status is slow.status and fast.value == slow.value


def test_degenerate_problem_terminates():
    # many constraints through the origin
    rng = np.random.default_rng(4)
    H = rng.standard_normal((30, 6))
    G = np.vstack([H, -H])
    h = np.zeros(60)
    G = np.vstack([G, np.ones((1, 6))])
    h = np.append(h, 1.0)
    out = solve_lp(LpProblem(rng.standard_normal(6), G, h, np.zeros(6, dtype=bool)))
    assert out.status in (LpStatus.OPTIMAL, LpStatus.UNBOUNDED)


def test_iteration_cap_raises(monkeypatch):
    def stuck(T, basis, n_enter, tol, max_iter, use_numba=None, bland_after=lp.BLAND_AFTER, stalled=0,
              piv_tol=lp.PIVOT_TOL):
        return lp._PAUSED, max_iter, stalled

    monkeypatch.setattr(lp, "pivot_loop", stuck)
    with pytest.raises(NumericalBreakdown):
        solve_lp(LpProblem([1.0], [[1.0]], [1.0], [True]))
