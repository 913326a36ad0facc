from math import comb

import numpy as np
import pytest

from conftest import gaussian_h
from nscverify import exact
from nscverify.bounds import AlphaValue, BoundMethod, SubsetScore, score_all_subsets
from nscverify.ensembles import EnsembleSpec, generate
from nscverify.errors import ArgumentError, DimensionError
from nscverify.exact import (
    EXACT,
    alpha_exact_on_set,
    cheap_bounds_all,
    cheap_upper_bound,
    find_max_certified_k,
    lp_upper_bound,
    sandwich,
    sandwich_sorted,
)
from nscverify.linalg import null_space_basis
from nscverify.oracle import exhaustive_alpha

TRIPLE = [SubsetScore((0, 1), AlphaValue(0.6)), SubsetScore((0, 2), AlphaValue(0.1)),
          SubsetScore((1, 2), AlphaValue(0.1))]


def test_alpha_exact_on_set_examples(ones4, h3):
    assert alpha_exact_on_set(ones4, (0, 1)).alpha == pytest.approx(0.5, abs=1e-12)
    assert alpha_exact_on_set(h3, (0, 1)).alpha == 1.0
    H = np.vstack([np.zeros((1, 2)), gaussian_h(4, 2, 0)])
    assert alpha_exact_on_set(H, (0,)).alpha == 0.0


def test_cheap_upper_bound_examples(ones4):
    assert cheap_upper_bound(score_all_subsets(ones4, 1), (0, 1), 2, 1) == pytest.approx(0.5)
    H = gaussian_h(7, 3, 2)
    s3 = score_all_subsets(H, 3)
    assert cheap_upper_bound(s3, (1, 4, 5), 3, 3) == alpha_exact_on_set(H, (1, 4, 5)).alpha
    assert cheap_upper_bound(TRIPLE, (0, 1, 2), 3, 2, n=3) == pytest.approx(0.4)


def test_cheap_upper_bound_errors(ones4):
    s = score_all_subsets(ones4, 1)
    with pytest.raises(ArgumentError):
        cheap_upper_bound(s, (0, 0), 2, 1)
    with pytest.raises(ArgumentError):
        cheap_upper_bound(s, (0, 1), 2, 2)


def test_lp_upper_bound_examples():
    s = score_all_subsets(gaussian_h(6, 3, 5), 1)
    K = (1, 4)
    assert lp_upper_bound(s, K, 2, 1) == pytest.approx(cheap_upper_bound(s, K, 2, 1), abs=1e-12)
    assert lp_upper_bound(TRIPLE, (0, 1, 2), 3, 2) == pytest.approx(0.2, abs=1e-12)
    flat = [SubsetScore(L, AlphaValue(0.3)) for L in [(0, 1), (0, 2), (1, 2)]]
    assert lp_upper_bound(flat, (0, 1, 2), 3, 2) == pytest.approx(0.45, abs=1e-12)


def test_lp_upper_bound_missing_scores():
    with pytest.raises(ArgumentError):
        lp_upper_bound(TRIPLE[:2], (0, 1, 2), 3, 2)


def test_per_support_bound_chain():
    rng = np.random.default_rng(21)
    for trial in range(40):
        n = int(rng.integers(6, 10))
        H = rng.standard_normal((n, n // 2))
        k = int(rng.integers(2, 4))
        l = int(rng.integers(1, k + 1))
        K = tuple(sorted(rng.choice(n, k, replace=False)))
        s = score_all_subsets(H, l)
        a = alpha_exact_on_set(H, K).alpha
        lpub = lp_upper_bound(s, K, k, l)
        cub = cheap_upper_bound(s, K, k, l)
        assert a <= lpub + 1e-9 <= cub + 2e-9


def test_sandwich_all_ones(ones4):
    res = sandwich(ones4, 2, 1)
    assert res.alpha.alpha == pytest.approx(0.5, abs=1e-12)
    assert res.report.steps_examined <= 2
    assert res.trace.rows[-1].gub == res.trace.rows[-1].glb


def test_sandwich_lexicographic_winner(h3):
    res = sandwich(h3, 1, 1)
    assert res.alpha.alpha == pytest.approx(0.5, abs=1e-12)
    assert res.best_set == (0,)


def test_sandwich_matches_oracle_12x6():
    H = gaussian_h(12, 6, 12)
    res = sandwich(H, 3, 2)
    ref, _ = exhaustive_alpha(H, 3)
    assert res.alpha.alpha == pytest.approx(ref.alpha, abs=1e-8)
    assert res.report.steps_examined <= comb(12, 3)
    assert res.report.method == EXACT and res.report.rho == 0.5


def _check_envelope(rows):
    gub = [r.gub for r in rows]
    glb = [r.glb for r in rows]
    assert all(b <= a for a, b in zip(gub, gub[1:]))
    assert all(b >= a for a, b in zip(glb, glb[1:]))
    assert all(lo <= hi + 1e-9 for lo, hi in zip(glb, gub))
    assert rows[-1].gub == rows[-1].glb


@pytest.mark.parametrize("seed", range(6))
def test_trace_envelope(seed):
    H = gaussian_h(9, 4, seed)
    for k, l in [(2, 1), (3, 2), (3, 1)]:
        sink = []
        res = sandwich(H, k, l, trace_sink=sink.append)
        assert sink == res.trace.rows
        assert [r.step for r in sink] == list(range(1, len(sink) + 1))
        _check_envelope(sink)
        for r in sink:
            if r.exact_alpha is not None:
                assert r.lpub is not None


def test_trace_on_exhaustion_ends_with_terminal_row():
    # with k = n - 1 and l = 1 every CUB stays above alpha_k, so no early stop
    H = gaussian_h(5, 2, 0)
    res = sandwich(H, 4, 1)
    rows = res.trace.rows
    assert res.report.steps_examined == comb(5, 4)
    assert rows[-1].K == () and rows[-1].step == comb(5, 4) + 1
    _check_envelope(rows)
    assert res.alpha.alpha == pytest.approx(exhaustive_alpha(H, 4)[0].alpha, abs=1e-12)


def test_unsorted_input_rejected():
    H = gaussian_h(6, 3, 1)
    table = score_all_subsets(H, 1)
    supports, cubs = cheap_bounds_all(table, 2)
    order = np.argsort(cubs, kind="stable")
    with pytest.raises(ArgumentError):
        sandwich_sorted(H, supports[order], cubs[order], table, 2)


def test_trace_flushed_up_to_failure(monkeypatch):
    H = gaussian_h(8, 4, 2)
    real = exact.alpha_exact_on_set
    calls = []

    def flaky(*args, **kw):
        calls.append(1)
        if len(calls) > 1:
            raise RuntimeError("solver died")
        return real(*args, **kw)

    monkeypatch.setattr(exact, "alpha_exact_on_set", flaky)
    sink = []
    with pytest.raises(RuntimeError):
        sandwich(H, 3, 1, trace_sink=sink.append, cmp_tol=-1.0)
    assert len(sink) >= 1 and sink[0].exact_alpha is not None


def test_sandwich_argument_errors(ones4):
    with pytest.raises(DimensionError):
        sandwich(ones4, 4, 1)
    with pytest.raises(DimensionError):
        sandwich(ones4, 1, 2)
    with pytest.raises(ArgumentError):
        sandwich(ones4, 2, 1, scores=score_all_subsets(ones4, 2))


def test_find_max_certified_all_ones():
    reps = find_max_certified_k(np.ones((10, 1)), 5, 2)
    assert [r.alpha for r in reps] == pytest.approx([k / 10 for k in range(1, 6)], abs=1e-12)
    assert all(r.max_certified_k == 4 for r in reps)


def test_find_max_certified_none(h3):
    reps = find_max_certified_k(h3, 2, 1)
    assert reps[0].alpha == pytest.approx(0.5) and reps[1].alpha == 1.0
    assert reps[0].max_certified_k is None


def test_find_max_certified_bound_modes():
    H = gaussian_h(10, 5, 7)
    ex = find_max_certified_k(H, 4, 2)
    for mode in BoundMethod:
        reps = find_max_certified_k(H, 4, 2, mode)
        for r, e in zip(reps, ex):
            assert r.alpha >= e.alpha - 1e-8
        assert (reps[0].max_certified_k or 0) <= (ex[0].max_certified_k or 0)


def test_find_max_certified_uses_score_source():
    H = gaussian_h(8, 4, 1)
    asked = []

    def source(size):
        asked.append(size)
        return score_all_subsets(H, size)

    find_max_certified_k(H, 3, 2, score_source=source)
    assert asked == [1, 2]


@pytest.mark.slow
def test_bernoulli_exact_certifies_at_least_pick2():
    A, _ = generate(EnsembleSpec("bernoulli", 32, 40, 0))
    H = null_space_basis(A).H
    ex = find_max_certified_k(H, 5, 2)
    p2 = find_max_certified_k(H, 5, 2, BoundMethod.PICKL)
    assert (ex[0].max_certified_k or 0) >= (p2[0].max_certified_k or 0)
    for r in ex:
        assert r.steps_examined <= comb(40, r.k)
