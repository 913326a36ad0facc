"""Lexicographic subset enumeration and ranking, plus the per-support sum kernel."""
from itertools import combinations
from math import comb

import numpy as np

from ._accel import ENABLE_NUMBA, njit
from .errors import CapacityError

MATERIALIZATION_LIMIT = 10**7


def check_capacity(count, what, limit=MATERIALIZATION_LIMIT):
    if count > limit:
        raise CapacityError(f"{what}: {count} exceeds materialization limit {limit}")


def all_subsets(n, size, limit=MATERIALIZATION_LIMIT):
    """All ``size``-subsets of ``range(n)`` as rows of an int array, in lexicographic order."""
    count = comb(n, size)
    check_capacity(count, f"C({n},{size}) subsets", limit)
    if count == 0:
        return np.zeros((0, size), dtype=np.int64)
    flat = np.fromiter(
        (i for c in combinations(range(n), size) for i in c),
        dtype=np.int64,
        count=count * size,
    )
    return flat.reshape(count, size)


def binomial_table(n, k):
    """``table[a, b] == C(a, b)`` for ``0 <= a <= n``, ``0 <= b <= k``."""
    table = np.zeros((n + 1, k + 1), dtype=np.int64)
    for a in range(n + 1):
        for b in range(min(a, k) + 1):
            table[a, b] = comb(a, b)
    return table


def rank_subsets(subsets, n):
    """Lexicographic rank of each row of ``subsets`` among the C(n, l) l-subsets.

    Uses the colex rank of the reflected subset ``{n-1-i}``: lexicographic
    order on the original is reverse colex order on the reflection.
    """
    subsets = np.asarray(subsets, dtype=np.int64)
    l = subsets.shape[-1]
    table = binomial_table(n, l + 1)
    reflected = (n - 1 - subsets)[..., ::-1]
    colex = np.zeros(subsets.shape[:-1], dtype=np.int64)
    for pos in range(l):
        colex += table[reflected[..., pos], pos + 1]
    return comb(n, l) - 1 - colex


def subset_rank(subset, n):
    return int(rank_subsets(np.asarray(subset)[None, :], n)[0])


def _support_sums_loops(supports, positions, scores, n, table):
    # supports: (S, k); positions: (P, l) index pairs into a support row.
    S = supports.shape[0]
    P, l = positions.shape
    total_l = table[n, l]
    out = np.empty(S)
    for s in range(S):
        acc = 0.0
        for p in range(P):
            colex = 0
            for q in range(l):
                colex += table[n - 1 - supports[s, positions[p, l - 1 - q]], q + 1]
            acc += scores[total_l - 1 - colex]
        out[s] = acc
    return out


_support_sums_jit = njit(_support_sums_loops)


def support_sums(supports, scores, n, l, use_numba=None):
    """For each k-support, the sum of ``scores`` over its l-subsets.

    ``scores`` is indexed by lexicographic rank among the C(n, l) l-subsets.
    """
    if use_numba is None:
        use_numba = ENABLE_NUMBA
    supports = np.ascontiguousarray(supports, dtype=np.int64)
    scores = np.ascontiguousarray(scores, dtype=float)
    k = supports.shape[1]
    positions = all_subsets(k, l)
    if use_numba:
        table = binomial_table(n, l + 1)
        return _support_sums_jit(supports, positions, scores, n, table)
    out = np.zeros(len(supports))
    for pos in positions:
        out += scores[rank_subsets(supports[:, pos], n)]
    return out
