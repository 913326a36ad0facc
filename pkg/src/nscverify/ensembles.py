"""Seeded sensing-matrix ensembles (Gaussian, Bernoulli, realified partial Fourier).

All draws use numpy's PCG64 generator seeded with ``EnsembleSpec.seed``, so a
(kind, rows, cols, seed) tuple maps to one matrix.
"""
from dataclasses import dataclass
import enum
import math

import numpy as np

from .errors import ArgumentError


class Ensemble(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    PARTIAL_FOURIER = "fourier"


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Ensemble
    rows: int
    cols: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Ensemble(self.kind))
        if not 0 < self.rows < self.cols:
            raise ArgumentError(f"need 0 < rows < cols, got {self.rows} x {self.cols}")


def real_harmonics(n):
    """Nonzero rows cos(2 pi q t / n), sin(2 pi q t / n) for q < ceil(n/2), scaled by sqrt(2/n)."""
    t = np.arange(n)
    rows = []
    for q in range(math.ceil(n / 2)):
        rows.append(np.cos(2 * np.pi * q * t / n))
        if q > 0:
            rows.append(np.sin(2 * np.pi * q * t / n))
    return np.sqrt(2.0 / n) * np.array(rows)


def _draw(spec, seed):
    rng = np.random.default_rng(seed)
    if spec.kind is Ensemble.GAUSSIAN:
        return rng.standard_normal((spec.rows, spec.cols))
    if spec.kind is Ensemble.BERNOULLI:
        return np.where(rng.random((spec.rows, spec.cols)) < 0.5, -1.0, 1.0)
    harmonics = real_harmonics(spec.cols)
    if spec.rows > len(harmonics):
        raise ArgumentError(f"only {len(harmonics)} distinct real harmonics for n={spec.cols}")
    pick = np.sort(rng.choice(len(harmonics), size=spec.rows, replace=False))
    return harmonics[pick]


def generate(spec, max_retries=100):
    """Draw the matrix for ``spec``; returns ``(A, seed_used)``.

    A rank-deficient draw is redrawn with the seed incremented; the seed
    actually used is returned so it can be recorded.
    """
    seed = int(spec.seed)
    for _ in range(max_retries):
        A = _draw(spec, seed)
        if np.linalg.matrix_rank(A) == spec.rows:
            return A, seed
        if spec.kind is Ensemble.PARTIAL_FOURIER:
            break
        seed += 1
    raise ArgumentError(f"no full-rank draw for {spec}")
