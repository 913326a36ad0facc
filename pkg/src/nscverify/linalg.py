"""Dense matrices, null-space bases and the CSV matrix format."""
from dataclasses import dataclass
import json
from pathlib import Path

import numpy as np

from .errors import DimensionError, RankDeficient

BASIS_TOL = 1e-10


def as_matrix(data, name="matrix"):
    """Validate ``data`` as a finite 2-D float array and return it (row-major)."""
    M = np.array(data, dtype=float, order="C", ndmin=2)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise DimensionError(f"{name} has non-finite entries")
    return M


@dataclass(frozen=True)
class NullBasis:
    H: np.ndarray
    residual: float


def _rank_tol(s, shape):
    return max(shape) * np.finfo(float).eps * (s[0] if len(s) else 0.0)


def _fix_signs(H):
    # make the largest-magnitude entry of every column positive
    idx = np.argmax(np.abs(H), axis=0)
    signs = np.sign(H[idx, np.arange(H.shape[1])])
    signs[signs == 0] = 1.0
    return H * signs


def null_space_basis(A, basis_tol=BASIS_TOL, method="svd"):
    """Orthonormal basis H (n x m) of the null space of a full-row-rank A.

    ``basis_tol`` is relative to the largest absolute entry of A.  ``method``
    is ``"svd"`` (right singular vectors) or ``"qr"`` (complete QR of A^T);
    the two give different bases of the same subspace.
    """
    A = as_matrix(A, "A")
    r, n = A.shape
    if r >= n:
        raise DimensionError(f"A must have fewer rows than columns, got {A.shape}")
    if n < 2:
        raise DimensionError("A needs at least two columns")
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > _rank_tol(s, A.shape)))
    if rank < r:
        raise RankDeficient(f"numerical rank {rank} < {r} rows")
    if method == "svd":
        _, _, Vt = np.linalg.svd(A)
        H = Vt[r:].T
    elif method == "qr":
        Q, _ = np.linalg.qr(A.T, mode="complete")
        H = Q[:, r:]
    else:
        raise ValueError(f"unknown method {method!r}")
    H = np.ascontiguousarray(_fix_signs(H))
    residual = float(np.abs(A @ H).max())
    scale = max(float(np.abs(A).max()), 1.0)
    if residual > basis_tol * scale:
        raise RankDeficient(f"null-space residual {residual:.3e} exceeds tolerance")
    return NullBasis(H=H, residual=residual)


def validate_basis(A, H, basis_tol=BASIS_TOL):
    """True iff ``A @ H`` vanishes to ``basis_tol`` and H has full column rank."""
    A = as_matrix(A, "A")
    H = as_matrix(H, "H")
    if A.shape[1] != H.shape[0]:
        raise DimensionError(f"cols(A)={A.shape[1]} != rows(H)={H.shape[0]}")
    if np.abs(A @ H).max(initial=0.0) > basis_tol:
        return False
    s = np.linalg.svd(H, compute_uv=False)
    return int(np.sum(s > _rank_tol(s, H.shape))) == H.shape[1]


def meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_matrix(path, M, kind, ensemble=None, seed=None, extra=None):
    """Write ``M`` as headerless CSV plus its ``.meta.json`` sidecar."""
    M = as_matrix(M)
    path = Path(path)
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    meta = {"kind": kind, "rows": M.shape[0], "cols": M.shape[1], "ensemble": ensemble, "seed": seed}
    if extra:
        meta.update(extra)
    meta_path(path).write_text(json.dumps(meta, indent=2) + "\n")
    return meta


def read_matrix(path):
    """Read a CSV matrix; returns ``(M, meta)`` where meta is {} without a sidecar."""
    path = Path(path)
    M = as_matrix(np.loadtxt(path, delimiter=",", ndmin=2), str(path))
    mp = meta_path(path)
    meta = json.loads(mp.read_text()) if mp.exists() else {}
    if meta and (meta.get("rows"), meta.get("cols")) != M.shape:
        raise DimensionError(f"{path}: sidecar says {meta.get('rows')}x{meta.get('cols')}, file is {M.shape}")
    return M, meta
