"""Score cache, trace CSV and report JSON."""
import csv
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .bounds import ScoreTable
from .errors import ArgumentError
from .subsets import all_subsets

TRACE_COLUMNS = ["step", "K", "cub", "lpub", "exact_alpha", "gub", "glb"]


def matrix_hash(H):
    H = np.ascontiguousarray(H, dtype="<f8")
    digest = hashlib.sha256()
    digest.update(np.array(H.shape, dtype="<i8").tobytes())
    digest.update(H.tobytes())
    return digest.hexdigest()


def cache_dir():
    root = os.environ.get("NSC_CACHE_DIR")
    return Path(root) if root else Path.home() / ".cache" / "nscverify"


def write_scores(path, table):
    """``subset_indices;alpha`` rows; indices comma-separated, alpha as repr."""
    with open(path, "w") as fh:
        fh.write("subset_indices;alpha\n")
        for L, a in zip(table.subsets, table.alpha):
            fh.write(",".join(str(int(i)) for i in L) + ";" + repr(float(a)) + "\n")


def read_scores(path, n):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "subset_indices;alpha":
            raise ArgumentError(f"{path}: bad score header {header!r}")
        subsets, alpha = [], []
        for line in fh:
            idx, a = line.strip().split(";")
            subsets.append([int(i) for i in idx.split(",")])
            alpha.append(float(a))
    subsets = np.array(subsets, dtype=np.int64)
    l = subsets.shape[1]
    if not np.array_equal(subsets, all_subsets(n, l)):
        raise ArgumentError(f"{path}: scores are not the complete lexicographic l={l} list for n={n}")
    alpha = np.array(alpha)
    # alpha is exactly 1 only for an unbounded subproblem
    return ScoreTable(n, l, subsets, alpha, alpha >= 1.0)


def cached_scores(H, l, compute, enabled=True, root=None):
    """Return the score table for (H, l), computing and storing it on a miss."""
    if not enabled:
        return compute()
    root = Path(root) if root else cache_dir()
    path = root / f"{matrix_hash(H)}_l{l}.csv"
    if path.exists():
        return read_scores(path, H.shape[0])
    table = compute()
    root.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    write_scores(tmp, table)
    os.replace(tmp, path)
    return table


def _fmt(x):
    return "" if x is None else repr(float(x))


class TraceWriter:
    """Streams trace rows to CSV, flushing each row so partial runs survive."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(TRACE_COLUMNS)

    def __call__(self, row):
        self._w.writerow([row.step, " ".join(str(i) for i in row.K), _fmt(row.cub), _fmt(row.lpub),
                          _fmt(row.exact_alpha), _fmt(row.gub), _fmt(row.glb)])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trace(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "step": int(rec["step"]),
                "K": tuple(int(i) for i in rec["K"].split()),
                **{c: (float(rec[c]) if rec[c] else None) for c in TRACE_COLUMNS[2:]},
            })
    return rows


def write_json(path, payload):
    text = json.dumps(payload, indent=2) + "\n"
    if path in (None, "-"):
        print(text, end="")
    else:
        Path(path).write_text(text)
