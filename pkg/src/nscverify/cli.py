"""Command-line entry point: ``nscverify <subcommand> ...``.

Exit status: 0 on success, 1 on a domain error (or an uncertified result
when ``--require-certified`` is given), 2 on a usage error.
"""
import argparse
import json
import logging
from math import comb
import sys
import time

from . import __version__
from .bounds import BoundMethod, pick_l_bound, pick_l_optimized_bound, pick_one_bound, score_all_subsets
from .ensembles import Ensemble, EnsembleSpec, generate
from .errors import ArgumentError, DimensionError, NscError
from .exact import CMP_TOL, EXACT, VerificationReport, find_max_certified_k, sandwich
from .io import TraceWriter, cached_scores, matrix_hash, write_json
from .linalg import BASIS_TOL, null_space_basis, read_matrix, write_matrix
from .lp import FEAS_TOL
from .oracle import exhaustive_alpha

log = logging.getLogger("nscverify")

METHODS = {"pick1": BoundMethod.PICK1, "pickl": BoundMethod.PICKL, "opt": BoundMethod.PICKL_OPTIMIZED}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _matrix_args(p):
    p.add_argument("--matrix", required=True, help="CSV matrix (A or H)")
    p.add_argument("--as-basis", action="store_true", help="treat the matrix as a null-space basis H")
    p.add_argument("--basis-tol", type=float, default=BASIS_TOL)
    p.add_argument("--feas-tol", type=float, default=FEAS_TOL)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--no-cache", action="store_true", help="do not read or write the score cache")
    p.add_argument("--report", default="-", help="report JSON path (default: stdout)")


def build_parser():
    parser = _Parser(prog="nscverify", description="Null space condition certificates for l1 recovery")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="draw a seeded sensing matrix A")
    p.add_argument("--ensemble", choices=[e.value for e in Ensemble], required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("nullspace", help="compute a null-space basis H of A")
    p.add_argument("--matrix", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--basis-tol", type=float, default=BASIS_TOL)
    p.add_argument("--method", choices=["svd", "qr"], default="svd")

    p = sub.add_parser("bound", help="polynomial-time upper bound on alpha_k")
    _matrix_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--method", choices=list(METHODS), default="pickl")
    p.add_argument("--require-certified", action="store_true")

    p = sub.add_parser("exact", help="exact alpha_k by sandwiching")
    _matrix_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--cmp-tol", type=float, default=CMP_TOL)
    p.add_argument("--trace", help="trace CSV path")
    p.add_argument("--require-certified", action="store_true")

    p = sub.add_parser("oracle", help="exact alpha_k by exhaustive search")
    _matrix_args(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("verify", help="sweep k = 1..kmax and report the largest certified k")
    _matrix_args(p)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--mode", choices=["exact", *METHODS], default="exact")
    p.add_argument("--cmp-tol", type=float, default=CMP_TOL)
    p.add_argument("--require-certified", action="store_true")
    return parser


def load_basis(args):
    """Read --matrix and return ``(H, kind)`` where kind says how H was obtained."""
    M, meta = read_matrix(args.matrix)
    if args.as_basis:
        kind = "H"
    elif meta.get("kind") in ("A", "H"):
        kind = meta["kind"]
    else:
        # no sidecar: a sensing matrix is wide, a basis is tall
        kind = "A" if M.shape[0] < M.shape[1] else "H"
    if kind == "A":
        basis = null_space_basis(M, args.basis_tol)
        log.info("null-space basis %s, residual %.2e", basis.H.shape, basis.residual)
        return basis.H, "A"
    if M.shape[0] <= M.shape[1]:
        raise DimensionError(f"a basis H needs more rows than columns, got {M.shape}")
    return M, "H"


def _inputs(args, H, kind, **extra):
    out = {
        "command": args.command,
        "matrix": args.matrix,
        "matrix_kind": kind,
        "basis_sha256": matrix_hash(H),
        "feas_tol": args.feas_tol,
        "basis_tol": args.basis_tol,
    }
    if hasattr(args, "cmp_tol"):
        out["cmp_tol"] = args.cmp_tol
    out.update(extra)
    return out


def _scores(args, H, l):
    def compute():
        log.info("scoring %d subsets of size %d", comb(H.shape[0], l), l)
        return score_all_subsets(H, l, args.feas_tol, args.threads)
    return cached_scores(H, l, compute, enabled=not args.no_cache)


def cmd_gen(args):
    A, seed_used = generate(EnsembleSpec(args.ensemble, args.rows, args.cols, args.seed))
    write_matrix(args.out, A, "A", ensemble=args.ensemble, seed=args.seed,
                 extra={"seed_used": seed_used} if seed_used != args.seed else None)
    return 0


def cmd_nullspace(args):
    A, meta = read_matrix(args.matrix)
    basis = null_space_basis(A, args.basis_tol, method=args.method)
    write_matrix(args.out, basis.H, "H", ensemble=meta.get("ensemble"), seed=meta.get("seed"),
                 extra={"residual": basis.residual, "source": str(args.matrix)})
    return 0


def _finish(args, payload, certified):
    write_json(args.report, payload)
    if getattr(args, "require_certified", False) and not certified:
        print(json.dumps({"error": "NotCertified", "message": "alpha is not below 1/2"}), file=sys.stderr)
        return 1
    return 0


def cmd_bound(args):
    start = time.perf_counter()
    H, kind = load_basis(args)
    method = METHODS[args.method]
    l = 1 if method is BoundMethod.PICK1 else args.l
    if not 1 <= l <= args.k < H.shape[0]:
        raise ArgumentError(f"need 1 <= l <= k < n, got l={l}, k={args.k}, n={H.shape[0]}")
    table = _scores(args, H, l)
    if method is BoundMethod.PICK1:
        b = pick_one_bound(table, args.k)
    elif method is BoundMethod.PICKL:
        b = pick_l_bound(table, args.k, l)
    else:
        b = pick_l_optimized_bound(table, args.k, l, feas_tol=args.feas_tol)
    n, m = H.shape
    rep = VerificationReport(n=n, m=m, k=args.k, l=l, alpha=b.bound, method=b.method.value,
                             max_certified_k=args.k if b.nsc_certified else None)
    rep.wall_seconds = time.perf_counter() - start
    payload = rep.to_dict()
    payload["nsc_certified"] = b.nsc_certified
    payload["inputs"] = _inputs(args, H, kind, k=args.k, l=l, bound_method=args.method)
    return _finish(args, payload, b.nsc_certified)


def cmd_exact(args):
    H, kind = load_basis(args)
    if not 1 <= args.l <= args.k < H.shape[0]:
        raise ArgumentError(f"need 1 <= l <= k < n, got l={args.l}, k={args.k}, n={H.shape[0]}")
    table = _scores(args, H, args.l)
    writer = TraceWriter(args.trace) if args.trace else None
    try:
        res = sandwich(H, args.k, args.l, trace_sink=writer, scores=table, feas_tol=args.feas_tol,
                       cmp_tol=args.cmp_tol, threads=args.threads)
    finally:
        if writer:
            writer.close()
    payload = res.report.to_dict()
    payload["inputs"] = _inputs(args, H, kind, k=args.k, l=args.l)
    return _finish(args, payload, res.alpha.alpha < 0.5)


def cmd_oracle(args):
    start = time.perf_counter()
    H, kind = load_basis(args)
    value, K = exhaustive_alpha(H, args.k, args.feas_tol, threads=args.threads)
    n, m = H.shape
    rep = VerificationReport(n=n, m=m, k=args.k, alpha=value.alpha, method="Exhaustive",
                             steps_examined=comb(n, args.k),
                             max_certified_k=args.k if value.alpha < 0.5 else None, best_set=K)
    rep.wall_seconds = time.perf_counter() - start
    payload = rep.to_dict()
    payload["inputs"] = _inputs(args, H, kind, k=args.k)
    return _finish(args, payload, value.alpha < 0.5)


def cmd_verify(args):
    start = time.perf_counter()
    H, kind = load_basis(args)
    mode = EXACT if args.mode == "exact" else METHODS[args.mode]
    reports = find_max_certified_k(H, args.kmax, args.l, mode, feas_tol=args.feas_tol, cmp_tol=args.cmp_tol,
                                   threads=args.threads, score_source=lambda size: _scores(args, H, size))
    n, m = H.shape
    best = reports[0].max_certified_k if reports else None
    payload = {
        "n": n,
        "m": m,
        "rho": (n - m) / n,
        "mode": mode if mode == EXACT else mode.value,
        "l": args.l,
        "max_certified_k": best,
        "per_k": [r.to_dict() for r in reports],
        "wall_seconds": time.perf_counter() - start,
        "inputs": _inputs(args, H, kind, kmax=args.kmax, l=args.l, mode=args.mode),
    }
    return _finish(args, payload, best is not None)


COMMANDS = {
    "gen": cmd_gen,
    "nullspace": cmd_nullspace,
    "bound": cmd_bound,
    "exact": cmd_exact,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"nscverify: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NscError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


def main():
    sys.exit(run())
