"""Command-line front end.

Every subcommand writes a JSON report (schema ``bivarfun-report/1``) to
``--out`` or standard output.  Exit codes: 0 success, 1 numerical or
general error, 2 certification red flag, 3 file I/O error, 4 parse or
usage error.
"""

import argparse
import datetime
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .certify import Case, extremal_search, lemma_harness, run_case, standard_ensemble
from .config import DEFAULT, load_config
from .errors import BivarfunError, ExpressionSyntaxError
from .fieldvals import contour_from_json, contour_to_json, enclosing_contour, numrange, numrange_csv
from .frechet import frechet_block_oracle, frechet_norm_and_bound
from .funexpr import MatrixFunExpr, parse
from .krylov import apriori_error_bound, bivariate_krylov
from .linalg import load_matrix, matrix_from_json, matrix_to_json, save_matrix, spectral_norm
from .matfun import QuadratureSpec, eval_bivariate, eval_multivariate, eval_univariate

SCHEMA = "bivarfun-report/1"
EXIT_OK, EXIT_ERROR, EXIT_RED_FLAG, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3, 4
INEQUALITIES = ("cp1", "cp-matrix", "bivariate", "multivariate", "ando", "lemma1",
                "lemma2", "frechet")

log = logging.getLogger("bivarfun")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- helpers ------------------------------------------------------------------------

def _function(text, arity):
    """Scalar expression, or a JSON list of rows for a matrix-valued one."""
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            rows = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise UsageError(f"matrix-valued function is not valid JSON: {exc}") from None
        return MatrixFunExpr.parse(rows, arity)
    return parse(text, arity)


class FileFormatError(OSError):
    pass


def _load(path):
    try:
        return load_matrix(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise FileFormatError(f"cannot read matrix from {path}: {exc}") from None


def _matrix(ref):
    """A file path or an inline JSON matrix object."""
    if isinstance(ref, dict):
        try:
            return matrix_from_json(ref)
        except (ValueError, KeyError, TypeError) as exc:
            raise FileFormatError(f"bad inline matrix: {exc}") from None
    return _load(ref)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) in (None, [])]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))


def _config(args):
    config = DEFAULT
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        try:
            config = load_config(text, config)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"config file {args.config}: {exc}") from None
    overrides = {k: getattr(args, k) for k in
                 ("nodes", "max_nodes", "rel_tol", "tol_cert", "n_angles", "seed",
                  "max_kron_size")
                 if getattr(args, k, None) is not None}
    if getattr(args, "no_adaptive", False):
        overrides["adaptive"] = False
    config = replace(config, **overrides)
    QuadratureSpec.from_config(config)  # validates node settings
    return config


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj) if obj.ndim == 2 else [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if hasattr(obj, "kind") and hasattr(obj, "center"):
        return contour_to_json(obj)
    return obj


def _emit(args, config, result, inputs):
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "body": {"command": args.command, "inputs": inputs,
                 "config": config.as_dict(), "result": _jsonable(result)},
        # kept outside the body so that bodies are byte-identical across runs
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# --- subcommands --------------------------------------------------------------------

def cmd_numrange(args, config):
    _require(args, "A")
    A = _load(args.A)
    nr = numrange(A, args.angles or config.n_angles, config)
    csv_text = numrange_csv(nr)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    contour = enclosing_contour(nr, args.margin)
    if args.contour:
        with open(args.contour, "w") as fh:
            json.dump(contour_to_json(contour), fh, indent=2)
    if args.out:
        result = {"n_angles": len(nr.angles),
                  "max_boundary_modulus": float(np.abs(nr.boundary).max()),
                  "support_min": float(nr.support.min()),
                  "support_max": float(nr.support.max()),
                  "contour": contour_to_json(contour), "csv": args.csv}
        _emit(args, config, result, {"A": args.A})
    return EXIT_OK


def _quadrature(args, config, job):
    q = QuadratureSpec.from_config(config)
    spec = job.get("quadrature")
    if spec:
        q = QuadratureSpec(int(spec.get("nodes", q.nodes_per_contour)),
                           bool(spec.get("adaptive", q.adaptive)),
                           float(spec.get("rel_tol", q.rel_tol)),
                           int(spec.get("max_nodes", q.max_nodes)))
    return q


def _load_job(args):
    if not getattr(args, "job", None):
        return {}
    with open(args.job) as fh:
        job = json.load(fh)
    if not isinstance(job, dict):
        raise UsageError("job file must hold a JSON object")
    return job


def _contours(args, job, count):
    refs = list(job.get("contours") or [])
    for i, name in enumerate(("contour_A", "contour_B")[:count]):
        path = getattr(args, name, None)
        if path:
            with open(path) as fh:
                obj = json.load(fh)
            while len(refs) <= i:
                refs.append(None)
            refs[i] = obj
    out = [contour_from_json(r) if r else None for r in refs]
    return (out + [None] * count)[:count]


def _store_matrix(args, M):
    if args.matrix_out:
        save_matrix(args.matrix_out, M)
        return {"file": args.matrix_out, "rows": M.shape[0], "cols": M.shape[1]}
    return matrix_to_json(M)


def cmd_eval(args, config):
    job = _load_job(args)
    fn = args.fn or job.get("function")
    mats = [m for m in (args.A, args.B) if m] or list(job.get("matrices") or [])
    if fn is None or not mats:
        raise UsageError("eval needs --fn and --A (or a job file)")
    if isinstance(fn, list):
        fn = json.dumps(fn)
    q = _quadrature(args, config, job)
    matrices = [_matrix(m) for m in mats]
    if len(matrices) == 1:
        f = _function(fn, 1)
        (cA,) = _contours(args, job, 1)
        M, info = eval_univariate(f, matrices[0], cA, q, config, full_output=True)
        meta = {k: v for k, v in info.items()}
    elif len(matrices) == 2:
        f = _function(fn, 2)
        cA, cB = _contours(args, job, 2)
        op = eval_bivariate(f, matrices[0], matrices[1], cA, cB, q, config)
        M = op.materialize()
        meta = dict(op.info)
    else:
        raise UsageError("eval takes one or two matrices; use eval-multi for more")
    result = {"function": str(f), "matrix": _store_matrix(args, M), "metadata": meta,
              "norm": spectral_norm(M)}
    _emit(args, config, result, {"function": fn, "matrices": [str(m) if not isinstance(m, dict)
                                                              else "inline" for m in mats]})
    return EXIT_OK


def cmd_eval_multi(args, config):
    job = _load_job(args)
    fn = args.fn or job.get("function")
    mats = args.mat or list(job.get("matrices") or [])
    if fn is None or not mats:
        raise UsageError("eval-multi needs --fn and at least one --mat")
    q = _quadrature(args, config, job)
    matrices = [_matrix(m) for m in mats]
    f = _function(fn if isinstance(fn, str) else json.dumps(fn), len(matrices))
    contours = [contour_from_json(c) if c else None for c in job.get("contours") or []]
    M, info = eval_multivariate(f, matrices, contours or None, q, config, full_output=True)
    result = {"function": str(f), "d": len(matrices), "matrix": _store_matrix(args, M),
              "metadata": info, "norm": spectral_norm(M)}
    _emit(args, config, result, {"function": fn, "matrices": [str(m) for m in mats]})
    return EXIT_OK


def cmd_frechet(args, config):
    _require(args, "fn", "A")
    f = _function(args.fn, 1)
    A = _load(args.A)
    q = QuadratureSpec.from_config(config)
    res = frechet_norm_and_bound(f, A, q, config)
    result = res.as_dict()
    if args.E:
        E = _load(args.E)
        L = res.operator.apply(E)
        ref = frechet_block_oracle(f, A, E, q, config)
        result["DfE"] = matrix_to_json(L)
        result["block_oracle_rel_err"] = float(np.linalg.norm(L - ref)
                                               / max(np.linalg.norm(ref), 1e-300))
    _emit(args, config, result, {"function": args.fn, "A": args.A, "E": args.E})
    return EXIT_OK


def cmd_krylov(args, config):
    _require(args, "fn", "A", "B", "cA", "cB", "k", "l")
    f = _function(args.fn, 2)
    A, B = _load(args.A), _load(args.B)
    cA, cB = _load(args.cA), _load(args.cB)
    exact = A.shape[0] * B.shape[0] <= config.max_kron_size
    q = QuadratureSpec.from_config(config)
    res = bivariate_krylov(f, A, B, cA, cB, args.k, args.l, q, exact, config)
    c_norm = float(np.linalg.norm(cA) * np.linalg.norm(cB))
    res.apriori_bound = apriori_error_bound(f, A, B, res.k, res.l, c_norm=c_norm,
                                            config=config)
    _emit(args, config, res.as_dict(),
          {"function": args.fn, "A": args.A, "B": args.B, "cA": args.cA, "cB": args.cB,
           "k": args.k, "l": args.l})
    return EXIT_OK


def _certify_one(inequality, f_text, mats, config):
    arity = {"bivariate": 2, "ando": 2, "multivariate": len(mats)}.get(inequality, 1)
    f = _function(f_text, arity)
    if inequality == "cp-matrix" and not isinstance(f, MatrixFunExpr):
        f = MatrixFunExpr([[f]])
    need = {"bivariate": 2, "ando": 2}.get(inequality, 1)
    if inequality != "multivariate" and len(mats) != need:
        raise UsageError(f"{inequality} needs {need} matrix argument(s)")
    return run_case(Case(inequality, inequality, f, mats), config)


def _tsv(reports):
    lines = ["case_id\tinequality\tlhs\trhs_sup_sample\tconstant\tratio\traw_ratio\tpass"]
    for r in reports:
        lines.append("\t".join([str(r.metadata.get("case_id", "")), r.inequality_id,
                                *(repr(float(v)) for v in (r.lhs, r.rhs_sup_sample, r.constant,
                                                           r.ratio, r.raw_ratio)),
                                str(r.passed).lower()]))
    return "\n".join(lines) + "\n"


def _ensemble_cases(args, config):
    if args.ensemble == "standard":
        cases = standard_ensemble(config.seed)
        if args.inequality:
            cases = [c for c in cases if c.inequality == args.inequality]
        return cases
    with open(args.ensemble) as fh:
        spec = json.load(fh)
    out = []
    for i, item in enumerate(spec.get("cases", [])):
        ineq = item.get("inequality", args.inequality)
        if ineq not in INEQUALITIES:
            raise UsageError(f"case {i}: unknown inequality {ineq!r}")
        mats = [_matrix(m) for m in item["matrices"]]
        arity = {"bivariate": 2, "ando": 2, "multivariate": len(mats)}.get(ineq, 1)
        fn = item["function"]
        f = _function(fn if isinstance(fn, str) else json.dumps(fn), arity)
        out.append(Case(item.get("case_id", f"case-{i}"), ineq, f, mats))
    return out


def cmd_certify(args, config):
    if args.ensemble:
        cases = _ensemble_cases(args, config)
        reports = [run_case(c, config) for c in cases]
    else:
        _require(args, "inequality", "fn")
        mats = [_load(p) for p in ([args.A] if args.A else []) + ([args.B] if args.B else [])
                + (args.mat or [])]
        rep = _certify_one(args.inequality, args.fn, mats, config)
        rep.metadata["case_id"] = "cli"
        reports = [rep]
    tsv = _tsv(reports)
    if args.tsv:
        with open(args.tsv, "w") as fh:
            fh.write(tsv)
    else:
        sys.stderr.write(tsv)
    passed = all(r.passed for r in reports)
    result = {"reports": [r.as_dict() for r in reports], "all_pass": passed,
              "n_cases": len(reports)}
    _emit(args, config, result, {"inequality": args.inequality, "function": args.fn,
                                 "A": args.A, "B": args.B, "mat": args.mat,
                                 "ensemble": args.ensemble})
    return EXIT_OK if passed else EXIT_RED_FLAG


def cmd_lemma_harness(args, config):
    _require(args, "fn", "A")
    F = _function(args.fn, 1)
    A = _load(args.A)
    contour = None
    if args.contour:
        with open(args.contour) as fh:
            contour = contour_from_json(json.load(fh))
    r1, r2 = lemma_harness(F, A, contour, config=config)
    result = {"reports": [r1.as_dict(), r2.as_dict()], "all_pass": r1.passed and r2.passed}
    _emit(args, config, result, {"function": args.fn, "A": args.A, "contour": args.contour})
    return EXIT_OK if result["all_pass"] else EXIT_RED_FLAG


def cmd_search(args, config):
    _require(args, "fn")
    f = _function(args.fn, 2)
    sizes = tuple(int(s) for s in args.sizes.split(","))
    if any(s < 1 for s in sizes):
        raise UsageError("--sizes must be positive integers")
    board = extremal_search(f, sizes, args.iterations, config.seed,
                            restrict_normal=args.normal, config=config)
    result = {"leaderboard": board,
              "incumbent_raw_ratio": board[0]["raw_ratio"] if board else None}
    _emit(args, config, result, {"function": args.fn, "sizes": list(sizes),
                                 "iterations": args.iterations, "normal": args.normal})
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="report JSON path (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--nodes", type=int, help="initial quadrature nodes per contour")
    common.add_argument("--max-nodes", type=int)
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--no-adaptive", action="store_true")
    common.add_argument("--tol-cert", type=float)
    common.add_argument("--n-angles", type=int)
    common.add_argument("--max-kron-size", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="bivarfun", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("numrange", parents=[common], help="sample W(A)")
    s.add_argument("--A")
    s.add_argument("--angles", type=int)
    s.add_argument("--csv", help="CSV output path (default: stdout)")
    s.add_argument("--contour", help="write the enclosing contour JSON here")
    s.add_argument("--margin", type=float)

    s = sub.add_parser("eval", parents=[common], help="f(A) or f{A,B}")
    s.add_argument("--fn")
    s.add_argument("--A")
    s.add_argument("--B")
    s.add_argument("--job", help="job JSON file")
    s.add_argument("--contour-A")
    s.add_argument("--contour-B")
    s.add_argument("--matrix-out", help="write the result matrix here (.json or .mtx)")

    s = sub.add_parser("eval-multi", parents=[common], help="f{A_1,...,A_d}")
    s.add_argument("--fn")
    s.add_argument("--mat", action="append")
    s.add_argument("--job")
    s.add_argument("--matrix-out")

    s = sub.add_parser("frechet", parents=[common], help="Frechet derivative norm and bound")
    s.add_argument("--fn")
    s.add_argument("--A")
    s.add_argument("--E")

    s = sub.add_parser("krylov", parents=[common], help="bivariate Arnoldi approximation")
    s.add_argument("--fn")
    for name in ("A", "B", "cA", "cB"):
        s.add_argument("--" + name, dest=name)
    s.add_argument("-k", type=int)
    s.add_argument("-l", type=int)

    s = sub.add_parser("certify", parents=[common], help="empirical bound certification")
    s.add_argument("--inequality", choices=INEQUALITIES)
    s.add_argument("--fn")
    s.add_argument("--A")
    s.add_argument("--B")
    s.add_argument("--mat", action="append")
    s.add_argument("--ensemble", help='ensemble JSON file, or "standard"')
    s.add_argument("--tsv", help="summary table path (default: stderr)")

    s = sub.add_parser("lemma-harness", parents=[common], help="Cauchy-dual lemma checks")
    s.add_argument("--fn")
    s.add_argument("--A")
    s.add_argument("--contour")

    s = sub.add_parser("search", parents=[common], help="extremal ratio search")
    s.add_argument("--fn", default="x*y")
    s.add_argument("--sizes", default="2")
    s.add_argument("--iterations", type=int, default=1000)
    s.add_argument("--normal", action="store_true", help="restrict to normal matrices")
    return p


COMMANDS = {"numrange": cmd_numrange, "eval": cmd_eval, "eval-multi": cmd_eval_multi,
            "frechet": cmd_frechet, "krylov": cmd_krylov, "certify": cmd_certify,
            "lemma-harness": cmd_lemma_harness, "search": cmd_search}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        config = _config(args)
        return COMMANDS[args.command](args, config)
    except (UsageError, ExpressionSyntaxError) as exc:
        print(f"bivarfun: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bivarfun: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BivarfunError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"bivarfun: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
