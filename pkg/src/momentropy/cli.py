"""Command-line front end: ``momentropy <command> [options]``.

Three subcommands cover the package's workflows:

* ``logdet``       -- log-determinant of a Matrix Market file or generated
                      kernel, with optional exact reference and lengthscale
                      sweeps (JSON-lines records).
* ``gmm-entropy``  -- entropy approximations for mixture JSON files, with
                      per-method timing (JSON-lines records).
* ``bo-demo``      -- seeded Bayesian-optimisation demo runs (CSV traces).

All outputs are deterministic for a fixed ``--seed``: timing fields are
written as 0 unless ``--timings`` is given, so reruns are byte-identical by
default.  Batch work runs in a thread pool whose size is capped by the
``MEME_THREADS`` environment variable; records are sorted by configuration
before writing, so pool scheduling never affects output order.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bases import BASIS_KINDS
from .bo import BOConfig, bo_run, get_objective, list_objectives
from .gp import default_hyper_grid
from .logdet import (
    chebyshev_logdet,
    cholesky_logdet,
    make_se_kernel,
    meme_logdet,
    taylor_logdet,
)
from .maxent import MaxEntError, SolverConfig
from .mixtures import (
    entropy_mc,
    entropy_meme,
    entropy_mm,
    entropy_quad,
    load_mixture,
)
from .operators import load_matrix_market
from .trace import PROBE_DISTRIBUTIONS

# Exit codes: 0 success, 1 parse/input failure, 2 solver non-convergence.
EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NOCONV = 2

_EXACT_LIMIT = 4000     # Cholesky reference allowed up to this n


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _pool_size(num_items):
    cap = os.environ.get("MEME_THREADS")
    workers = os.cpu_count() or 1
    if cap is not None:
        try:
            workers = max(1, int(cap))
        except ValueError:
            raise SystemExit(
                f"momentropy: error: MEME_THREADS must be an integer, "
                f"got {cap!r}")
    return max(1, min(workers, num_items))


def _load_config_file(path, allowed):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"momentropy: error: cannot read config: {exc}")
    if not isinstance(doc, dict):
        raise SystemExit("momentropy: error: config file must hold an object")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise SystemExit(
            f"momentropy: error: unknown config keys {sorted(unknown)}")
    return doc


def _resolve(args, defaults):
    """Fill argparse values from --config where flags were not given.

    Flags are declared with default None; precedence is flag > config file
    > built-in default.
    """
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config, allowed=defaults.keys())
    resolved = {}
    for key, builtin in defaults.items():
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_cfg:
            resolved[key] = file_cfg[key]
        else:
            resolved[key] = builtin
    return resolved


def _open_output(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _emit_lines(lines, path):
    out, close = _open_output(path)
    try:
        for line in lines:
            out.write(line + "\n")
    finally:
        if close:
            out.close()


def _json_line(record):
    return json.dumps(record, sort_keys=True)


# ----------------------------------------------------------------- logdet

def _parse_kernel_spec(tokens):
    spec = {"n": None, "l": None, "dim": 6, "jitter": 1e-8}
    for tok in tokens:
        if "=" not in tok:
            raise SystemExit(
                f"momentropy: error: kernel spec items look like key=value, "
                f"got {tok!r}")
        key, _, val = tok.partition("=")
        if key not in spec:
            raise SystemExit(
                f"momentropy: error: unknown kernel spec key {key!r}")
        try:
            spec[key] = int(val) if key in ("n", "dim") else float(val)
        except ValueError:
            raise SystemExit(
                f"momentropy: error: bad kernel spec value {tok!r}")
    if spec["n"] is None or spec["l"] is None:
        raise SystemExit(
            "momentropy: error: kernel spec needs at least n= and l=")
    return spec


def _logdet_defaults():
    return {
        "moments": 30, "probes": 50, "tol": 1e-6, "jitter": 1e-8,
        "grid": 1e-4, "basis": "legendre", "seed": 0,
        "distribution": "gaussian",
    }


def _logdet_once(op, label, cfg, exact, timings):
    solver = SolverConfig(tol=cfg["tol"], jitter=cfg["jitter"],
                          grid_spacing=cfg["grid"])
    t0 = time.perf_counter()
    est = meme_logdet(op, num_moments=cfg["moments"], num_probes=cfg["probes"],
                      config=solver, seed=cfg["seed"], basis=cfg["basis"],
                      distribution=cfg["distribution"],
                      require_convergence=False)
    elapsed = time.perf_counter() - t0
    record = {
        "input": label,
        "n": op.n,
        "logdet_est": est.value,
        "lambda_u": est.lambda_u,
        "converged": bool(est.solution.converged),
        "config": dict(cfg),
        "seconds": round(elapsed, 6) if timings else 0.0,
    }
    if exact and op.n <= _EXACT_LIMIT:
        truth = cholesky_logdet(op)
        record["logdet_exact"] = truth
        if truth != 0.0:
            record["rel_err"] = abs(est.value - truth) / abs(truth)
        else:
            record["rel_err"] = abs(est.value - truth)
    return record


def _sweep_item(l, cfg, exact, timings):
    op = make_se_kernel(cfg["_n"], l, input_dim=cfg["_dim"],
                        jitter=cfg["_kjitter"], seed=cfg["seed"])
    solver = SolverConfig(tol=cfg["tol"], jitter=cfg["jitter"],
                          grid_spacing=cfg["grid"])
    record = {"l": l, "n": op.n, "config": {k: v for k, v in cfg.items()
                                            if not k.startswith("_")}}
    t0 = time.perf_counter()
    est = meme_logdet(op, num_moments=cfg["moments"], num_probes=cfg["probes"],
                      config=solver, seed=cfg["seed"], basis=cfg["basis"],
                      distribution=cfg["distribution"],
                      require_convergence=False)
    record["meme_est"] = est.value
    record["converged"] = bool(est.solution.converged)
    record["taylor_est"] = taylor_logdet(
        op, num_moments=cfg["moments"], num_probes=cfg["probes"],
        seed=cfg["seed"], distribution=cfg["distribution"]).value
    record["chebyshev_est"] = chebyshev_logdet(
        op, num_moments=cfg["moments"], num_probes=cfg["probes"],
        seed=cfg["seed"], distribution=cfg["distribution"]).value
    record["seconds"] = round(time.perf_counter() - t0, 6) if timings else 0.0
    if exact and op.n <= _EXACT_LIMIT:
        truth = cholesky_logdet(op)
        record["logdet_exact"] = truth
        denom = abs(truth) if truth != 0.0 else 1.0
        for method in ("meme", "taylor", "chebyshev"):
            record[f"{method}_rel_err"] = \
                abs(record[f"{method}_est"] - truth) / denom
    return record


def cmd_logdet(args):
    cfg = _resolve(args, _logdet_defaults())
    if (args.matrix is None) == (args.kernel is None):
        raise SystemExit(
            "momentropy: error: provide a matrix file or --kernel, not both")

    if args.kernel is not None:
        spec = _parse_kernel_spec(args.kernel)
        if args.sweep_l:
            try:
                values = [float(v) for v in args.sweep_l.split(",") if v]
            except ValueError:
                raise SystemExit(
                    "momentropy: error: --sweep-l wants comma-separated "
                    "numbers")
            if not values:
                raise SystemExit("momentropy: error: --sweep-l is empty")
            item_cfg = dict(cfg, _n=spec["n"], _dim=spec["dim"],
                            _kjitter=spec["jitter"])
            with ThreadPoolExecutor(_pool_size(len(values))) as pool:
                records = list(pool.map(
                    lambda l: _sweep_item(l, item_cfg, args.exact,
                                          args.timings), values))
            records.sort(key=lambda r: r["l"])
            _emit_lines([_json_line(r) for r in records], args.output)
            return EXIT_NOCONV if any(not r["converged"] for r in records) \
                else EXIT_OK
        op = make_se_kernel(spec["n"], spec["l"], input_dim=spec["dim"],
                            jitter=spec["jitter"], seed=cfg["seed"])
        label = "kernel:" + ",".join(f"{k}={spec[k]}"
                                     for k in ("n", "l", "dim", "jitter"))
    else:
        if args.sweep_l:
            raise SystemExit(
                "momentropy: error: --sweep-l needs --kernel input")
        try:
            op = load_matrix_market(args.matrix)
        except (OSError, ValueError) as exc:
            raise SystemExit(f"momentropy: error: {exc}")
        label = args.matrix

    record = _logdet_once(op, label, cfg, args.exact, args.timings)
    _emit_lines([_json_line(record)], args.output)
    return EXIT_OK if record["converged"] else EXIT_NOCONV


# ------------------------------------------------------------ gmm-entropy

_GMM_METHODS = ("quad", "mm", "mc", "meme")


def _gmm_defaults():
    return {
        "moments": 10, "tol": 1e-6, "jitter": 1e-8, "grid": 1e-4,
        "basis": "legendre", "seed": 0, "methods": "quad,mm,meme",
        "mc-samples": 100, "quad-points": 20001,
    }


def _gmm_item(path, methods, cfg, timings):
    try:
        gmm = load_mixture(path)
    except (OSError, ValueError) as exc:
        raise SystemExit(f"momentropy: error: {path}: {exc}")
    solver = SolverConfig(tol=cfg["tol"], jitter=cfg["jitter"],
                          grid_spacing=cfg["grid"])
    results = {}
    converged = True
    for method in methods:
        t0 = time.perf_counter()
        if method == "quad":
            value = entropy_quad(gmm, grid_points=cfg["quad-points"])
        elif method == "mm":
            value = entropy_mm(gmm)
        elif method == "mc":
            value = entropy_mc(gmm, cfg["mc-samples"], seed=cfg["seed"])
        else:
            try:
                value = entropy_meme(gmm, order=cfg["moments"],
                                     basis=cfg["basis"], config=solver)
            except MaxEntError:
                converged = False
                value = None
        elapsed = time.perf_counter() - t0
        results[method] = {
            "value": value,
            "seconds": round(elapsed, 6) if timings else 0.0,
        }
    return {
        "file": path,
        "methods": results,
        "converged": converged,
        "config": dict(cfg),
    }, converged


def cmd_gmm_entropy(args):
    cfg = _resolve(args, _gmm_defaults())
    methods = [m for m in cfg["methods"].split(",") if m]
    for m in methods:
        if m not in _GMM_METHODS:
            raise SystemExit(
                f"momentropy: error: unknown entropy method {m!r}; "
                f"choose from {_GMM_METHODS}")
    if not methods:
        raise SystemExit("momentropy: error: no entropy methods requested")

    with ThreadPoolExecutor(_pool_size(len(args.mixture))) as pool:
        out = list(pool.map(
            lambda p: _gmm_item(p, methods, cfg, args.timings), args.mixture))
    records = [r for r, _ in out]
    records.sort(key=lambda r: r["file"])
    _emit_lines([_json_line(r) for r in records], args.output)
    return EXIT_OK if all(ok for _, ok in out) else EXIT_NOCONV


# ---------------------------------------------------------------- bo-demo

def _bo_defaults():
    return {
        "method": "quad", "iterations": 15, "seed": 0, "grid-size": None,
        "num-hypers": 8, "num-init": 2, "noise-var": 1e-3,
    }


def _format_x(x):
    return ";".join("%.10g" % v for v in x)


def cmd_bo_demo(args):
    cfg = _resolve(args, _bo_defaults())
    try:
        objective = get_objective(args.objective, grid_size=cfg["grid-size"])
    except ValueError as exc:
        raise SystemExit(f"momentropy: error: {exc}")
    hypers = default_hyper_grid(cfg["num-hypers"],
                                noise_var=cfg["noise-var"])
    bo_cfg = BOConfig(candidate_grid=objective.grid,
                      acquisition_method=cfg["method"],
                      iterations=cfg["iterations"], seed=cfg["seed"],
                      num_init=cfg["num-init"])
    try:
        trace = bo_run(objective.func, bo_cfg, hypers)
    except MaxEntError as exc:
        sys.stderr.write(f"momentropy: solver failure in acquisition: "
                         f"{exc}\n")
        return EXIT_NOCONV

    echo = dict(cfg, objective=args.objective)
    lines = ["# config: " + _json_line(echo), "iter,x,y,ir,seconds"]
    for step in trace:
        secs = step.seconds if args.timings else 0.0
        lines.append("%d,%s,%.10g,%.10g,%.6f" % (
            step.iteration, _format_x(step.x), step.y,
            step.immediate_regret, secs))
    _emit_lines(lines, args.output)
    return EXIT_OK


# ------------------------------------------------------------------ main

def _add_common(sub, *, solver=True):
    sub.add_argument("--seed", type=int, default=None,
                     help="master random seed (default 0)")
    sub.add_argument("--config", metavar="JSON",
                     help="JSON file of option defaults; flags override it")
    sub.add_argument("--output", metavar="PATH",
                     help="write results here instead of stdout")
    sub.add_argument("--timings", action="store_true",
                     help="include wall-clock seconds in records "
                          "(off by default so reruns are byte-identical)")
    if solver:
        sub.add_argument("--moments", type=int, default=None,
                         help="number of moment constraints")
        sub.add_argument("--tol", type=float, default=None,
                         help="solver gradient tolerance")
        sub.add_argument("--jitter", type=float, default=None,
                         help="Hessian regularization intensity")
        sub.add_argument("--grid", type=float, default=None,
                         help="quadrature grid spacing on [0,1]")
        sub.add_argument("--basis", choices=BASIS_KINDS, default=None,
                         help="moment basis (default legendre)")


def build_parser():
    parser = _Parser(prog="momentropy",
                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    p_log = commands.add_parser(
        "logdet", help="log-determinant of a symmetric PD operator")
    p_log.add_argument("matrix", nargs="?",
                       help="Matrix Market file with a symmetric matrix")
    p_log.add_argument("--kernel", nargs="+", metavar="KEY=VAL",
                       help="generate an SE kernel instead: n=... l=... "
                            "[dim=6] [jitter=1e-8]")
    p_log.add_argument("--probes", type=int, default=None,
                       help="number of trace-estimation probe vectors")
    p_log.add_argument("--distribution", choices=PROBE_DISTRIBUTIONS,
                       default=None, help="probe entry distribution")
    p_log.add_argument("--exact", action="store_true",
                       help="also compute the Cholesky reference "
                            f"(n <= {_EXACT_LIMIT})")
    p_log.add_argument("--sweep-l", metavar="L1,L2,...",
                       help="sweep kernel lengthscales; one JSON record per "
                            "value with all estimators")
    _add_common(p_log)
    p_log.set_defaults(func=cmd_logdet)

    p_gmm = commands.add_parser(
        "gmm-entropy", help="entropy approximations for mixture JSON files")
    p_gmm.add_argument("mixture", nargs="+",
                       help="mixture JSON file(s)")
    p_gmm.add_argument("--methods", default=None,
                       help="comma list from quad,mm,mc,meme "
                            "(default quad,mm,meme)")
    p_gmm.add_argument("--mc-samples", type=int, default=None,
                       help="samples for the mc method (default 100)")
    p_gmm.add_argument("--quad-points", type=int, default=None,
                       help="grid points for the quad method (default 20001)")
    _add_common(p_gmm)
    p_gmm.set_defaults(func=cmd_gmm_entropy)

    p_bo = commands.add_parser(
        "bo-demo", help="seeded Bayesian-optimisation demo (CSV trace)")
    p_bo.add_argument("objective", help="objective name: " +
                      ", ".join(list_objectives()))
    p_bo.add_argument("--method", default=None,
                      help="acquisition: quad, mm, meme-legendre[-m] "
                           "(default quad)")
    p_bo.add_argument("--iterations", type=int, default=None,
                      help="acquisition-driven steps (default 15)")
    p_bo.add_argument("--grid-size", type=int, default=None,
                      help="candidate grid size (per axis in 2-d)")
    p_bo.add_argument("--num-hypers", type=int, default=None,
                      help="hyperparameter grid size (default 8)")
    p_bo.add_argument("--num-init", type=int, default=None,
                      help="random seeding queries (default 2)")
    p_bo.add_argument("--noise-var", type=float, default=None,
                      help="observation noise variance (default 1e-3)")
    _add_common(p_bo, solver=False)
    p_bo.set_defaults(func=cmd_bo_demo)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except BrokenPipeError:
        return EXIT_OK
    except MaxEntError as exc:
        sys.stderr.write(f"momentropy: solver failure: {exc}\n")
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
