"""``zoest-bench``: command-line harness for estimator runs, k-sweeps, table
reproduction, sphere-moment checks and zeroth-order gradient descent.

Every subcommand writes CSV with a leading ``schema`` column. Floats carry 17
significant digits; missing or non-finite values are empty fields.

Exit codes: 0 success, 2 parameter error, 3 evaluation failure,
4 moment-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from .bounds import BoundInputs, c_curve_grad, c_curve_hess, grad_variance_bound
from .exceptions import EvaluationError, ParameterError, SamplingError, SingularMatrixError
from .experiments import (
    PAPER_TABLES,
    moment_check,
    reproduce_table,
    resolve_point,
    sweep_k,
    zo_gradient_descent,
)
from .gradient import GRADIENT_METHODS
from .hessian import HESSIAN_METHODS
from .metrics import EstimatorSpec, TrialError, run_trials, spectral_norm
from .objectives import load_objective

__all__ = [
    "EXIT_OK",
    "EXIT_PARAMETER",
    "EXIT_EVALUATION",
    "EXIT_MOMENTS",
    "RESULT_COLUMNS",
    "TABLE_COLUMNS",
    "MOMENT_COLUMNS",
    "TRAJECTORY_COLUMNS",
    "parse_estimator",
    "load_config",
    "cmd_estimate",
    "cmd_sweep_k",
    "cmd_table",
    "cmd_moments",
    "cmd_zo_gd",
    "write_csv",
    "main",
]

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_EVALUATION = 3
EXIT_MOMENTS = 4

RESULT_SCHEMA = "zoest-result/1"
TABLE_SCHEMA = "zoest-table/1"
MOMENT_SCHEMA = "zoest-moments/1"
TRAJECTORY_SCHEMA = "zoest-trajectory/1"

RESULT_COLUMNS = ("schema", "kind", "estimator", "n", "k", "delta", "trial", "error_l2",
                  "error_fro", "error_spec", "cosine", "n_evals", "seed", "bound_value",
                  "c_curve_value", "lg_error", "error_std")
TABLE_COLUMNS = ("schema", "table", "kind", "estimator", "n", "x", "delta", "trials",
                 "reproduced", "reproduced_std", "paper", "paper_std", "ratio")
MOMENT_COLUMNS = ("schema", "n", "p", "moment", "estimate", "exact", "stderr", "z",
                  "draws", "seed")
TRAJECTORY_COLUMNS = ("schema", "step", "f", "grad_norm", "n_evals", "eta", "k", "delta",
                      "seed")

_DEFAULTS = {
    "function": "paper-test",
    "params": None,
    "n": None,
    "k": None,
    "delta": 0.01,
    "x": "zero",
    "trials": 10,
    "seed": 0,
    "estimator": "stiefel",
    "out": "-",
    "eta": 0.1,
    "steps": 100,
    "table_name": None,
    "sparsity": math.inf,
    "p": 4,
    "draws": 10**6,
    "sampler": "sphere",
    "l3": None,
}

_CASTS = {
    "n": int, "trials": int, "seed": int, "steps": int, "p": int, "draws": int,
    "delta": float, "eta": float, "sparsity": float, "l3": float,
}


def parse_estimator(name: str) -> tuple[str, str]:
    """``"stiefel"`` -> gradient; ``"hess-stiefel"`` -> Hessian."""
    if name.startswith("hess-"):
        method = name[5:].replace("-", "_")
        if method not in HESSIAN_METHODS:
            raise ParameterError(f"unknown Hessian estimator {name!r}; choose from "
                                 + ", ".join("hess-" + m.replace("_", "-") for m in HESSIAN_METHODS))
        return "hessian", method
    if name not in GRADIENT_METHODS:
        raise ParameterError(f"unknown gradient estimator {name!r}; choose from "
                             + ", ".join(GRADIENT_METHODS))
    return "gradient", name


def _estimator_label(kind, method):
    return method if kind == "gradient" else "hess-" + method.replace("_", "-")


def load_config(path: str) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in _DEFAULTS:
                raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _resolve(args: argparse.Namespace) -> dict:
    # defaults < config file < explicit flags
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    for key, cast in _CASTS.items():
        if cfg[key] is not None and isinstance(cfg[key], str):
            try:
                cfg[key] = cast(cfg[key])
            except ValueError:
                raise ParameterError(f"{key}: cannot parse {cfg[key]!r}") from None
    return cfg


def _k_list(value, n):
    if value is None:
        return None
    if isinstance(value, int):
        return [value]
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"k: cannot parse {value!r}") from None


def _objective(cfg):
    n = cfg["n"]
    if n is None and cfg["function"] == "paper-test":
        n = 100
    return load_objective(cfg["function"], n, cfg["params"])


def _truth_scales(kind, objective, x):
    if kind == "gradient":
        return {"grad_norm": float(np.linalg.norm(objective.grad_exact(x)))}
    H = objective.hess_exact(x)
    return {"hess_fro": float(np.linalg.norm(H)), "hess_spec": spectral_norm(H)}


def _c_curve(kind, method, n, k, delta, scales):
    if method in ("entrywise", "comparison"):
        return None
    if kind == "gradient":
        return c_curve_grad(n, k, delta, scales["grad_norm"])
    return c_curve_hess(n, k, delta, scales["hess_fro"], scales["hess_spec"])


def _stat_rows(st, label, seed, c_value=None, bound=None, with_trials=True):
    rows = []
    per_trial_evals = st.total_evals // st.trials
    base = {"kind": st.kind, "estimator": label, "n": st.n, "k": st.k, "delta": st.delta,
            "seed": seed}
    if with_trials:
        for t in range(st.trials):
            row = dict(base, trial=t, n_evals=per_trial_evals)
            if st.kind == "gradient":
                row["error_l2"] = st.trial_errors["l2"][t]
                row["cosine"] = st.trial_errors["cosine"][t]
            else:
                row["error_fro"] = st.trial_errors["frobenius"][t]
                row["error_spec"] = st.trial_errors["spectral"][t]
            rows.append(row)
    agg = dict(base, trial="agg", n_evals=st.total_evals, bound_value=bound,
               c_curve_value=c_value, error_std=st.error_std)
    if st.kind == "gradient":
        agg["error_l2"] = st.error_mean
        agg["cosine"] = st.mean_cosine
        lead = st.error_mean
    else:
        agg["error_spec"] = st.error_mean
        agg["error_fro"] = math.fsum(st.trial_errors["frobenius"]) / st.trials
        lead = agg["error_fro"]
    agg["lg_error"] = math.log10(lead) if lead > 0 else None
    rows.append(agg)
    return rows


def cmd_estimate(cfg: dict) -> list[dict]:
    """Run one estimator at one ``(k, delta)``; per-trial rows plus an ``agg`` row.

    For the Stiefel gradient estimator, ``l3`` in the config adds the variance
    bound to the aggregate row.
    """
    kind, method = parse_estimator(cfg["estimator"])
    objective = _objective(cfg)
    n = objective.n
    x = resolve_point(cfg["x"], n)
    ks = _k_list(cfg["k"], n) or [n]
    if len(ks) != 1:
        raise ParameterError("estimate takes a single k")
    k = ks[0]
    delta = cfg["delta"]
    trials = 1 if method == "entrywise" else cfg["trials"]
    spec = EstimatorSpec(kind, method, n if method == "entrywise" else k, delta, cfg["sparsity"])
    st = run_trials(spec, objective, x, trials, cfg["seed"])
    scales = _truth_scales(kind, objective, x)
    bound = None
    if kind == "gradient" and method == "stiefel" and cfg["l3"] is not None:
        bound = grad_variance_bound(BoundInputs(n, spec.k, delta, grad_norm=scales["grad_norm"],
                                                L3=cfg["l3"]))
    c_value = _c_curve(kind, method, n, spec.k, delta, scales)
    return _stat_rows(st, _estimator_label(kind, method), cfg["seed"], c_value, bound)


def cmd_sweep_k(cfg: dict) -> list[dict]:
    """Aggregate rows over a k-grid with ``lg_error`` and ``c_curve_value`` columns."""
    kind, method = parse_estimator(cfg["estimator"])
    if method == "entrywise":
        raise ParameterError("sweep-k needs a stochastic estimator")
    objective = _objective(cfg)
    x = resolve_point(cfg["x"], objective.n)
    res = sweep_k(objective, x, cfg["delta"], _k_list(cfg["k"], objective.n), kind, method,
                  cfg["trials"], cfg["seed"])
    rows = []
    label = _estimator_label(kind, method)
    for st, c in zip(res.stats, res.c_values):
        rows += _stat_rows(st, label, cfg["seed"], float(c), with_trials=False)
    return rows


def cmd_table(cfg: dict) -> list[dict]:
    """Reproduced values next to the published ones for a named table."""
    name = cfg["table_name"]
    if name is None:
        raise ParameterError("table needs --table-name; valid names: " + ", ".join(PAPER_TABLES))
    spec = PAPER_TABLES.get(name)
    if spec is None:
        raise ParameterError(f"unknown table {name!r}; valid names: {', '.join(PAPER_TABLES)}")
    rows = []
    for cell in reproduce_table(name, cfg["trials"], cfg["seed"]):
        st = cell.stats
        rows.append({
            "table": name, "kind": spec.kind,
            "estimator": _estimator_label(spec.kind, cell.method), "n": spec.n, "x": spec.x,
            "delta": cell.delta, "trials": st.trials, "reproduced": cell.value,
            "reproduced_std": st.error_std if st.trials > 1 else None,
            "paper": cell.paper_value, "paper_std": cell.paper_std,
            "ratio": cell.value / cell.paper_value,
        })
    return rows


def cmd_moments(cfg: dict) -> tuple[list[dict], bool]:
    """Moment rows and whether every ``|z| <= 5``."""
    n = 10 if cfg["n"] is None else cfg["n"]
    checks = moment_check(n, cfg["p"], cfg["draws"], cfg["seed"], cfg["sampler"])
    rows = [{"n": c.n, "p": cfg["p"], "moment": c.name, "estimate": c.estimate,
             "exact": c.exact, "stderr": c.stderr, "z": c.z, "draws": c.draws,
             "seed": cfg["seed"]} for c in checks]
    ok = all(abs(c.z) <= 5.0 for c in checks)
    return rows, ok


def cmd_zo_gd(cfg: dict) -> list[dict]:
    """Trajectory of zeroth-order gradient descent with the Stiefel estimator."""
    objective = _objective(cfg)
    n = objective.n
    x0 = resolve_point(cfg["x"], n)
    ks = _k_list(cfg["k"], n) or [n]
    if len(ks) != 1:
        raise ParameterError("zo-gd takes a single k")
    traj = zo_gradient_descent(objective, x0, cfg["eta"], cfg["steps"], ks[0], cfg["delta"],
                               cfg["seed"])
    return [dict(r, eta=cfg["eta"], k=ks[0], delta=cfg["delta"], seed=cfg["seed"])
            for r in traj]


def _format(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g") if math.isfinite(value) else ""
    return str(value)


def write_csv(rows, columns, schema, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        row = dict(row, schema=schema)
        writer.writerow([_format(row.get(col)) for col in columns])


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; explicit flags take precedence")
    common.add_argument("--function", help="paper-test, linear or quadratic")
    common.add_argument("--params", help="parameter file for linear/quadratic objectives")
    common.add_argument("--n", type=int)
    common.add_argument("--k", help="dimension of the frame; comma-separated list for sweep-k")
    common.add_argument("--delta", type=float)
    common.add_argument("--x", help="zero, pi4, pi2 or a vector file")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--estimator", help="gradient method, or hess-<method> for Hessians")
    common.add_argument("--sparsity", type=float, help="l1 budget for the comparison method")
    common.add_argument("--out", help="output path, '-' for stdout")

    parser = argparse.ArgumentParser(prog="zoest-bench", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    est = sub.add_parser("estimate", parents=[common], help="run one estimator")
    est.add_argument("--l3", type=float, help="third-derivative constant for the variance bound")
    sub.add_parser("sweep-k", parents=[common], help="mean error across a k-grid")
    tab = sub.add_parser("table", parents=[common], help="reproduce a published error table")
    tab.add_argument("--table-name", dest="table_name", choices=sorted(PAPER_TABLES))
    mom = sub.add_parser("moments", parents=[common], help="Monte Carlo sphere moments")
    mom.add_argument("--p", type=int, help="even moment order")
    mom.add_argument("--draws", type=int)
    mom.add_argument("--sampler", choices=("sphere", "stiefel"))
    gd = sub.add_parser("zo-gd", parents=[common], help="zeroth-order gradient descent")
    gd.add_argument("--eta", type=float)
    gd.add_argument("--steps", type=int)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    ok = True
    try:
        cfg = _resolve(args)
        if args.command == "estimate":
            rows, columns, schema = cmd_estimate(cfg), RESULT_COLUMNS, RESULT_SCHEMA
        elif args.command == "sweep-k":
            rows, columns, schema = cmd_sweep_k(cfg), RESULT_COLUMNS, RESULT_SCHEMA
        elif args.command == "table":
            rows, columns, schema = cmd_table(cfg), TABLE_COLUMNS, TABLE_SCHEMA
        elif args.command == "moments":
            (rows, ok), columns, schema = cmd_moments(cfg), MOMENT_COLUMNS, MOMENT_SCHEMA
        else:
            rows, columns, schema = cmd_zo_gd(cfg), TRAJECTORY_COLUMNS, TRAJECTORY_SCHEMA
    except (ParameterError, OSError) as exc:
        print(f"zoest-bench: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except TrialError as exc:
        code = EXIT_PARAMETER if isinstance(exc.cause, ParameterError) else EXIT_EVALUATION
        print(f"zoest-bench: {exc}", file=sys.stderr)
        return code
    except (EvaluationError, SamplingError, SingularMatrixError, FloatingPointError) as exc:
        print(f"zoest-bench: evaluation failure: {exc}", file=sys.stderr)
        return EXIT_EVALUATION

    buf = io.StringIO()
    write_csv(rows, columns, schema, buf)
    if cfg["out"] == "-":
        sys.stdout.write(buf.getvalue())
    else:
        try:
            with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            print(f"zoest-bench: cannot write {cfg['out']}: {exc}", file=sys.stderr)
            return EXIT_PARAMETER
    if not ok:
        print("zoest-bench: moment check failed (|z| > 5)", file=sys.stderr)
        return EXIT_MOMENTS
    return EXIT_OK
