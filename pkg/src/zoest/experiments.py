"""Experiment drivers behind the benchmark CLI: k-sweeps with c-curve
overlays, the published error tables, sphere-moment checks and zeroth-order
gradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import c_curve_grad, c_curve_hess, sphere_cross_fourth_moment, sphere_even_moment
from .exceptions import ParameterError
from .gradient import grad_stiefel
from .metrics import EstimatorSpec, TrialStatistics, pearson, run_trials, spectral_norm
from .objectives import Objective, make_paper_test_function
from .sampling import RandomSource, sample_stiefel, sample_unit_sphere

__all__ = [
    "X_PRESETS",
    "resolve_point",
    "default_k_grid",
    "SweepResult",
    "sweep_k",
    "TableSpec",
    "PAPER_TABLES",
    "TableCell",
    "reproduce_table",
    "MomentCheck",
    "moment_check",
    "zo_gradient_descent",
]

X_PRESETS = {
    "zero": 0.0,
    "pi4": math.pi / 4,
    "pi2": math.pi / 2,
}


def resolve_point(spec, n: int) -> np.ndarray:
    """A preset name (``zero``, ``pi4``, ``pi2``), a path to a vector file, or an array."""
    if isinstance(spec, str):
        if spec in X_PRESETS:
            return np.full(n, X_PRESETS[spec])
        x = np.loadtxt(spec, ndmin=1).ravel()
    else:
        x = np.asarray(spec, dtype=float).ravel()
    if x.shape != (n,):
        raise ParameterError(f"point has length {x.size}, expected {n}")
    return x


def default_k_grid(n: int) -> list[int]:
    """``1, 2, 5, 10, 20, 50, ...`` below ``n``, then ``n`` itself."""
    grid, scale = [], 1
    while True:
        for m in (1, 2, 5):
            k = m * scale
            if k >= n:
                return grid + [n]
            grid.append(k)
        scale *= 10


@dataclass(frozen=True)
class SweepResult:
    kind: str
    method: str
    n: int
    delta: float
    ks: list
    stats: list
    lg_errors: np.ndarray
    c_values: np.ndarray

    @property
    def correlation(self) -> float:
        """Pearson correlation between ``lg(mean error)`` and ``c(k) / 2``."""
        return pearson(self.lg_errors, self.c_values / 2.0)


def sweep_k(objective: Objective, x, delta: float, ks=None, kind: str = "gradient",
            method: str = "stiefel", trials: int = 10, base_seed: int = 0) -> SweepResult:
    """Mean error against ``k`` next to the c-curve of the variance bound.

    Gradient errors are Euclidean; Hessian errors are Frobenius.
    """
    if not delta > 0:
        raise ParameterError("delta must be positive")
    x = np.asarray(x, dtype=float)
    n = objective.n
    ks = default_k_grid(n) if ks is None else [int(k) for k in ks]
    stats, lg, cs = [], [], []
    if kind == "gradient":
        gnorm = float(np.linalg.norm(objective.grad_exact(x)))
    else:
        H = objective.hess_exact(x)
        hfro, hspec = float(np.linalg.norm(H)), spectral_norm(H)
    for k in ks:
        st = run_trials(EstimatorSpec(kind, method, k, delta), objective, x, trials, base_seed)
        stats.append(st)
        if kind == "gradient":
            err = st.error_mean
            cs.append(c_curve_grad(n, k, delta, gnorm))
        else:
            err = math.fsum(st.trial_errors["frobenius"]) / st.trials
            cs.append(c_curve_hess(n, k, delta, hfro, hspec))
        lg.append(math.log10(err) if err > 0 else -300.0)
    return SweepResult(kind, method, n, delta, ks, stats, np.array(lg), np.array(cs))


@dataclass(frozen=True)
class TableSpec:
    kind: str
    n: int
    x: str
    deltas: tuple
    stiefel_mean: tuple
    stiefel_std: tuple
    entrywise: tuple


# Published values: Stiefel estimator with k = n (mean and std over 10 runs)
# and the deterministic entry-wise estimator, on the exp+sin test function.
PAPER_TABLES = {
    "t1": TableSpec("gradient", 500, "zero", (0.1, 0.01, 0.001),
                    (2.8e-4, 2.8e-6, 2.9e-8), (4.0e-6, 1.0e-7, 6.4e-10),
                    (3.8e-2, 3.7e-4, 3.7e-6)),
    "t-entry": TableSpec("gradient", 500, "pi4", (0.1, 0.01, 0.001),
                         (2.4e-4, 2.5e-6, 2.5e-8), (1.0e-5, 1.5e-7, 6.8e-10),
                         (3.2e-2, 3.2e-4, 3.2e-6)),
    "t-hess1": TableSpec("hessian", 100, "pi2", (0.1, 0.01, 0.001),
                         (0.17, 1.7e-3, 1.6e-5), (0.024, 0.16e-4, 1.6e-6),
                         (4.4, 4.3e-2, 4.3e-4)),
    "t-hess2": TableSpec("hessian", 100, "pi4", (0.1, 0.01, 0.001),
                         (4.1e-3, 3.8e-5, 3.8e-7), (5.3e-4, 4.63e-6, 3.7e-8),
                         (0.12, 1.2e-3, 1.2e-5)),
}


@dataclass(frozen=True)
class TableCell:
    method: str
    delta: float
    stats: TrialStatistics
    paper_value: float
    paper_std: float | None

    @property
    def value(self) -> float:
        return self.stats.error_mean


def reproduce_table(name: str, trials: int = 10, base_seed: int = 0) -> list[TableCell]:
    """Recompute a published table: Stiefel (``k = n``) and entry-wise rows."""
    if name not in PAPER_TABLES:
        raise ParameterError(f"unknown table {name!r}; valid names: {', '.join(PAPER_TABLES)}")
    spec = PAPER_TABLES[name]
    f = make_paper_test_function(spec.n)
    x = resolve_point(spec.x, spec.n)
    cells = []
    for i, delta in enumerate(spec.deltas):
        st = run_trials(EstimatorSpec(spec.kind, "stiefel", spec.n, delta), f, x, trials, base_seed)
        cells.append(TableCell("stiefel", delta, st, spec.stiefel_mean[i], spec.stiefel_std[i]))
    for i, delta in enumerate(spec.deltas):
        st = run_trials(EstimatorSpec(spec.kind, "entrywise", spec.n, delta), f, x, 1, base_seed)
        cells.append(TableCell("entrywise", delta, st, spec.entrywise[i], None))
    return cells


@dataclass(frozen=True)
class MomentCheck:
    name: str
    n: int
    estimate: float
    exact: float
    stderr: float
    draws: int

    @property
    def z(self) -> float:
        if self.stderr == 0:
            return 0.0 if self.estimate == self.exact else math.inf
        return (self.estimate - self.exact) / self.stderr


def moment_check(n: int, p: int, draws: int = 10**6, seed: int = 0, sampler: str = "sphere",
                 chunk: int = 100_000) -> list[MomentCheck]:
    """Monte Carlo sphere moments against their closed forms.

    Always checks ``E[v_1^p]``; for ``p = 4`` also ``E[v_1^2 v_2^2]`` and the
    vanishing mixed moment ``E[v_1 v_2^3]``. With ``sampler="stiefel"`` the
    vectors are first columns of ``St(n, min(n, 3))`` frames.
    """
    if p < 2 or p % 2:
        raise ParameterError(f"p must be a positive even integer, got {p}")
    if n < 2:
        raise ParameterError("moment checks need n >= 2")
    if draws < 2:
        raise ParameterError("need at least two draws")
    rng = RandomSource(seed, 0)
    names = [f"E[v1^{p}]"]
    exact = [sphere_even_moment(n, p)]
    if p == 4:
        names += ["E[v1^2 v2^2]", "E[v1 v2^3]"]
        exact += [sphere_cross_fourth_moment(n), 0.0]
    s1 = np.zeros(len(names))
    s2 = np.zeros(len(names))
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        if sampler == "sphere":
            V = sample_unit_sphere(n, rng, size=m)
        elif sampler == "stiefel":
            V = sample_stiefel(n, min(n, 3), rng, size=m)[:, :, 0]
        else:
            raise ParameterError(f"unknown sampler {sampler!r}")
        cols = [V[:, 0] ** p]
        if p == 4:
            cols += [V[:, 0] ** 2 * V[:, 1] ** 2, V[:, 0] * V[:, 1] ** 3]
        for i, c in enumerate(cols):
            s1[i] += math.fsum(c)
            s2[i] += math.fsum(c * c)
        done += m
    out = []
    for i, name in enumerate(names):
        mean = s1[i] / draws
        var = max(0.0, s2[i] / draws - mean * mean) * draws / (draws - 1)
        out.append(MomentCheck(name, n, mean, exact[i], math.sqrt(var / draws), draws))
    return out


def zo_gradient_descent(objective: Objective, x0, eta: float, steps: int, k: int | None = None,
                        delta: float = 1e-3, seed: int = 0) -> list[dict]:
    """Iterate ``x <- x - eta * g_hat(x)`` with the Stiefel gradient estimator.

    Step ``t`` draws from ``RandomSource(seed, t)``. Returns one record per
    iterate (``step = 0`` is the start) with ``f``, the exact gradient norm
    when available, and the cumulative number of estimator evaluations.
    """
    if not eta > 0:
        raise ParameterError("eta must be positive")
    if steps < 1:
        raise ParameterError("steps must be at least 1")
    n = objective.n
    k = n if k is None else k
    x = np.array(x0, dtype=float)

    def record(t, evals):
        gn = float(np.linalg.norm(objective.grad_exact(x))) if objective.has_grad else math.nan
        fx = float(objective.evaluate_many(x[None, :])[0])
        return {"step": t, "f": fx, "grad_norm": gn, "n_evals": evals}

    out = [record(0, 0)]
    evals = 0
    for t in range(1, steps + 1):
        est = grad_stiefel(objective, x, k, delta, RandomSource(seed, t))
        evals += est.n_evals
        x = x - eta * est.vector
        out.append(record(t, evals))
    return out
