"""Error metrics and the Monte Carlo trial harness.

:func:`run_trials` repeats an estimator with substreams ``0 .. trials-1`` of a
base seed and aggregates the draws into :class:`TrialStatistics`. All sums
over trials run in trial order with compensated summation, so the output is
bit-identical for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError, ZoestError
from .gradient import GRADIENT_METHODS, estimate_gradient
from .hessian import HESSIAN_METHODS, estimate_hessian
from .objectives import ComparisonOracle, Objective
from .sampling import RandomSource

__all__ = [
    "EstimatorSpec",
    "TrialStatistics",
    "TrialError",
    "spectral_norm",
    "errors",
    "run_trials",
    "pearson",
]


def spectral_norm(M, sym_tol: float = 1e-10) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > sym_tol * scale:
        raise ParameterError("spectral_norm expects a symmetric matrix")
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(max(abs(w[0]), abs(w[-1])))


def _cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0, True
    return float(np.dot(a, b) / (na * nb)), False


def errors(estimate, truth) -> dict:
    """Distances between an estimate and the truth.

    Vectors give ``l2`` and ``cosine`` (0 with ``degenerate=True`` when either
    norm vanishes). Matrices give ``frobenius`` and ``spectral``.
    """
    est = np.asarray(estimate, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.shape != tru.shape:
        raise ParameterError(f"shape mismatch: {est.shape} vs {tru.shape}")
    diff = est - tru
    if est.ndim == 1:
        cos, degenerate = _cosine(est, tru)
        return {"l2": float(np.linalg.norm(diff)), "cosine": cos, "degenerate": degenerate}
    if est.ndim == 2:
        return {"frobenius": float(np.linalg.norm(diff)), "spectral": spectral_norm(diff)}
    raise ParameterError("estimates must be vectors or matrices")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run: ``kind`` is ``"gradient"`` or ``"hessian"``."""

    kind: str
    method: str
    k: int
    delta: float
    sparsity: float = math.inf

    def __post_init__(self):
        if self.kind == "gradient":
            valid = GRADIENT_METHODS
        elif self.kind == "hessian":
            valid = HESSIAN_METHODS
        else:
            raise ParameterError(f"kind must be 'gradient' or 'hessian', got {self.kind!r}")
        if self.method not in valid:
            raise ParameterError(f"unknown {self.kind} method {self.method!r}; choose from {valid}")

    @property
    def deterministic(self) -> bool:
        return self.method == "entrywise"


class TrialError(ZoestError):
    """An estimator failed inside :func:`run_trials`; ``trial`` is its index."""

    def __init__(self, trial, cause):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial
        self.cause = cause


@dataclass(frozen=True)
class TrialStatistics:
    """Aggregates over repeated estimator draws.

    ``error_*`` summarise the per-trial distance to the truth under
    ``metric`` (``l2`` for gradients, ``spectral`` for Hessians; the
    Frobenius errors are always kept in ``trial_errors["frobenius"]``).
    ``empirical_variance`` is the mean squared Euclidean/Frobenius deviation
    from ``mean_estimate`` and is ``nan`` for a single trial. For the
    comparison method the truth is the normalised gradient.
    """

    method: str
    kind: str
    n: int
    k: int
    delta: float
    trials: int
    metric: str
    mean_estimate: np.ndarray
    truth: np.ndarray
    empirical_bias: float
    empirical_variance: float
    error_mean: float
    error_std: float
    error_min: float
    error_max: float
    mean_cosine: float | None
    total_evals: int
    base_seed: int
    trial_errors: dict = field(default_factory=dict)

    @property
    def error_stderr(self) -> float:
        return self.error_std / math.sqrt(self.trials)

    def decomposition_holds(self, n_se: float = 3.0) -> bool:
        """``error_mean <= sqrt(variance) + bias + n_se * stderr``."""
        var = 0.0 if math.isnan(self.empirical_variance) else self.empirical_variance
        return self.error_mean <= math.sqrt(var) + self.empirical_bias + n_se * self.error_stderr + 1e-300


def _fsum_mean(stack):
    # compensated, trial-ordered mean along axis 0, shifted by the first draw so
    # that identical draws average to themselves exactly
    flat = stack.reshape(stack.shape[0], -1)
    shift = flat[0]
    out = shift + np.array([math.fsum(col) for col in (flat - shift).T]) / stack.shape[0]
    return out.reshape(stack.shape[1:])


def _stats(values):
    v = np.asarray(values, dtype=float)
    mean = math.fsum(v) / v.size
    std = math.sqrt(math.fsum((v - mean) ** 2) / v.size)
    return mean, std, float(v.min()), float(v.max())


def run_trials(spec: EstimatorSpec, objective: Objective, x, trials: int,
               base_seed: int = 0, truth=None) -> TrialStatistics:
    """Run ``spec`` ``trials`` times at ``x`` and aggregate.

    Trial ``t`` uses ``RandomSource(base_seed, t)``. ``truth`` defaults to the
    objective's exact gradient or Hessian. The standard deviation is the
    population one (divides by ``trials``).
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    x = np.asarray(x, dtype=float)
    if truth is None:
        truth = objective.grad_exact(x) if spec.kind == "gradient" else objective.hess_exact(x)
    truth = np.asarray(truth, dtype=float)
    if spec.kind == "gradient" and spec.method == "comparison":
        norm = np.linalg.norm(truth)
        truth = truth / norm if norm > 0 else truth
        target = ComparisonOracle(objective)
    else:
        target = objective

    draws, total_evals = [], 0
    for t in range(trials):
        rng = RandomSource(base_seed, t)
        try:
            if spec.kind == "gradient":
                est = estimate_gradient(spec.method, target, x, spec.k, spec.delta, rng,
                                        s=spec.sparsity)
                draws.append(est.vector)
            else:
                est = estimate_hessian(spec.method, objective, x, spec.k, spec.delta, rng)
                draws.append(est.matrix)
        except ZoestError as exc:
            raise TrialError(t, exc) from exc
        total_evals += est.n_evals

    stack = np.stack(draws)
    per_trial = [errors(d, truth) for d in draws]
    mean_est = _fsum_mean(stack)
    dev = (stack - mean_est).reshape(trials, -1)
    variance = (math.fsum(np.einsum("ti,ti->t", dev, dev)) / trials) if trials >= 2 else math.nan

    if spec.kind == "gradient":
        metric = "l2"
        bias = float(np.linalg.norm(mean_est - truth))
        trial_errors = {"l2": np.array([e["l2"] for e in per_trial]),
                        "cosine": np.array([e["cosine"] for e in per_trial])}
        mean_cos = math.fsum(trial_errors["cosine"]) / trials
    else:
        metric = "spectral"
        bias = spectral_norm(mean_est - truth)
        trial_errors = {"spectral": np.array([e["spectral"] for e in per_trial]),
                        "frobenius": np.array([e["frobenius"] for e in per_trial])}
        mean_cos = None
    e_mean, e_std, e_min, e_max = _stats(trial_errors[metric])

    return TrialStatistics(
        method=spec.method, kind=spec.kind, n=objective.n, k=spec.k, delta=spec.delta,
        trials=trials, metric=metric, mean_estimate=mean_est, truth=truth,
        empirical_bias=bias, empirical_variance=variance, error_mean=e_mean,
        error_std=e_std, error_min=e_min, error_max=e_max, mean_cosine=mean_cos,
        total_evals=total_evals, base_seed=base_seed, trial_errors=trial_errors)


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.corrcoef(a, b)[0, 1])
