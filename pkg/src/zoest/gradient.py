"""Finite-difference gradient estimators.

Each estimator takes an :class:`~zoest.objectives.Objective`, a point, a
granularity ``delta`` and (for the stochastic ones) a
:class:`~zoest.sampling.RandomSource`, and returns a :class:`GradientEstimate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .objectives import ComparisonOracle, Objective, evaluate_checked
from .sampling import (
    RandomSource,
    as_random_source,
    sample_sparse_rademacher,
    sample_standard_gaussian,
    sample_stiefel,
    sample_unit_sphere,
)

__all__ = [
    "GRADIENT_METHODS",
    "GradientEstimate",
    "grad_stiefel",
    "grad_spherical",
    "grad_gaussian",
    "grad_rademacher",
    "grad_comparison",
    "grad_entrywise",
    "l1_l2_linear_max",
    "estimate_gradient",
]

GRADIENT_METHODS = ("stiefel", "spherical", "gaussian", "rademacher", "comparison", "entrywise")


@dataclass(frozen=True)
class GradientEstimate:
    """An estimated gradient and how it was produced.

    ``n_evals`` counts objective evaluations, or oracle queries for the
    comparison method. ``degenerate`` is set when the comparison oracle
    answered 0 on every direction and the estimate is the zero vector.
    """

    vector: np.ndarray
    method: str
    k: int
    delta: float
    n_evals: int
    seed: int | None = None
    stream: int | None = None
    degenerate: bool = False


def _check_point(f, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ParameterError(f"x must have shape ({f.n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("x must be finite")
    return x


def _check_delta(delta):
    if not (isinstance(delta, (int, float, np.floating)) and math.isfinite(delta) and delta > 0):
        raise ParameterError(f"delta must be a positive finite number, got {delta!r}")
    return float(delta)


def _check_k(k, n, upper=True):
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1 or (upper and k > n):
        bound = f"1 <= k <= {n}" if upper else "k >= 1"
        raise ParameterError(f"k must satisfy {bound}, got {k!r}")
    return int(k)


def _central_differences(f, x, directions, step):
    # rows of `directions` are unit (or Gaussian) directions; returns f(x+s d) - f(x-s d)
    k = directions.shape[0]
    pts = np.concatenate([x + step * directions, x - step * directions])
    vals = evaluate_checked(f, pts)
    return vals[:k] - vals[k:]


def grad_stiefel(f: Objective, x, k: int, delta: float, rng=None) -> GradientEstimate:
    """Gradient estimate from ``k`` orthonormal random directions.

    ``(n / (2 delta k)) * sum_i (f(x + delta v_i) - f(x - delta v_i)) v_i`` with
    ``[v_1 .. v_k]`` uniform on the Stiefel manifold. Exact on linear
    functions when ``k == n``. Uses ``2k`` evaluations.
    """
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n)
    rng = as_random_source(rng)
    V = sample_stiefel(n, k, rng).T
    diffs = _central_differences(f, x, V, delta)
    g = (n / (2.0 * delta * k)) * (diffs @ V)
    return GradientEstimate(g, "stiefel", k, delta, 2 * k, rng.seed, rng.stream_id)


def grad_spherical(f: Objective, x, k: int, delta: float, rng=None) -> GradientEstimate:
    """Same estimator as :func:`grad_stiefel` with i.i.d. uniform sphere directions."""
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n, upper=False)
    rng = as_random_source(rng)
    V = sample_unit_sphere(n, rng, size=k)
    diffs = _central_differences(f, x, V, delta)
    g = (n / (2.0 * delta * k)) * (diffs @ V)
    return GradientEstimate(g, "spherical", k, delta, 2 * k, rng.seed, rng.stream_id)


def grad_gaussian(f: Objective, x, k: int, delta: float, rng=None) -> GradientEstimate:
    """Gaussian-smoothing estimator; steps are ``delta * v / sqrt(n)`` with ``v ~ N(0, I)``."""
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n, upper=False)
    rng = as_random_source(rng)
    V = sample_standard_gaussian(n, rng, size=k)
    diffs = _central_differences(f, x, V, delta / math.sqrt(n))
    g = (math.sqrt(n) / (2.0 * k * delta)) * (diffs @ V)
    return GradientEstimate(g, "gaussian", k, delta, 2 * k, rng.seed, rng.stream_id)


def grad_rademacher(f: Objective, x, k: int, delta: float, rng=None) -> GradientEstimate:
    """One-sided estimate along a single ``k``-sparse Rademacher vector ``z``.

    ``g_i = z_i (f(x + delta z) - f(x)) / delta``; the whole vector ``z`` is
    used as the perturbation. Two evaluations.
    """
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n)
    rng = as_random_source(rng)
    z = sample_sparse_rademacher(n, k, rng).to_dense()
    vals = evaluate_checked(f, np.stack([x + delta * z, x]))
    g = z * ((vals[0] - vals[1]) / delta)
    return GradientEstimate(g, "rademacher", k, delta, 2, rng.seed, rng.stream_id)


def l1_l2_linear_max(c, s=math.inf, tol: float = 1e-12) -> np.ndarray:
    """Maximise ``<c, g>`` over ``{g : ||g||_1 <= sqrt(s), ||g||_2 <= 1}``.

    The maximiser is a normalised soft-thresholding of ``c``. The threshold
    ``lam`` is zero when the l1 budget is slack; otherwise it is located by
    bisection on ``||S_lam(c)||_1 / ||S_lam(c)||_2 = sqrt(s)``, keeping the
    feasible end of the bracket. When the budget ``sqrt(s)`` is below the
    square root of the number of entries tied at ``max|c|`` (always the case
    for ``s < 1``) the l2 ball is slack and the budget is split evenly over
    those tied entries.

    Parameters
    ----------
    c : array_like
    s : float
        Sparsity parameter, ``s > 0``; ``math.inf`` removes the l1 constraint.
    tol : float
        Bisection stops once the l1 slack is below ``tol``.
    """
    c = np.asarray(c, dtype=float).ravel()
    if not (s > 0):
        raise ParameterError(f"sparsity parameter must be positive, got {s!r}")
    cnorm = np.linalg.norm(c)
    if cnorm == 0:
        return np.zeros_like(c)
    r = math.sqrt(s)
    if math.isinf(r) or np.abs(c).sum() / cnorm <= r:
        return c / cnorm

    a = np.abs(c)
    amax = a.max()
    ties = a == amax
    m = int(np.count_nonzero(ties))
    if m >= r * r:
        g = np.zeros_like(c)
        g[ties] = np.sign(c[ties]) * (r / m)
        return g

    def ratio(lam):
        t = np.maximum(a - lam, 0.0)
        return t.sum() / np.linalg.norm(t)

    lo, hi = 0.0, amax
    # ratio(lo) > r; ratio tends to sqrt(m) < r as lam -> amax
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ratio(mid) > r:
            lo = mid
        else:
            hi = mid
            if r - ratio(hi) <= tol:
                break
    t = np.maximum(a - hi, 0.0)
    return np.sign(c) * t / np.linalg.norm(t)


def grad_comparison(oracle: ComparisonOracle, x, k: int, delta: float, s=math.inf,
                    rng=None) -> GradientEstimate:
    """Direction estimate from ``k`` sign comparisons ``sign(f(x + delta v_i) - f(x))``.

    Returns the maximiser of ``<sum_i z_i v_i, g>`` over the l1/l2 feasible
    set (see :func:`l1_l2_linear_max`); it estimates ``grad f / ||grad f||``.
    If every comparison ties, the zero vector is returned with
    ``degenerate=True``.
    """
    x = _check_point(oracle.objective, x)
    delta = _check_delta(delta)
    n = oracle.n
    k = _check_k(k, n, upper=False)
    rng = as_random_source(rng)
    V = sample_unit_sphere(n, rng, size=k)
    z = oracle.compare_many(x + delta * V, np.broadcast_to(x, V.shape))
    degenerate = not np.any(z)
    g = np.zeros(n) if degenerate else l1_l2_linear_max(z @ V, s)
    return GradientEstimate(g, "comparison", k, delta, k, rng.seed, rng.stream_id,
                            degenerate=degenerate)


def grad_entrywise(f: Objective, x, delta: float) -> GradientEstimate:
    """Coordinate central differences; ``2n`` evaluations, no randomness."""
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    diffs = _central_differences(f, x, np.eye(n), delta)
    return GradientEstimate(diffs / (2.0 * delta), "entrywise", n, delta, 2 * n)


def estimate_gradient(method: str, f, x, k: int, delta: float, rng=None,
                      s=math.inf) -> GradientEstimate:
    """Dispatch by method name. ``f`` must be a ComparisonOracle for ``comparison``."""
    if method == "stiefel":
        return grad_stiefel(f, x, k, delta, rng)
    if method == "spherical":
        return grad_spherical(f, x, k, delta, rng)
    if method == "gaussian":
        return grad_gaussian(f, x, k, delta, rng)
    if method == "rademacher":
        return grad_rademacher(f, x, k, delta, rng)
    if method == "comparison":
        oracle = f if isinstance(f, ComparisonOracle) else ComparisonOracle(f)
        return grad_comparison(oracle, x, k, delta, s, rng)
    if method == "entrywise":
        return grad_entrywise(f, x, delta)
    raise ParameterError(f"unknown gradient method {method!r}; choose from {GRADIENT_METHODS}")
