"""Finite-difference Hessian estimators.

All outputs are exactly symmetric: the stochastic estimators assemble
``M + M.T`` and the entry-wise estimator mirrors its upper triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .gradient import _check_delta, _check_k, _check_point
from .objectives import Objective, evaluate_checked
from .sampling import as_random_source, sample_standard_gaussian, sample_stiefel, sample_unit_sphere

__all__ = [
    "HESSIAN_METHODS",
    "HessianEstimate",
    "hess_stiefel",
    "hess_spherical",
    "hess_gaussian_stein",
    "hess_entrywise",
    "estimate_hessian",
]

HESSIAN_METHODS = ("stiefel", "spherical", "gaussian_stein", "entrywise")

# bound on the number of stencil points materialised at once
_MAX_BATCH_POINTS = 1 << 18


@dataclass(frozen=True)
class HessianEstimate:
    matrix: np.ndarray
    method: str
    k: int
    delta: float
    n_evals: int
    seed: int | None = None
    stream: int | None = None


def _four_point_differences(f, x, V, W, delta):
    """``D[i, j] = f(x+dv_i+dw_j) - f(x-dv_i+dw_j) - f(x+dv_i-dw_j) + f(x-dv_i-dw_j)``.

    ``V`` and ``W`` hold directions as rows. The grid is processed in blocks
    of rows of ``V``; block order is fixed, so results do not depend on the
    batch size.
    """
    kv, n = V.shape
    kw = W.shape[0]
    D = np.empty((kv, kw))
    rows_per_block = max(1, _MAX_BATCH_POINTS // (4 * kw))
    dV, dW = delta * V, delta * W
    for start in range(0, kv, rows_per_block):
        stop = min(kv, start + rows_per_block)
        a = dV[start:stop, None, :]
        b = dW[None, :, :]
        pts = np.stack([x + a + b, x - a + b, x + a - b, x - a - b])
        vals = evaluate_checked(f, pts.reshape(-1, n)).reshape(4, stop - start, kw)
        D[start:stop] = vals[0] - vals[1] - vals[2] + vals[3]
    return D


def _double_frame_estimate(D, V, W, scale):
    # scale * sum_ij D_ij (v_i w_j^T + w_j v_i^T)
    M = V.T @ D @ W
    return scale * (M + M.T)


def hess_stiefel(f: Objective, x, k: int, delta: float, rng=None) -> HessianEstimate:
    """Hessian estimate from two independent Stiefel frames ``[v_i]``, ``[w_j]``.

    ``(n^2 / (8 delta^2 k^2)) sum_{i,j} D_ij (v_i w_j^T + w_j v_i^T)`` with the
    four-point difference ``D_ij``. Uses ``4 k^2`` evaluations; exact on
    quadratics when ``k == n``.
    """
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n)
    rng = as_random_source(rng)
    V = sample_stiefel(n, k, rng).T
    W = sample_stiefel(n, k, rng).T
    D = _four_point_differences(f, x, V, W, delta)
    H = _double_frame_estimate(D, V, W, n * n / (8.0 * delta * delta * k * k))
    return HessianEstimate(H, "stiefel", k, delta, 4 * k * k, rng.seed, rng.stream_id)


def hess_spherical(f: Objective, x, k: int, delta: float, rng=None) -> HessianEstimate:
    """Four-point estimator with i.i.d. uniform sphere directions.

    The prefactor is ``n^2 / (8 k delta^2)``: one factor of ``k``, not
    ``k^2``, although ``k^2`` terms are summed. The estimator therefore has
    expectation close to ``k`` times the Hessian when ``k > 1``; at ``k = 1``
    it coincides with :func:`hess_stiefel`.
    """
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n, upper=False)
    rng = as_random_source(rng)
    V = sample_unit_sphere(n, rng, size=k)
    W = sample_unit_sphere(n, rng, size=k)
    D = _four_point_differences(f, x, V, W, delta)
    H = _double_frame_estimate(D, V, W, n * n / (8.0 * k * delta * delta))
    return HessianEstimate(H, "spherical", k, delta, 4 * k * k, rng.seed, rng.stream_id)


def hess_gaussian_stein(f: Objective, x, k: int, delta: float, rng=None) -> HessianEstimate:
    """Stein-identity estimator from ``k**2`` Gaussian directions.

    ``(n / (2 k^2 delta^2)) sum_i (f(x + u_i) - 2 f(x) + f(x - u_i)) (v_i v_i^T - I)``
    with ``u_i = delta v_i / sqrt(n)``, ``v_i ~ N(0, I)``. Uses ``2 k^2 + 1``
    evaluations.
    """
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    k = _check_k(k, n, upper=False)
    rng = as_random_source(rng)
    m = k * k
    V = sample_standard_gaussian(n, rng, size=m)
    step = delta / math.sqrt(n)
    pts = np.concatenate([x[None, :], x + step * V, x - step * V])
    vals = evaluate_checked(f, pts)
    d = vals[1:m + 1] - 2.0 * vals[0] + vals[m + 1:]
    M = (V.T * d) @ V - math.fsum(d) * np.eye(n)
    H = (n / (2.0 * m * delta * delta)) * 0.5 * (M + M.T)
    return HessianEstimate(H, "gaussian_stein", k, delta, 2 * m + 1, rng.seed, rng.stream_id)


def hess_entrywise(f: Objective, x, delta: float) -> HessianEstimate:
    """Coordinate four-point stencil on the upper triangle, mirrored.

    Diagonal entries use the same formula with ``i == j`` (points
    ``x +- 2 delta e_i``). ``4 n (n + 1) / 2`` evaluations.
    """
    x = _check_point(f, x)
    delta = _check_delta(delta)
    n = f.n
    iu, ju = np.triu_indices(n)
    m = iu.size
    vals = np.empty((4, m))
    block = max(1, _MAX_BATCH_POINTS // (4 * n))
    for start in range(0, m, block):
        stop = min(m, start + block)
        rows = np.arange(stop - start)
        pts = np.broadcast_to(x, (4, stop - start, n)).copy()
        for s, (si, sj) in enumerate(((1, 1), (-1, 1), (1, -1), (-1, -1))):
            pts[s, rows, iu[start:stop]] += si * delta
            pts[s, rows, ju[start:stop]] += sj * delta
        vals[:, start:stop] = evaluate_checked(f, pts.reshape(-1, n)).reshape(4, stop - start)
    entries = (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * delta * delta)
    H = np.zeros((n, n))
    H[iu, ju] = entries
    H[ju, iu] = entries
    return HessianEstimate(H, "entrywise", n, delta, 4 * m)


def estimate_hessian(method: str, f: Objective, x, k: int, delta: float, rng=None) -> HessianEstimate:
    if method == "stiefel":
        return hess_stiefel(f, x, k, delta, rng)
    if method == "spherical":
        return hess_spherical(f, x, k, delta, rng)
    if method == "gaussian_stein":
        return hess_gaussian_stein(f, x, k, delta, rng)
    if method == "entrywise":
        return hess_entrywise(f, x, delta)
    raise ParameterError(f"unknown Hessian method {method!r}; choose from {HESSIAN_METHODS}")
