"""Closed-form variance and bias bounds, constant-free c(k) curves, sphere
moments, and finite-difference helpers that supply the derivative inputs.

The exact bound evaluators (``*_bound*``) are kept apart from the
c-curves, which drop constants and are meant only for shape overlays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .exceptions import ParameterError
from .sampling import as_random_source, sample_unit_sphere

__all__ = [
    "BoundInputs",
    "LOG_FLOOR",
    "grad_variance_bound",
    "grad_bias_bound_first_order",
    "grad_bias_bound_refined",
    "hess_variance_bound",
    "hess_variance_bound_terms",
    "hess_bias_bound_first_order",
    "hess_bias_bound_refined",
    "c_curve_grad",
    "c_curve_hess",
    "sphere_even_moment",
    "sphere_cross_fourth_moment",
    "third_derivative_contraction",
    "fourth_derivative_contraction",
    "directional_derivative",
    "estimate_smoothness_constant",
]

#: value returned by the c-curves when the log argument is zero
LOG_FLOOR = -300.0


@dataclass(frozen=True)
class BoundInputs:
    """Quantities feeding the bound evaluators.

    Norm fields are Euclidean for vectors and spectral for matrices, except
    ``hess_fro``. ``L1`` .. ``L6`` are the Lipschitz constants of the
    derivatives (``Lp`` bounds the ``p``-th derivative tensor). ``F_contract``
    is the vector ``sum_j d^3 f / dx_j dx_j dx_i`` at ``x`` and ``Ftilde_spec``
    the spectral norm of ``sum_m d^4 f / dx_m dx_m dx_i dx_j``.
    """

    n: int
    k: int
    delta: float
    grad_norm: float | None = None
    hess_spec: float | None = None
    hess_fro: float | None = None
    L1: float | None = None
    L2: float | None = None
    L3: float | None = None
    L4: float | None = None
    L5: float | None = None
    L6: float | None = None
    F_contract: np.ndarray | None = None
    Ftilde_spec: float | None = None

    def __post_init__(self):
        if not (1 <= self.k <= self.n):
            raise ParameterError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ParameterError("delta must be finite and nonnegative")
        for fld in fields(self):
            if fld.name in ("n", "k", "delta", "F_contract"):
                continue
            value = getattr(self, fld.name)
            if value is not None and not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{fld.name} must be finite and nonnegative, got {value}")
        if self.F_contract is not None:
            F = np.asarray(self.F_contract, dtype=float)
            if F.shape != (self.n,) or not np.all(np.isfinite(F)):
                raise ParameterError("F_contract must be a finite vector of length n")

    def require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ParameterError(f"bound needs {', '.join(missing)}")
        return [getattr(self, name) for name in names]


def grad_variance_bound(b: BoundInputs) -> float:
    """``(n/k - 1)|g|^2 + (L3 d^2/3)(n^2/k - n)|g| + L3^2 n^2 d^4 / (36 k)``."""
    g, L3 = b.require("grad_norm", "L3")
    n, k, d = b.n, b.k, b.delta
    return ((n / k - 1.0) * g * g
            + (L3 * d * d / 3.0) * (n * n / k - n) * g
            + L3 * L3 * n * n * d ** 4 / (36.0 * k))


def grad_bias_bound_first_order(b: BoundInputs) -> float:
    (L1,) = b.require("L1")
    return L1 * b.n * b.delta / (b.n + 1.0)


def grad_bias_bound_refined(b: BoundInputs) -> float:
    """``(d^2 / 2n) |F_contract| + d^3 L4 n / 24``."""
    F, L4 = b.require("F_contract", "L4")
    d, n = b.delta, b.n
    return d * d / (2.0 * n) * float(np.linalg.norm(F)) + d ** 3 * L4 * n / 24.0


def hess_variance_bound_terms(b: BoundInputs, c_a: float = 1.0, c_b: float = 1.0) -> dict:
    """Split the Hessian variance bound into its explicit part and the
    ``O(delta^4)`` remainder, whose constants are not pinned down.

    ``explicit = |H|_F^2 (n^2/k^2 - 1) + 2 d^2 L4 |H| (n^4/k^2 - n^2)`` and
    ``implicit = (c_a L6 n^2 |H| + c_b n^4 L4^2 / k^2) d^4``.
    """
    fro, spec, L4, L6 = b.require("hess_fro", "hess_spec", "L4", "L6")
    n, k, d = float(b.n), float(b.k), b.delta
    explicit = (fro * fro * (n * n / (k * k) - 1.0)
                + 2.0 * d * d * L4 * spec * (n ** 4 / (k * k) - n * n))
    implicit = (c_a * L6 * n * n * spec + c_b * n ** 4 * L4 * L4 / (k * k)) * d ** 4
    return {"explicit": explicit, "implicit": implicit, "total": explicit + implicit,
            "c_a": c_a, "c_b": c_b}


def hess_variance_bound(b: BoundInputs, c_a: float = 1.0, c_b: float = 1.0) -> float:
    return hess_variance_bound_terms(b, c_a, c_b)["total"]


def hess_bias_bound_first_order(b: BoundInputs) -> float:
    (L2,) = b.require("L2")
    return 2.0 * b.n * L2 * b.delta / (b.n + 1.0)


def hess_bias_bound_refined(b: BoundInputs) -> float:
    """``d^2 |Ftilde| / (n + 2) + 4 d^3 L5 n^2 / 15``."""
    Ft, L5 = b.require("Ftilde_spec", "L5")
    d, n = b.delta, b.n
    return d * d / (n + 2.0) * Ft + 4.0 * d ** 3 * L5 * n * n / 15.0


def _log10_floor(value):
    return math.log10(value) if value > 0 else LOG_FLOOR


def c_curve_grad(n: int, k: int, delta: float, grad_norm: float) -> float:
    """``lg(|g|^2 (n/k - 1) + d^2 (n^2/k - n)|g| + d^4 n^2 / k)``; :data:`LOG_FLOOR` at zero."""
    g = grad_norm
    arg = g * g * (n / k - 1.0) + delta ** 2 * (n * n / k - n) * g + delta ** 4 * n * n / k
    return _log10_floor(arg)


def c_curve_hess(n: int, k: int, delta: float, hess_fro: float, hess_spec: float) -> float:
    """``lg(|H|_F^2 (n^2/k^2 - 1) + 2 d^2 |H| (n^4/k^2 - n^2) + |H| n^4 d^4 / k^2)``."""
    n, k = float(n), float(k)
    arg = (hess_fro ** 2 * (n * n / (k * k) - 1.0)
           + 2.0 * delta ** 2 * hess_spec * (n ** 4 / (k * k) - n * n)
           + hess_spec * n ** 4 * delta ** 4 / (k * k))
    return _log10_floor(arg)


def sphere_even_moment(n: int, p: int) -> float:
    """``E[v_i^p]`` for ``v`` uniform on the unit sphere in R^n, ``p`` even."""
    if n < 1:
        raise ParameterError("n must be positive")
    if p < 2 or p % 2:
        raise ParameterError(f"p must be a positive even integer, got {p}")
    num = math.prod(range(p - 1, 0, -2))
    den = math.prod(range(n, n + p - 1, 2))
    return num / den


def sphere_cross_fourth_moment(n: int) -> float:
    """``E[v_i^2 v_j^2]`` for ``i != j``."""
    if n < 2:
        raise ParameterError("needs n >= 2")
    return 1.0 / (n * n + 2.0 * n)


# -- finite-difference helpers ---------------------------------------------


def _gradient_fn(f, h):
    if f.has_grad:
        return f.grad_exact
    eye = np.eye(f.n)

    def grad(x):
        vals = f.evaluate_many(np.concatenate([x + h * eye, x - h * eye]))
        return (vals[:f.n] - vals[f.n:]) / (2 * h)
    return grad


def _hessian_fn(f, h):
    if f.has_hess:
        return f.hess_exact
    from .hessian import hess_entrywise
    return lambda x: hess_entrywise(f, x, h).matrix


def third_derivative_contraction(f, x, h: float = 1e-3) -> np.ndarray:
    """``F_contract[i] = sum_j d^3 f / dx_j dx_j dx_i``: the Laplacian of the gradient.

    Second central differences of the gradient along each axis; the gradient
    is exact when the objective provides one, otherwise itself a central
    difference.
    """
    x = np.asarray(x, dtype=float)
    grad = _gradient_fn(f, h)
    g0 = grad(x)
    out = np.zeros(f.n)
    for j in range(f.n):
        e = np.zeros(f.n)
        e[j] = h
        out += (grad(x + e) - 2.0 * g0 + grad(x - e)) / (h * h)
    return out


def fourth_derivative_contraction(f, x, h: float = 1e-3) -> np.ndarray:
    """``Ftilde[i, j] = sum_m d^4 f / dx_m dx_m dx_i dx_j``: the Laplacian of the Hessian."""
    x = np.asarray(x, dtype=float)
    hess = _hessian_fn(f, h)
    H0 = hess(x)
    out = np.zeros((f.n, f.n))
    for m in range(f.n):
        e = np.zeros(f.n)
        e[m] = h
        out += (hess(x + e) - 2.0 * H0 + hess(x - e)) / (h * h)
    return 0.5 * (out + out.T)


def directional_derivative(f, X, U, p: int, h: float) -> np.ndarray:
    """``d^p/dt^p f(x + t u)`` at ``t = 0`` for paired rows of ``X`` and ``U``.

    Central ``p``-th difference with offsets ``(p/2 - i) h``, second-order
    accurate in ``h``.
    """
    X = np.atleast_2d(X)
    U = np.atleast_2d(U)
    total = np.zeros(X.shape[0])
    for i in range(p + 1):
        coef = (-1) ** i * math.comb(p, i)
        total += coef * f.evaluate_many(X + (p / 2.0 - i) * h * U)
    return total / h ** p


def estimate_smoothness_constant(f, p: int, center, radius: float, n_points: int = 64,
                                 n_directions: int = 64, h: float | None = None,
                                 rng=None) -> float:
    """Estimate ``max |d^p f(y)[u]|`` over points ``y`` in a ball and unit ``u``.

    Points are the centre plus ``n_points`` uniform draws from the ball;
    directions are the coordinate axes, the normalised all-ones vector and
    ``n_directions`` uniform sphere draws. This is a lower estimate of the
    true supremum and is meant for diagnostics and tests. The default step
    ``h`` is ``1e-2`` for ``p <= 2`` and ``2e-2`` otherwise, where roundoff in
    the ``p``-th difference starts to dominate.
    """
    if p < 1:
        raise ParameterError("p must be at least 1")
    rng = as_random_source(rng)
    n = f.n
    center = np.asarray(center, dtype=float)
    if h is None:
        h = 1e-2 if p <= 2 else 2e-2
    dirs = np.concatenate([np.eye(n), np.full((1, n), 1.0 / math.sqrt(n)),
                           sample_unit_sphere(n, rng, size=n_directions)])
    radii = radius * rng.generator.random(n_points) ** (1.0 / n)
    pts = np.concatenate([center[None, :],
                          center + radii[:, None] * sample_unit_sphere(n, rng, size=n_points)])
    best = 0.0
    for y in pts:
        vals = directional_derivative(f, np.broadcast_to(y, dirs.shape), dirs, p, h)
        best = max(best, float(np.max(np.abs(vals))))
    return best
