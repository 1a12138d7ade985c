"""Black-box objectives with evaluation accounting, built-in test functions,
and the comparison oracle.

Plain-text parameter files use one matrix row per line with
whitespace-separated decimals (``numpy.loadtxt`` format). A linear objective
reads a single row ``c``; a quadratic reads ``n`` rows of ``A`` followed by a
final row ``b``.
"""

from __future__ import annotations

import threading
from typing import Callable

import numpy as np

from .exceptions import EvaluationError, ParameterError

__all__ = [
    "Objective",
    "ComparisonOracle",
    "compare",
    "make_paper_test_function",
    "make_linear",
    "make_quadratic",
    "load_objective",
    "evaluate_checked",
]


class Objective:
    """A real-valued function on R^n that counts its evaluations.

    Parameters
    ----------
    n : int
        Input dimension.
    func : callable
        Maps an array of shape ``(m, n)`` to an array of ``m`` values.
        Batched evaluation lets the estimators hand over all stencil points at
        once; the counter still advances by one per point.
    grad, hess : callable, optional
        Exact derivatives ``x -> (n,)`` and ``x -> (n, n)``, used as ground truth.
    name : str
    """

    def __init__(self, n: int, func: Callable, grad: Callable | None = None,
                 hess: Callable | None = None, name: str = "objective"):
        if n < 1:
            raise ParameterError("dimension must be positive")
        self.n = int(n)
        self._func = func
        self._grad = grad
        self._hess = hess
        self.name = name
        self._count = 0
        self._lock = threading.Lock()

    @property
    def eval_count(self) -> int:
        return self._count

    @property
    def has_grad(self) -> bool:
        return self._grad is not None

    @property
    def has_hess(self) -> bool:
        return self._hess is not None

    def reset_counter(self):
        with self._lock:
            self._count = 0

    def evaluate_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ParameterError(f"expected points of shape (m, {self.n}), got {X.shape}")
        values = np.asarray(self._func(X), dtype=float).reshape(X.shape[0])
        with self._lock:
            self._count += X.shape[0]
        return values

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ParameterError(f"expected a point of shape ({self.n},), got {x.shape}")
        return float(self.evaluate_many(x[None, :])[0])

    def grad_exact(self, x) -> np.ndarray:
        if self._grad is None:
            raise NotImplementedError(f"{self.name} has no exact gradient")
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def hess_exact(self, x) -> np.ndarray:
        if self._hess is None:
            raise NotImplementedError(f"{self.name} has no exact Hessian")
        return np.asarray(self._hess(np.asarray(x, dtype=float)), dtype=float)

    def __repr__(self):
        return f"Objective(name={self.name!r}, n={self.n})"


def evaluate_checked(f: Objective, X) -> np.ndarray:
    """Evaluate ``f`` on the rows of ``X``; raise on the first non-finite value."""
    values = f.evaluate_many(X)
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        point = np.array(X[i], dtype=float)
        raise EvaluationError(
            f"{f.name} returned {values[i]} at point {np.array2string(point, threshold=8)}",
            point=point)
    return values


class ComparisonOracle:
    """Sign-only access to an objective: ``compare(x, y) = sign(f(x) - f(y))``.

    Ties return 0. ``calls`` counts oracle queries (one per comparison); the
    wrapped objective's own counter still sees two evaluations per query.
    """

    def __init__(self, objective: Objective):
        self.objective = objective
        self.n = objective.n
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def compare_many(self, X, Y) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape != Y.shape:
            X, Y = np.broadcast_arrays(X, Y)
        fx = evaluate_checked(self.objective, X)
        fy = evaluate_checked(self.objective, Y)
        with self._lock:
            self._calls += X.shape[0]
        return np.sign(fx - fy)

    def __call__(self, x, y) -> int:
        return int(self.compare_many(x, y)[0])


def compare(oracle: ComparisonOracle, x, y) -> int:
    return oracle(x, y)


def make_paper_test_function(n: int) -> Objective:
    """``f(x) = exp((x_1 - 1)(x_2 + 2)) + sum_j sin(x_j)`` with exact derivatives."""
    if n < 2:
        raise ParameterError("the test function needs n >= 2")

    def func(X):
        return np.exp((X[:, 0] - 1.0) * (X[:, 1] + 2.0)) + np.sin(X).sum(axis=1)

    def grad(x):
        e = np.exp((x[0] - 1.0) * (x[1] + 2.0))
        g = np.cos(x)
        g[0] += (x[1] + 2.0) * e
        g[1] += (x[0] - 1.0) * e
        return g

    def hess(x):
        a, b = x[1] + 2.0, x[0] - 1.0
        e = np.exp(b * a)
        H = np.diag(-np.sin(x))
        H[0, 0] += a * a * e
        H[1, 1] += b * b * e
        H[0, 1] += (1.0 + a * b) * e
        H[1, 0] = H[0, 1]
        return H

    return Objective(n, func, grad, hess, name="paper-test")


def make_linear(c) -> Objective:
    c = np.array(c, dtype=float).ravel()
    if not np.all(np.isfinite(c)):
        raise ParameterError("linear coefficients must be finite")
    c.setflags(write=False)
    n = c.size
    return Objective(n, lambda X: X @ c, lambda x: c.copy(), lambda x: np.zeros((n, n)),
                     name="linear")


def make_quadratic(A, b=None) -> Objective:
    """``f(x) = x^T A x / 2 + b^T x`` for symmetric ``A``."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError("A must be square")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise ParameterError("A must be symmetric")
    n = A.shape[0]
    b = np.zeros(n) if b is None else np.array(b, dtype=float).ravel()
    if b.shape != (n,):
        raise ParameterError("b must have length n")
    A.setflags(write=False)
    b.setflags(write=False)

    def func(X):
        return 0.5 * np.einsum("mi,ij,mj->m", X, A, X) + X @ b

    return Objective(n, func, lambda x: A @ x + b, lambda x: A.copy(), name="quadratic")


def load_objective(name: str, n: int | None = None, params: str | None = None) -> Objective:
    """Build an objective by CLI name: ``paper-test``, ``linear`` or ``quadratic``."""
    if name == "paper-test":
        if n is None:
            raise ParameterError("paper-test requires --n")
        return make_paper_test_function(n)
    if name not in ("linear", "quadratic"):
        raise ParameterError(f"unknown function {name!r}; choose paper-test, linear or quadratic")
    if params is None:
        raise ParameterError(f"{name} requires a parameter file")
    data = np.loadtxt(params, ndmin=2)
    if name == "linear":
        if data.shape[0] != 1:
            raise ParameterError("linear parameter file must hold a single row c")
        obj = make_linear(data[0])
    else:
        m = data.shape[1]
        if data.shape[0] != m + 1:
            raise ParameterError("quadratic parameter file must hold n rows of A then one row b")
        obj = make_quadratic(data[:m], data[m])
    if n is not None and obj.n != n:
        raise ParameterError(f"parameter file has dimension {obj.n}, expected {n}")
    return obj
