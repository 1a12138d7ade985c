"""Seedable random directions: Stiefel frames, sphere, Gaussian and sparse sign vectors.

Every sampler takes an explicit :class:`RandomSource`. A source wraps a
``numpy.random.Generator`` driven by PCG64 and keyed by ``(seed, stream_id)``
through ``numpy.random.SeedSequence``; different stream ids yield independent
substreams, so parallel Monte Carlo trials are reproducible no matter how
they are scheduled. Normal variates come from numpy's ziggurat sampler,
which is deterministic for a fixed numpy release.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import ParameterError, SamplingError, SingularMatrixError

__all__ = [
    "RandomSource",
    "as_random_source",
    "SparseSignVector",
    "gram_inverse_sqrt",
    "sample_stiefel",
    "sample_unit_sphere",
    "sample_standard_gaussian",
    "sample_sparse_rademacher",
]

_UINT64_MAX = 2**64 - 1

#: relative eigenvalue floor below which a Gram matrix is declared singular
SINGULAR_RTOL = 1e-12
#: number of fresh draws attempted after a singular Gram matrix
MAX_RESAMPLES = 3
#: Gram condition number above which the Newton-Schulz step is applied
POLISH_CONDITION = 1e3


class RandomSource:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The source is stateful: successive draws advance the underlying
    generator. Use :meth:`replay` to obtain a fresh copy that reproduces the
    same sequence from the start, and :meth:`substream` for an independent
    sibling stream under the same seed.
    """

    __slots__ = ("seed", "stream_id", "generator")

    def __init__(self, seed: int = 0, stream_id: int = 0):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            if not 0 <= int(value) <= _UINT64_MAX:
                raise ParameterError(f"{name} must fit in an unsigned 64-bit integer")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def replay(self) -> "RandomSource":
        return RandomSource(self.seed, self.stream_id)

    def substream(self, stream_id: int) -> "RandomSource":
        return RandomSource(self.seed, stream_id)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"


def as_random_source(rng) -> RandomSource:
    """Coerce ``None``, an int seed or a :class:`RandomSource`."""
    if rng is None:
        return RandomSource(0, 0)
    if isinstance(rng, RandomSource):
        return rng
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return RandomSource(int(rng), 0)
    raise ParameterError(f"cannot build a RandomSource from {type(rng).__name__}")


@dataclass(frozen=True)
class SparseSignVector:
    """A vector in R^n with ``k`` entries equal to +-1 and zeros elsewhere."""

    n: int
    support: np.ndarray
    signs: np.ndarray

    @property
    def k(self) -> int:
        return int(self.support.size)

    def to_dense(self) -> np.ndarray:
        z = np.zeros(self.n)
        z[self.support] = self.signs
        return z


def _check_dim(n, name="n"):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _check_frame_size(n, k):
    n = _check_dim(n)
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ParameterError(f"frame size k must satisfy 1 <= k <= n={n}, got {k!r}")
    return n, int(k)


def gram_inverse_sqrt(M, return_condition: bool = False):
    """Inverse square root of a symmetric positive-definite matrix.

    Computed from the symmetric eigendecomposition ``M = Q diag(w) Q^T`` as
    ``Q diag(w^{-1/2}) Q^T``. A leading batch dimension is accepted. With
    ``return_condition`` the largest eigenvalue ratio ``max w / min w`` over
    the batch is returned as well.

    Raises
    ------
    ParameterError
        If ``M`` is not square or not symmetric to within ``1e-12``.
    SingularMatrixError
        If the smallest eigenvalue is at most ``1e-12`` times the largest.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ParameterError(f"expected square matrices, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if M.size and np.max(np.abs(M - np.swapaxes(M, -1, -2))) > 1e-12 * scale:
        raise ParameterError("matrix is not symmetric")

    if M.ndim == 2 and M.shape[0] > 1:
        w, Q = scipy.linalg.eigh(M, driver="evd")
    else:
        w, Q = np.linalg.eigh(M)
    wmax = w[..., -1:]
    if np.any(w[..., :1] <= SINGULAR_RTOL * wmax) or np.any(wmax <= 0):
        raise SingularMatrixError("Gram matrix is numerically singular")
    R = (Q * w[..., None, :] ** -0.5) @ np.swapaxes(Q, -1, -2)
    if return_condition:
        return R, float(np.max(wmax[..., 0] / w[..., 0]))
    return R


def _polish(X):
    # One Newton-Schulz step toward the polar factor; squares the
    # orthonormality defect left by an ill-conditioned Gram matrix.
    G = np.swapaxes(X, -1, -2) @ X
    eye = np.eye(G.shape[-1])
    return X @ (1.5 * eye - 0.5 * G)


def sample_stiefel(n: int, k: int, rng: RandomSource, size: int | None = None) -> np.ndarray:
    """Draw a uniformly distributed ``n x k`` matrix with orthonormal columns.

    A Gaussian matrix ``U`` is orthonormalised as ``U (U^T U)^{-1/2}``, which
    yields the Haar measure on the Stiefel manifold; each column is marginally
    uniform on the unit sphere. QR with sign-corrected ``R`` would give the
    same law. A single Newton-Schulz step is applied afterwards to bring the
    orthonormality defect to rounding level when ``U`` is poorly conditioned.

    Parameters
    ----------
    n, k : int
        Ambient dimension and number of columns, ``1 <= k <= n``.
    rng : RandomSource
    size : int, optional
        Draw a stack of ``size`` independent frames, shape ``(size, n, k)``.

    Returns
    -------
    ndarray
        Read-only array of shape ``(n, k)`` (or ``(size, n, k)``).
    """
    n, k = _check_frame_size(n, k)
    gen = rng.generator
    shape = (n, k) if size is None else (int(size), n, k)
    for _ in range(MAX_RESAMPLES + 1):
        U = gen.standard_normal(shape)
        gram = np.swapaxes(U, -1, -2) @ U
        gram = 0.5 * (gram + np.swapaxes(gram, -1, -2))
        try:
            R, cond = gram_inverse_sqrt(gram, return_condition=True)
        except SingularMatrixError:
            continue
        X = U @ R
        # the unpolished defect stays below eps * cond, so well-conditioned
        # draws skip the extra two products
        if cond > POLISH_CONDITION:
            X = _polish(X)
        X.setflags(write=False)
        return X
    raise SamplingError(f"could not draw a well-conditioned St({n},{k}) frame "
                        f"after {MAX_RESAMPLES} resamples")


def sample_unit_sphere(n: int, rng: RandomSource, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) from the unit sphere in R^n (normalised Gaussians)."""
    n = _check_dim(n)
    gen = rng.generator
    shape = (n,) if size is None else (int(size), n)
    v = gen.standard_normal(shape)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    # a zero Gaussian vector has probability zero, but redraw rather than divide by it
    while np.any(norms == 0):
        bad = (norms == 0)[..., 0]
        v[bad] = gen.standard_normal((int(np.count_nonzero(bad)), n))
        norms = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / norms


def sample_standard_gaussian(n: int, rng: RandomSource, size: int | None = None) -> np.ndarray:
    n = _check_dim(n)
    shape = (n,) if size is None else (int(size), n)
    return rng.generator.standard_normal(shape)


def sample_sparse_rademacher(n: int, k: int, rng: RandomSource) -> SparseSignVector:
    """A uniformly supported ``k``-sparse vector with i.i.d. random signs."""
    n, k = _check_frame_size(n, k)
    gen = rng.generator
    support = np.sort(gen.choice(n, size=k, replace=False))
    signs = 2.0 * gen.integers(0, 2, size=k) - 1.0
    support.setflags(write=False)
    signs.setflags(write=False)
    return SparseSignVector(n=n, support=support, signs=signs)
