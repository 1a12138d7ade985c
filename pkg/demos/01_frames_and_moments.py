"""Random orthonormal frames and the sphere moments behind the estimators."""
import numpy as np

from zoest import RandomSource, moment_check, sample_stiefel, sample_unit_sphere

rng = RandomSource(0)

# a frame of 3 orthonormal directions in R^6
V = sample_stiefel(6, 3, rng)
print("V^T V =\n", np.round(V.T @ V, 12))

# every column on its own is a uniform point on the sphere, so the first
# coordinate of a column has the same law as that of a sphere draw
cols = np.array([sample_stiefel(6, 3, rng)[:, 2] for _ in range(20000)])
sph = sample_unit_sphere(6, rng, size=20000)
print("E[v1^2] frame column %.4f  sphere %.4f  exact %.4f" %
      (np.mean(cols[:, 0] ** 2), np.mean(sph[:, 0] ** 2), 1 / 6))

# fourth moments with Monte Carlo standard errors
for c in moment_check(10, 4, draws=200_000, seed=1):
    print(f"{c.name:14s} estimate {c.estimate:.5f}  exact {c.exact:.5f}  z {c.z:+.2f}")
