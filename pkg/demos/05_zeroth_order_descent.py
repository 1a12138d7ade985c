"""Gradient descent driven only by function values."""
import numpy as np

from zoest import make_quadratic, zo_gradient_descent

n = 20
gen = np.random.default_rng(3)
Q = np.linalg.qr(gen.standard_normal((n, n)))[0]
A = Q @ np.diag(np.linspace(0.2, 2.0, n)) @ Q.T
f = make_quadratic(A, gen.standard_normal(n))
x0 = np.ones(n)

# the estimate carries a factor n/k, so its variance grows as k shrinks and the
# step size has to shrink with it
for k in (1, 5, 20):
    traj = zo_gradient_descent(f, x0, eta=0.4 * k / n, steps=200, k=k, delta=1e-3, seed=0)
    last = traj[-1]
    print(f"k={k:2d} eta={0.4 * k / n:.2f}: f {traj[0]['f']:9.4f} -> {last['f']:9.4f} after {last['n_evals']} evaluations")
