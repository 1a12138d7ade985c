"""Variance bounds against measured variance, and the c(k) curve."""
import numpy as np

from zoest import (BoundInputs, RandomSource, estimate_smoothness_constant, grad_variance_bound,
                   make_paper_test_function, sweep_k)

n, delta = 50, 0.01
f = make_paper_test_function(n)
x = np.zeros(n)
g = f.grad_exact(x)
L3 = estimate_smoothness_constant(f, 3, x, radius=delta, rng=RandomSource(0))
print(f"|grad f(0)| = {np.linalg.norm(g):.4f}, estimated L3 = {L3:.3f}")

res = sweep_k(f, x, delta, trials=200, base_seed=1)
for k, st, lg, c in zip(res.ks, res.stats, res.lg_errors, res.c_values):
    bound = grad_variance_bound(BoundInputs(n, k, delta, grad_norm=float(np.linalg.norm(g)), L3=L3))
    print(f"k={k:3d} variance {st.empirical_variance:11.4e} bound {bound:11.4e} "
          f"lg error {lg:7.3f} c/2 {c / 2:7.3f}")
print(f"correlation between lg error and c/2: {res.correlation:.4f}")
