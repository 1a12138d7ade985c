"""Comparing gradient estimators on the exp-plus-sines test function."""
import numpy as np

from zoest import EstimatorSpec, make_paper_test_function, run_trials

n = 100
f = make_paper_test_function(n)
x = np.zeros(n)

print(f"{'method':12s} {'k':>4s} {'mean l2 error':>14s} {'cosine':>8s} {'evals':>7s}")
for method, k in [("stiefel", 10), ("spherical", 10), ("gaussian", 10), ("rademacher", 10),
                  ("stiefel", 100), ("entrywise", 100), ("comparison", 100)]:
    st = run_trials(EstimatorSpec("gradient", method, k, 0.01), f, x, trials=10)
    print(f"{method:12s} {k:4d} {st.error_mean:14.4e} {st.mean_cosine:8.3f} {st.total_evals:7d}")

# with a full frame the random directions span R^n and the error is pure bias,
# which falls like delta^2
for delta in (0.1, 0.01, 0.001):
    st = run_trials(EstimatorSpec("gradient", "stiefel", n, delta), f, x, trials=5)
    print(f"k=n  delta={delta:<6g} error {st.error_mean:.3e}")
