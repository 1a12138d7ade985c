"""Hessian estimates: spectral errors of frame, Stein and coordinate schemes."""
import math

import numpy as np

from zoest import EstimatorSpec, make_paper_test_function, run_trials

n = 30
f = make_paper_test_function(n)
x = np.full(n, math.pi / 4)
H = f.hess_exact(x)
print("spectral norm of the true Hessian: %.4f" % np.max(np.abs(np.linalg.eigvalsh(H))))

for method, k in [("stiefel", 5), ("stiefel", 30), ("gaussian_stein", 30), ("entrywise", 30)]:
    st = run_trials(EstimatorSpec("hessian", method, k, 0.01), f, x, trials=5)
    fro = np.mean(st.trial_errors["frobenius"])
    print(f"{method:15s} k={k:3d} spectral {st.error_mean:.3e} frobenius {fro:.3e} "
          f"evals/trial {st.total_evals // st.trials}")
