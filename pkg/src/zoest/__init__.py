"""Zeroth-order gradient and Hessian estimators built on random orthonormal
frames, with the usual baselines, closed-form variance/bias bounds and a
Monte Carlo benchmark harness."""

from .bounds import *  # noqa: F401,F403
from .exceptions import (
    EvaluationError,
    ParameterError,
    SamplingError,
    SingularMatrixError,
    ZoestError,
)
from .experiments import *  # noqa: F401,F403
from .gradient import *  # noqa: F401,F403
from .hessian import *  # noqa: F401,F403
from .metrics import *  # noqa: F401,F403
from .objectives import *  # noqa: F401,F403
from .sampling import *  # noqa: F401,F403

__version__ = "0.1.0"
