"""devroye-lab: statistical estimators for bounded chaotic processes.

Library + CLI covering covariance estimation, integrated periodograms,
correlation dimension, empirical-measure Kantorovich convergence, kernel
density estimation, shadowing functionals and the almost-sure CLT, each
with a Monte Carlo harness checking the corresponding variance bound
var(K) <= D * sum L_j^2 for separately Holder functionals.
"""

__version__ = "0.1.0"

from .process import MapSpec, Trajectory, generate_trajectory, make_map, sample_ensemble
from .observables import Observable, make_observable

__all__ = [
    "MapSpec",
    "Trajectory",
    "Observable",
    "generate_trajectory",
    "make_map",
    "make_observable",
    "sample_ensemble",
    "__version__",
]
