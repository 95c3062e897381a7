"""
Critical-case asymptotics toolkit

Builds surge/boundary-function expansions for singularly perturbed weakly
nonlinear transport systems, solves the full stiff system as ground truth and
measures how the residual scales with the small parameter.
"""

__version__ = "0.3.0"

from .errors import (
    AsymptoticsError,
    ConfigError,
    SpectralError,
    ExpansionError,
    SolverError,
    PrinciplesError,
    HarnessError,
)

__all__ = [
    "__version__",
    "AsymptoticsError",
    "ConfigError",
    "SpectralError",
    "ExpansionError",
    "SolverError",
    "PrinciplesError",
    "HarnessError",
]
