"""
Self-convergence of the reference solver

Nested grids halve dx and dt together; successive sup-differences on the
coarse nodes give the observed order log₂(e₁/e₂).
"""

import logging
from typing import Callable, Optional

import numpy as np

from ..errors import SolverError
from ..models.schemas import ProblemSpec, SelfConvergence
from ..problem.initial import truncation_window, validate_initial_decay
from ..settings import SolverSettings
from ..spectral.eigen import SpectralData, eigendecompose
from .reference import solve_reference, step_bounds

logger = logging.getLogger(__name__)

EXACT_THRESHOLD = 1e-12


def self_convergence(spec: ProblemSpec, eps: float, refinements: int = 3,
                     sd: Optional[SpectralData] = None, settings: Optional[SolverSettings] = None,
                     horizon: Optional[float] = None, base_cells: float = 0.05,
                     base_relaxation: float = 0.4,
                     initial: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> SelfConvergence:
    """
    Richardson study on `refinements` nested levels.

    Args:
        spec: problem instance
        eps: small parameter
        refinements: number of levels (≥ 3)
        horizon: final time (spec.T when omitted)
        base_cells: coarse spacing in ξ-units
        base_relaxation: coarse dt bound in units of ε²
        initial: optional x ↦ U(x, 0) override

    Returns:
        SelfConvergence with the order of the last pair, or the "exact"
        sentinel when the coarsest difference is at rounding level

    Raises:
        SolverError: "refinement inconclusive" when differences do not shrink
    """
    if refinements < 3:
        raise SolverError("self-convergence needs at least 3 levels")
    settings = settings or SolverSettings()
    sd = sd or eigendecompose(spec.L, spec.W)
    T = horizon if horizon is not None else spec.T

    centre, half = truncation_window(spec, validate_initial_decay(spec), eps, T, settings.decay_width)
    dx0 = base_cells * eps
    cells0 = int(np.ceil(2.0 * half / dx0))
    x_lo = centre - half

    bounds = step_bounds(spec, eps, dx0, 1.0, settings)
    dt0 = min(bounds['cfl'], bounds['nonlinear'], base_relaxation * eps * eps)
    dt0 = T / int(np.ceil(T / dt0))

    finals, dxs, dts = [], [], []
    for level in range(refinements):
        factor = 2 ** level
        dx = dx0 / factor
        x = x_lo + dx * np.arange(cells0 * factor + 1)
        field = solve_reference(spec, eps, x, [T], sd=sd, settings=settings,
                                initial=initial, step=dt0 / factor)
        finals.append(field.values[-1][::factor])
        dxs.append(dx)
        dts.append(dt0 / factor)

    # nodes the zero-inflow edges can reach are not compared
    margin = float(np.max(np.abs(spec.D))) * T + 50.0 * dx0
    x0 = x_lo + dx0 * np.arange(cells0 + 1)
    interior = (x0 >= x0[0] + margin) & (x0 <= x0[-1] - margin)
    if not np.any(interior):
        raise SolverError("truncated window too small for a self-convergence study")

    differences = [float(np.max(np.abs(finals[i][interior] - finals[i + 1][interior])))
                   for i in range(refinements - 1)]
    scale = max(float(np.max(np.abs(finals[-1][interior]))), np.finfo(float).tiny)
    logger.info(f"Self-convergence eps={eps:g}: differences {differences}")

    if differences[0] <= EXACT_THRESHOLD * scale:
        return SelfConvergence(eps=eps, differences=differences, dx=dxs, dt=dts, sentinel="exact")
    if any(b >= a for a, b in zip(differences, differences[1:])):
        raise SolverError(f"refinement inconclusive: differences {differences}")

    order = float(np.log2(differences[-2] / differences[-1]))
    return SelfConvergence(eps=eps, differences=differences, dx=dxs, dt=dts, order=order)
