"""
Defect of an approximate solution

    Op(U) = ε²(∂ₜU + D ∂ₓU) − L U − ε² F(U)

by centered differences in x and t, together with its projection onto the
kernel direction, (Op(U), h₀*).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import HarnessError
from ..expansion.assemble import ExpansionSet, assemble_field
from ..models.fields import SpaceTimeField
from ..models.schemas import ProblemSpec
from ..spectral.eigen import SpectralData

logger = logging.getLogger(__name__)


@dataclass
class DefectField:
    """Defect at the interior nodes of a sampled field"""
    x: np.ndarray
    times: np.ndarray
    values: np.ndarray
    kernel: Optional[np.ndarray] = None

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def kernel_sup(self) -> Optional[float]:
        if self.kernel is None:
            return None
        return float(np.max(np.abs(self.kernel))) if self.kernel.size else 0.0


def defect(field: SpaceTimeField, spec: ProblemSpec, sd: Optional[SpectralData] = None) -> DefectField:
    """
    Pointwise defect at every interior (x, t) node.

    Args:
        field: snapshots of U; at least three times and three points
        spec: operator, speeds and nonlinearity
        sd: spectral data; when given the kernel projection is added

    Raises:
        HarnessError: insufficient snapshots for time differencing
    """
    U = np.asarray(field.values, dtype=float)
    t = np.asarray(field.times, dtype=float)
    x = np.asarray(field.x_grid, dtype=float)
    if U.shape[0] < 3:
        raise HarnessError(f"insufficient snapshots for time differencing: {U.shape[0]} < 3")
    if U.shape[1] < 3:
        raise HarnessError(f"insufficient points for space differencing: {U.shape[1]} < 3")

    eps2 = field.eps * field.eps
    Ut = (U[2:, 1:-1] - U[:-2, 1:-1]) / (t[2:] - t[:-2])[:, None, None]
    Ux = (U[1:-1, 2:] - U[1:-1, :-2]) / (x[2:] - x[:-2])[None, :, None]
    core = U[1:-1, 1:-1]

    values = eps2 * (Ut + Ux * spec.D) - core @ spec.L.T - eps2 * spec.nonlinearity(core)
    kernel = None
    if sd is not None:
        kernel = sd.inner(values, sd.left_modes[0].real)
    return DefectField(x=x[1:-1], times=t[1:-1], values=values, kernel=kernel)


def layer_exit_time(order: int, eps: float, k_gap: float) -> float:
    """t after which e^{−kτ} ≤ ε^{N+3}"""
    return (order + 3) * np.log(1.0 / eps) * eps * eps / k_gap


def dense_defect(exp_set: ExpansionSet, spec: ProblemSpec, sd: SpectralData, order: int, eps: float,
                 x_range: Tuple[float, float], centres: Sequence[float],
                 delta: float = 0.01) -> Tuple[float, float]:
    """
    Full and kernel-projected defect sup-norms of U_N in dense snapshot mode.

    Each centre t gets the triple (t − δε, t, t + δε) on an x-grid of spacing
    δε/|B|, so that both differences resolve the same step in ζ.
    """
    dt = delta * eps
    dx = dt / abs(exp_set.B)
    x = np.arange(x_range[0], x_range[1] + 0.5 * dx, dx)
    horizon = float(exp_set.times[-1])

    full, projected = 0.0, 0.0
    for centre in centres:
        centre = min(max(centre, dt), horizon - dt)
        field = assemble_field(exp_set, order, eps, x, [centre - dt, centre, centre + dt])
        result = defect(field, spec, sd)
        full = max(full, result.sup)
        projected = max(projected, result.kernel_sup)
    logger.debug(f"Dense defect eps={eps:g}: full {full:.3e}, kernel {projected:.3e} "
                 f"on {x.size} points x {len(centres)} centres")
    return full, projected
