"""
Unscaled transport-relaxation problems on a characteristic triangle

    u_t + D u_x = L u + f(x, t) + f₂(u)

solved with the positivity-safe splitting A(dt/2) · R(dt) · S(dt) · A(dt/2):
monotone (clamped) shifts, exact relaxation e^{L·dt} and a forward-Euler
source step. Every step is stored so that Δ₀ can be inspected node by node.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from ..errors import PrinciplesError
from ..models.schemas import Triangle
from ..solver.advection import advect

logger = logging.getLogger(__name__)

CFL = 0.9


@dataclass(frozen=True)
class GaussianData:
    """(x, t) ↦ offset + amplitude·exp(−β(x − centre)²), one entry per state"""
    offset: np.ndarray
    amplitude: np.ndarray
    center: float = 0.0
    beta: float = 1.0

    def __call__(self, x, t: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        bump = np.exp(-self.beta * (x - self.center) ** 2)
        return np.asarray(self.offset, dtype=float) + np.outer(bump, self.amplitude)

    @classmethod
    def constant(cls, vector) -> "GaussianData":
        vector = np.asarray(vector, dtype=float)
        return cls(offset=vector, amplitude=np.zeros_like(vector))

    def combine(self, other: "GaussianData", sign: float = 1.0) -> "GaussianData":
        """Sum (or difference) of two data sets sharing centre and width"""
        if self.center != other.center or self.beta != other.beta:
            raise PrinciplesError("combined data must share the bump centre and width")
        return GaussianData(offset=self.offset + sign * other.offset,
                            amplitude=self.amplitude + sign * other.amplitude,
                            center=self.center, beta=self.beta)


def quadratic_damping(u: np.ndarray) -> np.ndarray:
    """f₂(u) = −u², componentwise"""
    return -u * u


@dataclass
class TransportInstance:
    """One linear or weakly nonlinear problem for the lemma suites"""
    L: np.ndarray
    D: np.ndarray
    initial: GaussianData
    source: GaussianData
    reaction: Optional[Callable[[np.ndarray], np.ndarray]] = None
    reaction_slope: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=float)
        self.D = np.asarray(self.D, dtype=float)
        m = self.L.shape[0]
        if self.L.shape != (m, m) or self.D.shape != (m,):
            raise PrinciplesError(f"operator {self.L.shape} and speeds {self.D.shape} do not match")

    @property
    def m(self) -> int:
        return self.L.shape[0]

    def apply_reaction(self, u: np.ndarray) -> np.ndarray:
        if self.reaction is None:
            return np.zeros_like(u)
        return self.reaction(u)

    def reaction_jacobian_at_zero(self, delta: float = 1e-6) -> np.ndarray:
        """Diagonal of ∂f₂/∂u at u = 0 by central differences"""
        probe = np.full((1, self.m), delta)
        return ((self.apply_reaction(probe) - self.apply_reaction(-probe)) / (2.0 * delta))[0]

    def linearized(self) -> "TransportInstance":
        """Same data with L + diag(f₂′(0)) and no reaction"""
        return TransportInstance(L=self.L + np.diag(self.reaction_jacobian_at_zero()), D=self.D,
                                 initial=self.initial, source=self.source, label=f"{self.label} (linearized)")

    def rescaled(self, factor: float) -> "TransportInstance":
        return TransportInstance(L=factor * self.L, D=self.D, initial=self.initial, source=self.source,
                                 reaction=self.reaction, reaction_slope=self.reaction_slope,
                                 label=f"{self.label} (L x {factor:g})")


@dataclass
class TriangleSolution:
    """Stored solve on a window covering Δ₀"""
    triangle: Triangle
    x: np.ndarray
    times: np.ndarray
    values: np.ndarray
    source_values: np.ndarray
    mask: np.ndarray = field(init=False)

    def __post_init__(self):
        self.mask = self.triangle.contains(self.x[None, :], self.times[:, None])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def inside(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        """Values at the nodes of Δ₀, shape (nodes, m)"""
        values = self.values if values is None else values
        return values[self.mask]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.inside()))) if self.mask.any() else 0.0

    def base_sup(self) -> float:
        """‖u⁰‖ over the nodes of Γ₀"""
        base = self.mask[0]
        if not base.any():
            # degenerate base between two nodes
            base = np.abs(self.x - self.triangle.m1) == np.min(np.abs(self.x - self.triangle.m1))
        return float(np.max(np.abs(self.values[0][base])))

    def source_sup(self) -> float:
        return float(np.max(np.abs(self.inside(self.source_values)))) if self.mask.any() else 0.0

    def locate(self, flat_index: int) -> Tuple[float, float, int]:
        """(x, t, state) of the flat index into inside()"""
        nodes = np.argwhere(self.mask)
        node, state = divmod(int(flat_index), self.values.shape[2])
        i, j = nodes[node]
        return float(self.x[j]), float(self.times[i]), int(state)

    def minimum(self, values: Optional[np.ndarray] = None) -> Tuple[float, Tuple[float, float, int]]:
        """Smallest value over Δ₀ and the node where it sits"""
        inside = self.inside(values)
        k = int(np.argmin(inside))
        return float(inside.ravel()[k]), self.locate(k)


def triangle_window(triangle: Triangle, speeds: np.ndarray, cells: int) -> Tuple[float, float]:
    """Left edge and coarse spacing of the grid covering Γ₀ plus the dependence margin"""
    vmax = float(np.max(np.abs(speeds)))
    spread = 2.5 * triangle.t0 * vmax
    lo, hi = triangle.m2 - spread, triangle.m1 + spread
    if hi - lo <= 0.0:
        lo, hi = lo - 0.5, hi + 0.5
    dx = (hi - lo) / cells
    return lo - 4.0 * dx, dx


def solve_on_triangle(instance: TransportInstance, triangle: Triangle, cells: int = 200,
                      refine: int = 0, kernel: str = 'monotone') -> TriangleSolution:
    """
    Solve the instance on a grid covering Δ₀ up to t₀.

    Args:
        instance: operator, speeds and data
        triangle: domain of interest
        cells: coarse cells across base and margin
        refine: number of joint dx/dt halvings relative to the coarse level
        kernel: advection kernel; 'monotone' keeps the scheme positivity safe

    Raises:
        PrinciplesError: the solution became non-finite
    """
    lo, dx0 = triangle_window(triangle, instance.D, cells)
    vmax = float(np.max(np.abs(instance.D)))
    dt0 = 0.1 / (1.0 + np.linalg.norm(instance.L, np.inf) + instance.reaction_slope)
    if vmax > 0.0:
        dt0 = min(dt0, CFL * dx0 / vmax)
    n0 = int(np.ceil(triangle.t0 / dt0))

    factor = 2 ** refine
    dx = dx0 / factor
    x = lo + dx * np.arange((cells + 8) * factor + 1)
    steps = n0 * factor
    dt = triangle.t0 / steps
    times = dt * np.arange(steps + 1)

    R = expm(instance.L * dt).T
    u = np.asarray(instance.initial(x), dtype=float)
    values = np.empty((steps + 1, x.size, instance.m))
    sources = np.empty_like(values)
    values[0] = u
    sources[0] = instance.source(x, 0.0)

    for n in range(steps):
        u = advect(u, instance.D, 0.5 * dt, dx, kernel)
        u = u @ R
        f = instance.source(x, times[n] + 0.5 * dt)
        u = u + dt * (f + instance.apply_reaction(u))
        u = advect(u, instance.D, 0.5 * dt, dx, kernel)
        if not np.all(np.isfinite(u)):
            raise PrinciplesError(f"transport solve blew up at t={times[n + 1]:.6g}")
        values[n + 1] = u
        sources[n + 1] = instance.source(x, times[n + 1])

    logger.debug(f"Triangle solve {instance.label or 'instance'}: {x.size} points, {steps} steps")
    return TriangleSolution(triangle=triangle, x=x, times=times, values=values, source_values=sources)
