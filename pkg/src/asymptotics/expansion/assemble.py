"""
Expansion construction and evaluation

U_N(x, t, ·) = Σ_{i≤N} εⁱ (sᵢ((t − Bx)/ε, t, ·) + pᵢ(x/ε, t/ε², ·)),  N ∈ {0, 1}
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from ..errors import ExpansionError
from ..models.fields import GridField, SpaceTimeField
from ..models.schemas import ProblemSpec
from ..problem.initial import mode_profile, truncation_window, validate_initial_decay
from ..settings import ExpansionSettings
from ..spectral.eigen import (
    SpectralData,
    diffusion_coefficient,
    drift_coefficient,
    psi0,
    pseudo_inverse_apply,
    zero_mode,
)
from .profiles import Profile, solve_phi0, solve_phi1
from .terms import (
    BoundaryTerms,
    SurgeTerm,
    build_boundary_terms,
    build_surge_terms,
    phi1_initial,
    phi1_source,
    projected_nonlinearity,
)

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (0, 1)


@dataclass
class ExpansionSet:
    """All terms of the order-0/1 expansion for one problem instance"""
    order: int
    B: float
    g: float
    mu: float
    k_gap: float
    h0: np.ndarray
    h0_star: np.ndarray
    psi0: np.ndarray
    q: np.ndarray
    phi0: Profile
    phi1: Optional[Profile]
    s0: SurgeTerm
    s1: SurgeTerm
    boundary: BoundaryTerms
    xi_grid: np.ndarray

    @property
    def zeta_grid(self) -> np.ndarray:
        return self.phi0.zeta

    @property
    def times(self) -> np.ndarray:
        return self.phi0.times

    def summary(self) -> dict:
        return {
            'order': self.order, 'B': self.B, 'g': self.g, 'mu': self.mu, 'k_gap': self.k_gap,
            'zeta_min': float(self.zeta_grid[0]), 'zeta_max': float(self.zeta_grid[-1]),
            'dzeta': self.phi0.dz, 'dt': self.phi0.dt, 'steps': int(self.times.size - 1),
        }


def required_zeta_range(spec: ProblemSpec, B: float, eps_values: Iterable[float], horizon: float,
                        width: float = 6.0) -> Tuple[float, float]:
    """
    ζ-interval reached by (t − Bx)/ε over the truncation windows of every ε
    and every t ∈ [0, horizon].
    """
    cert = validate_initial_decay(spec)
    lo, hi = np.inf, -np.inf
    for eps in eps_values:
        centre, half = truncation_window(spec, cert, eps, horizon, width)
        for x in (centre - half, centre + half):
            for t in (0.0, horizon):
                z = (t - B * x) / eps
                lo, hi = min(lo, z), max(hi, z)
    return float(lo), float(hi)


def _uniform(lo: float, hi: float, step: float) -> np.ndarray:
    cells = int(np.ceil((hi - lo) / step))
    return lo + step * np.arange(cells + 1)


def build_expansion(spec: ProblemSpec, sd: SpectralData, order: int, zeta_range: Tuple[float, float],
                    horizon: float, settings: Optional[ExpansionSettings] = None) -> ExpansionSet:
    """
    Construct every term up to the requested order.

    Args:
        spec: problem instance
        sd: spectral data of spec.L
        order: 0 or 1
        zeta_range: ζ-interval that later evaluations will need
        horizon: last time that later evaluations will need

    Returns:
        ExpansionSet ready for assemble_UN
    """
    if order not in SUPPORTED_ORDERS:
        raise ExpansionError("order must be 0 or 1")
    settings = settings or ExpansionSettings()

    h0, h0_star = zero_mode(sd)
    B = drift_coefficient(sd, spec.D)
    psi = psi0(sd, spec.D)
    g, mu = diffusion_coefficient(sd, spec.D)
    q = pseudo_inverse_apply(sd, psi * h0)
    fbar = projected_nonlinearity(spec, h0, h0_star)
    logger.info(f"Expansion coefficients: B={B:.10g}, g={g:.10g}, mu={mu:.10g}, k={sd.gap:.10g}")

    pad = settings.zeta_margin + 6.0 * np.sqrt(max(mu, 0.0) * horizon)
    zeta = _uniform(zeta_range[0] - pad, zeta_range[1] + pad, settings.dzeta)

    w0 = spec.w_modes.get(0, [])
    phi0 = solve_phi0(mu, fbar, mode_profile(w0, -zeta / B), zeta, horizon, settings)

    phi1 = None
    if order >= 1:
        rho = phi1_source(spec, sd, psi, B, mu, fbar, phi0)
        phi1 = solve_phi1(phi0, mu, fbar, rho, phi1_initial(spec, sd, B, zeta), settings)

    s0, s1 = build_surge_terms(sd, psi, phi0, phi1, B)
    xi_grid = -zeta / B
    xi_grid = np.sort(xi_grid)
    boundary = build_boundary_terms(sd, spec.D, spec.w_modes, B,
                                    s1=s1 if order >= 1 else None,
                                    xi_grid=xi_grid if order >= 1 else None,
                                    matching_tol=settings.matching_tol)

    return ExpansionSet(
        order=order, B=B, g=g, mu=mu, k_gap=sd.gap, h0=h0, h0_star=h0_star, psi0=psi, q=q,
        phi0=phi0, phi1=phi1, s0=s0, s1=s1, boundary=boundary, xi_grid=xi_grid,
    )


def assemble_UN(exp_set: ExpansionSet, N: int, eps: float, x_grid, t: float) -> GridField:
    """
    Evaluate U_N(·, t, ·) on an x-grid.

    Raises:
        ExpansionError: unsupported order, missing first-order terms or
            evaluation outside the stored grids ("grid underflow")
    """
    if N not in SUPPORTED_ORDERS:
        raise ExpansionError("order must be 0 or 1")
    if N > exp_set.order:
        raise ExpansionError(f"order {N} requested but terms were built to order {exp_set.order}")
    if not eps > 0.0:
        raise ExpansionError(f"eps must be positive, got {eps}")

    x = np.asarray(x_grid, dtype=float)
    zeta = (t - exp_set.B * x) / eps
    xi = x / eps
    tau = t / (eps * eps)

    U = exp_set.s0(zeta, t) + exp_set.boundary.p0(xi, tau)
    if N == 1:
        U = U + eps * (exp_set.s1(zeta, t) + exp_set.boundary.p1(xi, tau))
    return GridField(x_grid=x, values=U)


def assemble_field(exp_set: ExpansionSet, N: int, eps: float, x_grid, times: Sequence[float]) -> SpaceTimeField:
    """U_N at several snapshot times"""
    values = np.stack([assemble_UN(exp_set, N, eps, x_grid, t).values for t in times])
    return SpaceTimeField(x_grid=np.asarray(x_grid), times=np.asarray(times, dtype=float), values=values,
                          eps=eps, scheme={'source': f'expansion N={N}'})
