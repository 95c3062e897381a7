"""
Surge profiles φ₀, φ₁ in the traveling variable ζ

Both solve forced reaction-diffusion problems on a truncated ζ-line with
zero Dirichlet ends:

    ∂tφ₀ = μ φ₀″ + F̄(φ₀)
    ∂tφ₁ = μ φ₁″ + F̄′(φ₀) φ₁ + ρ₁

Time stepping is Heun's method with central second differences; every step is
stored so the profiles can be interpolated bicubically in (t, ζ).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RectBivariateSpline

from ..errors import ExpansionError
from ..settings import ExpansionSettings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectedNonlinearity:
    """F̄(φ) = (F(φh₀), h₀*) = a1·φ + a2·φ²"""
    a1: float
    a2: float

    def __call__(self, phi):
        return self.a1 * phi + self.a2 * phi * phi

    def slope(self, phi):
        return self.a1 + 2.0 * self.a2 * phi

    def max_slope(self, bound: float) -> float:
        return abs(self.a1) + 2.0 * abs(self.a2) * bound


def zeta_derivative(values: np.ndarray, dz: float) -> np.ndarray:
    """Centered first difference along the last axis (one-sided, second order, at the ends)"""
    return np.gradient(values, dz, axis=-1, edge_order=2)


def zeta_second_derivative(values: np.ndarray, dz: float) -> np.ndarray:
    """Compact central second difference; ends copy their neighbours"""
    out = np.empty_like(values)
    out[..., 1:-1] = (values[..., 2:] - 2.0 * values[..., 1:-1] + values[..., :-2]) / (dz * dz)
    out[..., 0] = out[..., 1]
    out[..., -1] = out[..., -2]
    return out


@dataclass
class Profile:
    """Profile values on a uniform ζ-grid at every stored time step"""
    zeta: np.ndarray
    times: np.ndarray
    values: np.ndarray
    _spline: Optional[RectBivariateSpline] = field(default=None, repr=False)
    _dspline: Optional[RectBivariateSpline] = field(default=None, repr=False)

    @property
    def dz(self) -> float:
        return float(self.zeta[1] - self.zeta[0])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def derivative_values(self) -> np.ndarray:
        return zeta_derivative(self.values, self.dz)

    def sup_norms(self) -> np.ndarray:
        """sup over ζ at each stored time"""
        return np.max(np.abs(self.values), axis=1)

    def _check_extent(self, zeta, t):
        tol = 1e-9 * max(1.0, float(np.max(np.abs(self.zeta))))
        z_lo, z_hi = float(np.min(zeta)), float(np.max(zeta))
        t_lo, t_hi = float(np.min(t)), float(np.max(t))
        if (z_lo < self.zeta[0] - tol or z_hi > self.zeta[-1] + tol
                or t_lo < self.times[0] - 1e-12 or t_hi > self.times[-1] * (1 + 1e-12) + 1e-15):
            raise ExpansionError(
                f"grid underflow: need zeta in [{z_lo:.6g}, {z_hi:.6g}], t in [{t_lo:.6g}, {t_hi:.6g}]; "
                f"profiles cover zeta in [{self.zeta[0]:.6g}, {self.zeta[-1]:.6g}], "
                f"t in [{self.times[0]:.6g}, {self.times[-1]:.6g}]"
            )

    def _splines(self):
        if self._spline is None:
            self._spline = RectBivariateSpline(self.times, self.zeta, self.values, kx=3, ky=3)
            self._dspline = RectBivariateSpline(self.times, self.zeta, self.derivative_values(), kx=3, ky=3)
        return self._spline, self._dspline

    def evaluate(self, zeta, t, derivative: bool = False) -> np.ndarray:
        """
        Interpolated φ (or its centered-difference ζ-derivative) at scattered points.

        Args:
            zeta: array of ζ values
            t: scalar or array broadcastable to zeta
            derivative: evaluate ∂ζφ instead of φ
        """
        zeta = np.asarray(zeta, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), zeta.shape)
        self._check_extent(zeta, t)
        t = np.clip(t, self.times[0], self.times[-1])
        zeta = np.clip(zeta, self.zeta[0], self.zeta[-1])
        spline, dspline = self._splines()
        chosen = dspline if derivative else spline
        return chosen.ev(t.ravel(), zeta.ravel()).reshape(zeta.shape)


def _time_step(mu: float, dz: float, horizon: float, rate: float,
               settings: ExpansionSettings) -> float:
    dt = min(settings.diffusion_safety * dz * dz / mu, settings.reaction_safety / (1.0 + rate))
    steps = max(3, int(np.ceil(horizon / dt - 1e-9)))
    return horizon / steps


def _march(initial: np.ndarray, mu: float, dz: float, dt: float, steps: int,
           rhs_extra: Callable[[np.ndarray, int], np.ndarray],
           rate_bound: Optional[Callable[[np.ndarray], float]], settings: ExpansionSettings,
           label: str) -> Optional[np.ndarray]:
    """
    Heun steps for u_t = μ u″ + extra(u, n); ends held at zero.

    Returns None when the reaction rate outgrows rate_bound so the caller
    can retry with a smaller step.
    """
    out = np.empty((steps + 1, initial.size))
    u = initial.copy()
    u[0] = u[-1] = 0.0
    out[0] = u

    def rhs(v, n):
        r = np.zeros_like(v)
        r[1:-1] = mu * (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dz * dz)
        r += rhs_extra(v, n)
        r[0] = r[-1] = 0.0
        return r

    for n in range(steps):
        k1 = rhs(u, n)
        k2 = rhs(u + dt * k1, n + 1)
        u = u + 0.5 * dt * (k1 + k2)
        peak = float(np.max(np.abs(u)))
        if not np.isfinite(peak) or peak > settings.blowup:
            raise ExpansionError(f"profile blow-up in {label} at t={(n + 1) * dt:.6g}")
        if rate_bound is not None and rate_bound(u) > settings.reaction_safety / dt - 1.0:
            return None
        out[n + 1] = u
    return out


def solve_phi0(mu: float, nonlinearity: ProjectedNonlinearity, initial: np.ndarray,
               zeta_grid: np.ndarray, horizon: float,
               settings: Optional[ExpansionSettings] = None) -> Profile:
    """
    Leading surge profile.

    Args:
        mu: effective diffusivity (must be positive)
        nonlinearity: projected nonlinearity F̄
        initial: φ₀(ζ, 0) = w₀(−ζ/B) sampled on zeta_grid
        zeta_grid: uniform ζ abscissae
        horizon: final time

    Returns:
        Profile stored at every time step

    Raises:
        ExpansionError: μ ≤ 0 or "profile blow-up"
    """
    settings = settings or ExpansionSettings()
    if not mu > 0.0:
        raise ExpansionError(f"diffusion coefficient must be positive, got mu={mu:.6g}")
    zeta = np.asarray(zeta_grid, dtype=float)
    dz = float(zeta[1] - zeta[0])
    initial = np.asarray(initial, dtype=float)

    bound = 2.0 * float(np.max(np.abs(initial), initial=0.0))
    dt = _time_step(mu, dz, horizon, nonlinearity.max_slope(bound), settings)

    while True:
        steps = int(round(horizon / dt))
        values = _march(initial, mu, dz, dt, steps,
                        lambda v, n: nonlinearity(v),
                        lambda v: nonlinearity.max_slope(float(np.max(np.abs(v)))),
                        settings, "phi0")
        if values is not None:
            break
        dt = horizon / (2 * steps)
        logger.warning(f"Reaction step restriction tightened for phi0: dt={dt:.3e}")

    times = dt * np.arange(steps + 1)
    logger.info(f"phi0 solved: {zeta.size} nodes, {steps} steps of dt={dt:.3e}, "
                f"sup {np.max(np.abs(values[0])):.4g} -> {np.max(np.abs(values[-1])):.4g}")
    return Profile(zeta=zeta, times=times, values=values)


def solve_phi1(phi0: Profile, mu: float, nonlinearity: ProjectedNonlinearity,
               source: Optional[np.ndarray], initial: np.ndarray,
               settings: Optional[ExpansionSettings] = None) -> Profile:
    """
    First-order surge profile on the time grid of φ₀.

    Args:
        phi0: leading profile (fixes the ζ- and t-grids)
        mu: effective diffusivity
        nonlinearity: projected nonlinearity; its slope at φ₀ is the potential
        source: ρ₁ on the (t, ζ) grid of phi0, or None for ρ₁ ≡ 0
        initial: matched φ₁(ζ, 0)

    Returns:
        Profile on the same grid as phi0
    """
    settings = settings or ExpansionSettings()
    if not mu > 0.0:
        raise ExpansionError(f"diffusion coefficient must be positive, got mu={mu:.6g}")
    dz, dt = phi0.dz, phi0.dt
    steps = phi0.times.size - 1
    potential = nonlinearity.slope(phi0.values)
    if float(np.max(np.abs(potential))) > settings.reaction_safety / dt - 1.0:
        logger.warning("phi1 potential exceeds the reaction step restriction of the phi0 grid")
    if source is None:
        source = np.zeros_like(phi0.values)

    values = _march(np.asarray(initial, dtype=float), mu, dz, dt, steps,
                    lambda v, n: potential[n] * v + source[n], None, settings, "phi1")
    logger.info(f"phi1 solved: sup {np.max(np.abs(values[0])):.4g} -> {np.max(np.abs(values[-1])):.4g}")
    return Profile(zeta=phi0.zeta, times=phi0.times, values=values)
