"""
Initial data: Gaussian mode profiles, their assembly into w(ξ, ·) and the
decay certificate used to size truncation windows.
"""

import logging
from typing import List, Tuple

import numpy as np

from ..errors import ConfigError
from ..models.fields import GridField
from ..models.schemas import DecayCertificate, GaussianBump, ProblemSpec

logger = logging.getLogger(__name__)


def mode_profile(bumps: List[GaussianBump], z) -> np.ndarray:
    """wᵢ(z) = Σ A·exp(−β(z − z₀)²)"""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for b in bumps:
        out = out + b.amplitude * np.exp(-b.beta * (z - b.center) ** 2)
    return out


def mode_derivative(bumps: List[GaussianBump], z) -> np.ndarray:
    """wᵢ′(z), analytic"""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for b in bumps:
        s = z - b.center
        out = out - 2.0 * b.beta * s * b.amplitude * np.exp(-b.beta * s * s)
    return out


def check_mode_count(spec: ProblemSpec, mode_count: int) -> None:
    """Every configured mode index must exist in the eigenbasis."""
    extra = [k for k in spec.w_modes if k < 0 or k >= mode_count]
    if extra:
        raise ConfigError(f"mode-count mismatch: profiles for modes {sorted(extra)} "
                          f"but only {mode_count} eigenmodes")


def sample_initial(spec: ProblemSpec, modes, xi_grid) -> GridField:
    """
    Assemble w(ξⱼ, ·) = Σᵢ wᵢ(ξⱼ)·hᵢ on the given grid.

    Args:
        spec: problem instance
        modes: SpectralData computed from spec.L
        xi_grid: stretched abscissae ξ = x/ε

    Returns:
        GridField on xi_grid; real part when modes come in complex pairs
    """
    check_mode_count(spec, len(modes.eigenvalues))
    xi = np.asarray(xi_grid, dtype=float)
    values = np.zeros((xi.size, spec.m), dtype=complex)
    for index, bumps in spec.w_modes.items():
        values += np.outer(mode_profile(bumps, xi), modes.right_modes[index])
    return GridField(x_grid=xi, values=values.real)


def validate_initial_decay(spec: ProblemSpec) -> DecayCertificate:
    """
    Envelope constant and slowest decay rate over all bumps.

    C = Σ|A|, β_min = min β; an empty mode list gives (0, +inf).
    """
    bumps = [b for group in spec.w_modes.values() for b in group]
    if not bumps:
        return DecayCertificate(C=0.0, beta_min=float('inf'))
    return DecayCertificate(
        C=float(sum(abs(b.amplitude) for b in bumps)),
        beta_min=float(min(b.beta for b in bumps)),
        z_min=float(min(b.center for b in bumps)),
        z_max=float(max(b.center for b in bumps)),
    )


def truncation_window(spec: ProblemSpec, cert: DecayCertificate, eps: float,
                      horizon: float, width: float = 6.0) -> Tuple[float, float]:
    """
    Centre and half-width (x_c, W) of the truncated x-domain.

    In ξ-units the window spans the bump centres widened by width/√β_min,
    stretched by the extreme characteristic speeds over the horizon.
    """
    d = spec.D
    envelope = width / np.sqrt(cert.beta_min) if np.isfinite(cert.beta_min) else width
    lo = cert.z_min - envelope + min(0.0, float(d.min()) * horizon / eps)
    hi = cert.z_max + envelope + max(0.0, float(d.max()) * horizon / eps)
    centre = 0.5 * (lo + hi) * eps
    half = 0.5 * (hi - lo) * eps
    return centre, half


def window_grid(centre: float, half: float, dx: float) -> np.ndarray:
    """Uniform grid covering [centre − half, centre + half] with spacing dx."""
    cells = int(np.ceil(2.0 * half / dx - 1e-9))
    return centre - half + dx * np.arange(cells + 1)
