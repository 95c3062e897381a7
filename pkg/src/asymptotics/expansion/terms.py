"""
Surge and boundary terms of the expansion

Surge terms live in (ζ, t) with ζ = (t − Bx)/ε; boundary terms live in
(ξ, τ) = (x/ε, t/ε²) and decay exponentially in τ. Modal sums run in complex
arithmetic and real parts are taken only when a field is produced.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import ExpansionError
from ..models.schemas import GaussianBump, ProblemSpec
from ..problem.initial import mode_derivative, mode_profile
from ..spectral.eigen import SpectralData, pseudo_inverse_apply
from .profiles import Profile, ProjectedNonlinearity, zeta_derivative, zeta_second_derivative

logger = logging.getLogger(__name__)


def projected_nonlinearity(spec: ProblemSpec, h0: np.ndarray, h0_star: np.ndarray) -> ProjectedNonlinearity:
    """Coefficients of F̄(φ) = (F(φh₀), h₀*)"""
    w = spec.W
    a1 = float(np.sum(w * h0_star * np.array(spec.c1) * h0))
    a2 = float(np.sum(w * h0_star * np.array(spec.c2) * h0 * h0))
    return ProjectedNonlinearity(a1=a1, a2=a2)


@dataclass
class SurgeTerm:
    """
    s(ζ, t, ·) = Σₖ cₖ(ζ, t)·vₖ where each cₖ is a profile or its ζ-derivative
    """
    order: int
    components: List[Tuple[Profile, bool, np.ndarray]] = field(default_factory=list)

    def __call__(self, zeta, t) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        out = None
        for profile, derivative, vector in self.components:
            part = profile.evaluate(zeta, t, derivative=derivative)[..., None] * vector
            out = part if out is None else out + part
        if out is None:
            raise ExpansionError(f"surge term s{self.order} has no components")
        return out

    def on_grid(self) -> np.ndarray:
        """Values on the stored (t, ζ) grid, indexed (t, ζ, state)"""
        out = None
        for profile, derivative, vector in self.components:
            coeff = profile.derivative_values() if derivative else profile.values
            part = coeff[..., None] * vector
            out = part if out is None else out + part
        return out


def build_surge_terms(sd: SpectralData, psi: np.ndarray, phi0: Profile,
                      phi1: Optional[Profile], B: float) -> Tuple[SurgeTerm, SurgeTerm]:
    """
    s₀ = φ₀h₀ and s₁ = −B·∂ζφ₀·G(Ψ₀h₀) + φ₁h₀.

    A missing φ₁ is treated as φ₁ ≡ 0.
    """
    h0 = sd.right_modes[0].real
    q = pseudo_inverse_apply(sd, psi * h0)
    s0 = SurgeTerm(order=0, components=[(phi0, False, h0)])
    s1 = SurgeTerm(order=1, components=[(phi0, True, -B * q)])
    if phi1 is not None:
        s1.components.append((phi1, False, h0))
    return s0, s1


def phi1_source(spec: ProblemSpec, sd: SpectralData, psi: np.ndarray, B: float, mu: float,
                nonlinearity: ProjectedNonlinearity, phi0: Profile) -> np.ndarray:
    """
    ρ₁ on the (t, ζ) grid of φ₀.

    The order-ε² right side with φ₁ = 0,
        r₂⁰ = B²φ₀″·Ψ₀q + μφ₀″·h₀ + F̄(φ₀)·h₀ − F(φ₀h₀),
    has no kernel component; s₂⁰ = G r₂⁰ and
        ρ₁ = B·∂ζ(Ψ₀ s₂⁰, h₀*) − B·∂ζφ₀·(F′(φ₀h₀) q, h₀*).
    """
    h0 = sd.right_modes[0].real
    h0_star = sd.left_modes[0].real
    q = pseudo_inverse_apply(sd, psi * h0)
    dz = phi0.dz

    phi = phi0.values
    d1 = zeta_derivative(phi, dz)
    d2 = zeta_second_derivative(phi, dz)

    U0 = phi[..., None] * h0
    parts = (B * B * d2[..., None] * (psi * q),
             (mu * d2 + nonlinearity(phi))[..., None] * h0,
             spec.nonlinearity(U0))
    r2 = parts[0] + parts[1] - parts[2]
    # r₂⁰ often cancels exactly; judge solvability against its summands
    scale = max(float(np.max(np.abs(p))) for p in parts)
    s2 = pseudo_inverse_apply(sd, r2, scale=max(scale, 1.0))
    flux = sd.inner(psi * s2, h0_star)

    coupling = sd.inner(spec.nonlinearity_slope(U0) * q, h0_star)
    rho = B * zeta_derivative(flux, dz) - B * d1 * coupling
    logger.debug(f"rho1 assembled: sup {np.max(np.abs(rho)):.3e}")
    return rho


def phi1_initial(spec: ProblemSpec, sd: SpectralData, B: float, zeta: np.ndarray) -> np.ndarray:
    """
    Matched φ₁(ζ, 0) = Re Σ_{i≥1} (Dhᵢ, h₀*)/λᵢ · wᵢ′(−ζ/B).

    This choice makes the kernel part of the first-order boundary term vanish
    as τ → ∞.
    """
    h0_star = sd.left_modes[0]
    xi = -np.asarray(zeta, dtype=float) / B
    total = np.zeros(xi.shape, dtype=complex)
    for i, bumps in spec.w_modes.items():
        if i == 0:
            continue
        a = sd.inner(spec.D * sd.right_modes[i], h0_star)
        total += a / sd.eigenvalues[i] * mode_derivative(bumps, xi)
    return total.real


def _exp_integral(lam_i: complex, lam_j: complex, tau):
    """∫₀^τ e^{λⱼ(τ−s)} e^{λᵢ s} ds"""
    if abs(lam_i - lam_j) <= 1e-12 * (1.0 + abs(lam_i)):
        return tau * np.exp(lam_i * tau)
    return (np.exp(lam_i * tau) - np.exp(lam_j * tau)) / (lam_i - lam_j)


@dataclass
class BoundaryTerms:
    """
    Boundary functions p₀, p₁ in closed modal form

    p₀(ξ, τ) = Re Σ_{i≥1} wᵢ(ξ) e^{λᵢτ} hᵢ
    p₁(ξ, τ) = Re Σⱼ cⱼ(ξ, τ) hⱼ with
        cⱼ(τ) = e^{λⱼτ} cⱼ(0) − Σ_{i≥1} wᵢ′(ξ) (Dhᵢ, hⱼ*) ∫₀^τ e^{λⱼ(τ−s)} e^{λᵢs} ds
        cⱼ(0) = (−s₁(−Bξ, 0), hⱼ*)
    """
    eigenvalues: np.ndarray
    right_modes: np.ndarray
    left_modes: np.ndarray
    weights: np.ndarray
    coupling: np.ndarray
    modes: Dict[int, List[GaussianBump]]
    B: float
    s1: Optional[SurgeTerm] = None

    def _project(self, values: np.ndarray) -> np.ndarray:
        """Coefficients (v, hⱼ*) for every row of values"""
        return np.einsum('k,nk,jk->nj', self.weights, values, self.left_modes)

    def p0(self, xi, tau) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape + (self.right_modes.shape[1],), dtype=complex)
        for i, bumps in self.modes.items():
            if i == 0:
                continue
            out += (mode_profile(bumps, xi) * np.exp(self.eigenvalues[i] * tau))[..., None] * self.right_modes[i]
        return out.real

    def initial_coefficients(self, xi) -> np.ndarray:
        if self.s1 is None:
            raise ExpansionError("first-order boundary term needs s1")
        xi = np.asarray(xi, dtype=float)
        return -self._project(self.s1(-self.B * xi, 0.0))

    def p1_coefficients(self, xi, tau) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        c = self.initial_coefficients(xi) * np.exp(self.eigenvalues * tau)
        for i, bumps in self.modes.items():
            if i == 0:
                continue
            dw = mode_derivative(bumps, xi)
            for j in range(self.eigenvalues.size):
                c[:, j] -= dw * self.coupling[j, i] * _exp_integral(self.eigenvalues[i], self.eigenvalues[j], tau)
        return c

    def p1(self, xi, tau) -> np.ndarray:
        return (self.p1_coefficients(xi, tau) @ self.right_modes).real

    def kernel_limit(self, xi) -> np.ndarray:
        """lim_{τ→∞} (p₁, h₀*) = c₀(0) + Σ_{i≥1} (Dhᵢ, h₀*)/λᵢ · wᵢ′(ξ)"""
        xi = np.asarray(xi, dtype=float)
        c0 = self.initial_coefficients(xi)[:, 0]
        for i, bumps in self.modes.items():
            if i == 0:
                continue
            c0 = c0 + self.coupling[0, i] / self.eigenvalues[i] * mode_derivative(bumps, xi)
        return c0


def build_boundary_terms(sd: SpectralData, D, w_modes: Dict[int, List[GaussianBump]], B: float,
                         s1: Optional[SurgeTerm] = None, xi_grid: Optional[np.ndarray] = None,
                         matching_tol: float = 1e-6) -> BoundaryTerms:
    """
    Closed-form boundary terms.

    Args:
        sd: spectral data
        D: per-state speeds
        w_modes: initial mode profiles
        B: drift
        s1: first surge term; p₁ is unavailable without it
        xi_grid: abscissae for the matching check
        matching_tol: allowed relative size of the τ→∞ kernel residue

    Raises:
        ExpansionError: "boundary matching failed" when (p₁, h₀*) does not decay
    """
    lam = sd.eigenvalues.copy()
    lam[0] = 0.0
    D = np.asarray(D, dtype=float)
    coupling = np.array([[sd.inner(D * sd.right_modes[i], sd.left_modes[j]) for i in range(sd.m)]
                         for j in range(sd.m)])
    terms = BoundaryTerms(
        eigenvalues=lam, right_modes=sd.right_modes, left_modes=sd.left_modes, weights=sd.weights,
        coupling=coupling, modes={i: b for i, b in w_modes.items() if i != 0}, B=B, s1=s1,
    )

    if s1 is not None and xi_grid is not None and terms.modes:
        residue = terms.kernel_limit(xi_grid)
        scale = 1.0 + float(np.max(np.abs(terms.initial_coefficients(xi_grid))))
        worst = float(np.max(np.abs(residue)))
        if worst > matching_tol * scale:
            raise ExpansionError(f"boundary matching failed: kernel residue {worst:.3e}")
        logger.debug(f"Boundary matching residue {worst:.3e}")
    return terms
