"""
Eigenstructure of the relaxation operator

The inner product is the weighted bilinear form (a, b) = Σ wⱼ aⱼ bⱼ, so the
adjoint is L* = W⁻¹LᵀW and its eigenvectors are hᵢ* = W⁻¹ uᵢ with uᵢ the
ordinary left eigenvectors. Pairings stay unconjugated so complex modes are
biorthonormal in the same bilinear sense the expansion uses.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from ..errors import SpectralError
from ..settings import SpectralSettings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralData:
    """
    Ordered eigensystem of L

    eigenvalues[0] is the zero eigenvalue; the rest are sorted by
    decreasing real part. right_modes[i] = hᵢ (unit max-norm),
    left_modes[i] = hᵢ* with (hᵢ, hⱼ*) = δᵢⱼ.
    """
    eigenvalues: np.ndarray
    right_modes: np.ndarray
    left_modes: np.ndarray
    weights: np.ndarray
    gap: float
    pairings: np.ndarray
    scale: float
    tolerances: SpectralSettings

    @property
    def m(self) -> int:
        return self.eigenvalues.size

    def inner(self, a, b):
        """Weighted bilinear product over the last axis"""
        return np.sum(self.weights * np.asarray(a) * np.asarray(b), axis=-1)


def _unit_max(vectors: np.ndarray) -> np.ndarray:
    """Scale each row so its entry of largest modulus equals 1."""
    out = np.empty_like(vectors)
    for i, v in enumerate(vectors):
        out[i] = v / v[np.argmax(np.abs(v))]
    return out


def eigendecompose(L, weights, tolerances: Optional[SpectralSettings] = None) -> SpectralData:
    """
    Biorthonormal eigendecomposition with respect to the weighted product.

    Args:
        L: m×m real operator
        weights: positive per-state weights
        tolerances: decomposition thresholds (defaults when omitted)

    Returns:
        SpectralData with the zero mode first

    Raises:
        SpectralError: repeated eigenvalue ("Condition V violated") or no
            eigenvalue near zero ("no zero mode")
    """
    tol = tolerances or SpectralSettings()
    L = np.asarray(L, dtype=float)
    W = np.asarray(weights, dtype=float)
    m = L.shape[0]
    scale = float(np.max(np.sum(np.abs(L), axis=1)))

    vals, vl, vr = scipy.linalg.eig(L, left=True, right=True)
    vals = vals.astype(complex)

    separation = np.abs(vals[:, None] - vals[None, :]) + np.diag(np.full(m, np.inf))
    if separation.min() <= tol.tol_distinct * scale:
        raise SpectralError(f"Condition V violated: repeated eigenvalue "
                            f"(separation {separation.min():.3e})")

    zero = int(np.argmin(np.abs(vals)))
    if abs(vals[zero]) > tol.tol_zero * scale:
        raise SpectralError(f"no zero mode: smallest |eigenvalue| is {abs(vals[zero]):.3e}")

    rest = sorted((i for i in range(m) if i != zero), key=lambda i: (-vals[i].real, vals[i].imag))
    order = [zero] + rest

    right = _unit_max(vr[:, order].T.astype(complex))
    left = _unit_max((np.conj(vl[:, order]) / W[:, None]).T.astype(complex))

    pairings = np.sum(W * right * left, axis=1)
    for i in range(1, m):
        if abs(pairings[i]) <= tol.tol_pair:
            raise SpectralError(f"Condition V violated: mode {i} has no dual partner")
    norm = np.where(np.abs(pairings) > tol.tol_pair, pairings, 1.0)
    left = left / norm[:, None]

    eigenvalues = vals[order]
    gap = float(-np.max(eigenvalues[1:].real))
    logger.debug(f"Eigendecomposition: eigenvalues={np.round(eigenvalues, 12)}, gap={gap:.6g}")

    return SpectralData(
        eigenvalues=eigenvalues, right_modes=right, left_modes=left, weights=W,
        gap=gap, pairings=pairings, scale=scale, tolerances=tol,
    )


def biorthogonality_residual(sd: SpectralData) -> float:
    """max |(hᵢ, hⱼ*) − δᵢⱼ|"""
    gram = np.einsum('k,ik,jk->ij', sd.weights, sd.right_modes, sd.left_modes)
    return float(np.max(np.abs(gram - np.eye(sd.m))))


def zero_mode(sd: SpectralData) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zero-mode pair (h₀, h₀*) with (h₀, h₀*) = 1 and h₀ of unit max-norm.

    Raises:
        SpectralError: "Condition II violated" when h₀ and h₀* are orthogonal
    """
    if abs(sd.pairings[0]) <= sd.tolerances.tol_pair:
        raise SpectralError(f"Condition II violated: (h0, h0*) = {abs(sd.pairings[0]):.3e}")
    return sd.right_modes[0].real.copy(), sd.left_modes[0].real.copy()


def pseudo_inverse_matrix(sd: SpectralData) -> np.ndarray:
    """G = Re Σ_{i≥1} hᵢ (W hᵢ*)ᵀ / λᵢ; annihilates h₀"""
    G = np.zeros((sd.m, sd.m), dtype=complex)
    for i in range(1, sd.m):
        G += np.outer(sd.right_modes[i], sd.weights * sd.left_modes[i]) / sd.eigenvalues[i]
    return G.real


def kernel_component(sd: SpectralData, f) -> np.ndarray:
    """(f, h₀*) over the last axis"""
    return sd.inner(f, sd.left_modes[0].real)


def pseudo_inverse_apply(sd: SpectralData, f, scale: Optional[float] = None) -> np.ndarray:
    """
    Gf = Σ_{i≥1} (f, hᵢ*)/λᵢ · hᵢ, so that L(Gf) = f and (Gf, h₀*) = 0.

    Args:
        sd: spectral data
        f: array whose last axis is the state index
        scale: magnitude of the terms f was summed from; the solvability
            threshold is relative to max(‖f‖, scale) so a right side that
            cancels to rounding noise is accepted

    Raises:
        SpectralError: right side has a kernel component
    """
    f = np.asarray(f, dtype=float)
    size = float(np.max(np.abs(f))) if f.size else 0.0
    if scale is not None:
        size = max(size, float(scale))
    kernel = np.abs(kernel_component(sd, f))
    if np.max(kernel, initial=0.0) > sd.tolerances.tol_solv * size:
        raise SpectralError("not solvable: violates (F, h0*) = 0")
    return f @ pseudo_inverse_matrix(sd).T


def relaxation_propagator(sd: SpectralData, s: float) -> np.ndarray:
    """e^{L s} assembled from the modes"""
    P = np.zeros((sd.m, sd.m), dtype=complex)
    for i in range(sd.m):
        P += np.exp(sd.eigenvalues[i] * s) * np.outer(sd.right_modes[i], sd.weights * sd.left_modes[i])
    return P.real


def drift_coefficient(sd: SpectralData, D) -> float:
    """
    B = (h₀, h₀*)/(D h₀, h₀*).

    Raises:
        SpectralError: (D h₀, h₀*) vanishes
    """
    h0, h0s = zero_mode(sd)
    denom = float(sd.inner(np.asarray(D) * h0, h0s))
    if abs(denom) <= sd.tolerances.tol_pair:
        raise SpectralError("characteristic speed undefined: (Dh0, h0*) = 0")
    return 1.0 / denom


def psi0(sd: SpectralData, D) -> np.ndarray:
    """Ψ₀ = D − (D h₀, h₀*), per state"""
    h0, h0s = zero_mode(sd)
    D = np.asarray(D, dtype=float)
    return D - float(sd.inner(D * h0, h0s))


def diffusion_coefficient(sd: SpectralData, D) -> Tuple[float, float]:
    """
    g = (Ψ₀ G(Ψ₀h₀), h₀*) and μ = −B²g.

    Returns:
        (g, μ); μ > 0 exactly when g < 0
    """
    h0, h0s = zero_mode(sd)
    psi = psi0(sd, D)
    q = pseudo_inverse_apply(sd, psi * h0)
    g = float(sd.inner(psi * q, h0s))
    B = drift_coefficient(sd, D)
    return g, -B * B * g
