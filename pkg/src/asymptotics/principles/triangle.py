"""Characteristic triangles Δ₀ with base Γ₀ on t = 0"""

from typing import Sequence

import numpy as np

from ..errors import PrinciplesError
from ..models.schemas import Triangle


def characteristic_triangle(x0: float, t0: float, D: Sequence[float]) -> Triangle:
    """
    Back-trace the extreme characteristics through the apex (x₀, t₀).

    M₁ = x₀ − d_min·t₀ and M₂ = x₀ − d_max·t₀; equal speeds give a
    degenerate triangle with M₁ = M₂.

    Raises:
        PrinciplesError: t₀ ≤ 0
    """
    if not t0 > 0.0:
        raise PrinciplesError(f"triangle apex must have t0 > 0, got {t0}")
    speeds = np.asarray(D, dtype=float)
    d_min, d_max = float(speeds.min()), float(speeds.max())
    return Triangle(x0=x0, t0=t0, d_min=d_min, d_max=d_max,
                    m1=x0 - d_min * t0, m2=x0 - d_max * t0)
