"""
Data Models for the asymptotics toolkit

Immutable, validated descriptions of:
- the problem instance (operator, speeds, weights, nonlinearity, initial modes)
- verdict reports (conditions, lemma outcomes, theorem check)
- sweep results and run manifests
"""

from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, validator


class GaussianBump(BaseModel):
    """One term A·exp(−β(z − z₀)²) of an initial mode profile"""
    amplitude: float
    beta: float = Field(..., description="Decay rate, must be positive")
    center: float = 0.0

    @validator('beta')
    def decaying(cls, v):
        """Only Gaussian-decaying bumps are admissible"""
        if not v > 0.0:
            raise ValueError("initial data not Gaussian-decaying")
        return v

    class Config:
        frozen = True


class ProblemSpec(BaseModel):
    """
    Full problem instance

    ε²(U_t + D U_x) = L U + ε² F(U),  U(x, 0) = w(x/ε)

    The weighted product (a, b) = Σ weightsⱼ aⱼ bⱼ replaces the integral over
    the continuous state parameter. Fⱼ(U) = c1ⱼ Uⱼ + c2ⱼ Uⱼ².
    """
    m: int = Field(..., ge=2, description="State count")
    operator: List[List[float]] = Field(..., description="Relaxation operator L, row major")
    weights: List[float] = Field(..., description="Quadrature weights of the inner product")
    speeds: List[float] = Field(..., description="Per-state speeds D")
    speed_floor: float = Field(..., description="Stored lower bound D0 on |D|")
    c1: List[float]
    c2: List[float]
    w_modes: Dict[int, List[GaussianBump]] = Field(default_factory=dict,
                                                   description="Initial profile per eigenmode index")
    horizon: float = Field(..., gt=0.0, description="Time horizon T")

    @validator('operator')
    def square_operator(cls, v, values):
        m = values.get('m')
        if m is not None and (len(v) != m or any(len(row) != m for row in v)):
            raise ValueError(f"operator must be {m}x{m}")
        return v

    @validator('weights')
    def positive_weights(cls, v, values):
        m = values.get('m')
        if m is not None and len(v) != m:
            raise ValueError(f"expected {m} weights")
        if any(not w > 0.0 for w in v):
            raise ValueError("weights must be positive")
        return v

    @validator('speeds', 'c1', 'c2')
    def per_state(cls, v, values):
        m = values.get('m')
        if m is not None and len(v) != m:
            raise ValueError(f"expected {m} per-state values")
        return v

    @validator('speed_floor')
    def speed_bound(cls, v, values):
        speeds = values.get('speeds')
        if not v > 0.0 or (speeds and min(abs(d) for d in speeds) < v):
            raise ValueError("speed lower bound violated")
        return v

    class Config:
        frozen = True

    @property
    def L(self) -> np.ndarray:
        return np.array(self.operator, dtype=float)

    @property
    def D(self) -> np.ndarray:
        return np.array(self.speeds, dtype=float)

    @property
    def W(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    @property
    def T(self) -> float:
        return self.horizon

    def nonlinearity(self, U: np.ndarray) -> np.ndarray:
        """F(U) for arrays whose last axis is the state index"""
        c1 = np.array(self.c1)
        c2 = np.array(self.c2)
        return c1 * U + c2 * U * U

    def nonlinearity_slope(self, U: np.ndarray) -> np.ndarray:
        """Diagonal of F′(U), same shape as U"""
        return np.array(self.c1) + 2.0 * np.array(self.c2) * U

    def max_slope(self, bound: float) -> float:
        """max |F′(U)| over |Uⱼ| ≤ bound"""
        c1 = np.abs(np.array(self.c1))
        c2 = np.abs(np.array(self.c2))
        return float(np.max(c1 + 2.0 * c2 * bound))

    def is_linear(self) -> bool:
        return not any(self.c1) and not any(self.c2)


class DecayCertificate(BaseModel):
    """Envelope |w(z)| ≤ C·exp(−β_min (z − z₀)²) over all bumps"""
    C: float = Field(..., ge=0.0)
    beta_min: float = Field(..., gt=0.0, description="+inf when there is no data")
    z_min: float = 0.0
    z_max: float = 0.0


class ConditionVerdict(BaseModel):
    """Pass/fail of one structural condition with its numeric witness"""
    name: str
    passed: bool
    witness: str
    value: Optional[float] = None


class ConditionReport(BaseModel):
    """Verdicts for conditions I–VIII"""
    verdicts: List[ConditionVerdict]
    coefficients: Dict[int, List[float]] = Field(default_factory=dict,
                                                 description="(amplitude, beta, center) of every bump, per initial mode")

    @property
    def passed(self) -> bool:
        return len(self.verdicts) == 8 and all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> ConditionVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def failed(self) -> List[str]:
        return [v.name for v in self.verdicts if not v.passed]


class Triangle(BaseModel):
    """
    Characteristic triangle with apex M₀ = (x₀, t₀)

    Base Γ₀ = [M₂, M₁] on t = 0 with M₁ = x₀ − d_min·t₀, M₂ = x₀ − d_max·t₀.
    """
    x0: float
    t0: float = Field(..., gt=0.0)
    d_min: float
    d_max: float
    m1: float
    m2: float

    class Config:
        frozen = True

    def contains(self, x, t, floor: float = 1e-12):
        """
        Membership of (x, t) in Δ₀, vectorized.

        A point belongs iff 0 ≤ t ≤ t₀ and both extreme backward
        characteristics land on the base. Boundary points are included.
        """
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        foot_slow = x - self.d_min * t
        foot_fast = x - self.d_max * t
        return ((t >= -floor) & (t <= self.t0 + floor)
                & (foot_slow <= self.m1 + floor) & (foot_fast >= self.m2 - floor))


class LemmaVerdict(str, Enum):
    """Outcome of one lemma instance"""
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"


class LemmaOutcome(BaseModel):
    """One row of a lemma suite"""
    lemma: int
    instance: int = 0
    verdict: LemmaVerdict
    ratio: Optional[float] = None
    margin: Optional[float] = None
    detail: str = ""

    class Config:
        use_enum_values = True


class SelfConvergence(BaseModel):
    """Richardson estimate of the reference scheme's own order"""
    eps: float
    differences: List[float]
    dx: List[float]
    dt: List[float]
    order: Optional[float] = None
    sentinel: Optional[str] = None


class SlopeFit(BaseModel):
    """Least-squares line through (log ε, log E)"""
    slope: float
    intercept: float
    residual: float


class ConvergenceEntry(BaseModel):
    """Measurements for one ε"""
    eps: float
    error: float
    defect: float
    kernel_defect: float
    ratio: float
    dx: float
    dt: float
    snapshots: List[float]
    solver_error: Optional[float] = None


class ConvergenceReport(BaseModel):
    """Per-ε errors and defects with fitted slopes"""
    order: int
    entries: List[ConvergenceEntry]
    error_fit: SlopeFit
    defect_fit: Optional[SlopeFit] = None
    kernel_defect_fit: Optional[SlopeFit] = None
    c_hat: float
    horizon: float
    flags: List[str] = Field(default_factory=list)
    grid: Dict[str, Any] = Field(default_factory=dict)

    @property
    def eps(self) -> List[float]:
        return [e.eps for e in self.entries]

    @property
    def errors(self) -> List[float]:
        return [e.error for e in self.entries]

    @property
    def slope(self) -> float:
        return self.error_fit.slope


class TheoremVerdict(BaseModel):
    """Outcome of the ‖R_N‖ ≤ C ε^{N+1} check"""
    passed: bool
    slope: float
    required_slope: float
    ratio_spread: float
    c_hat: float
    reasons: List[str] = Field(default_factory=list)


# wall-clock fields differ between otherwise identical runs
VOLATILE_MANIFEST_FIELDS = {'created_at', 'stage_seconds'}


class RunManifest(BaseModel):
    """Everything needed to reproduce a CLI run"""
    command: str
    spec_path: Optional[str] = None
    spec_hash: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    version: str
    stage_seconds: Dict[str, float] = Field(default_factory=dict)
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    def reproducible_view(self) -> Dict[str, Any]:
        """JSON-ready manifest without timing fields; equal for identical runs"""
        return self.model_dump(mode='json', exclude=VOLATILE_MANIFEST_FIELDS)
