"""
Tests for surge profiles, boundary terms and assembly
"""

import pytest
import numpy as np
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from asymptotics.errors import ExpansionError
from asymptotics.expansion import (
    Profile,
    ProjectedNonlinearity,
    assemble_UN,
    assemble_field,
    build_boundary_terms,
    build_surge_terms,
    build_expansion,
    phi1_source,
    projected_nonlinearity,
    required_zeta_range,
    solve_phi0,
)
from asymptotics.models import GaussianBump
from asymptotics.problem import load_problem
from asymptotics.spectral import drift_coefficient, eigendecompose, psi0, zero_mode


def canonical_text(c2="-1, -1", modes="mode0 = 1, 1, 0", T=0.25):
    return f"""
[operator]
m = 2
row1 = -1, 1
row2 = 1, -1

[speeds]
D = 2, 1

[nonlinearity]
c2 = {c2}

[initial]
{modes}

[run]
T = {T}
"""


def _build(text, order, eps_values=(0.1,)):
    spec = load_problem(text)
    sd = eigendecompose(spec.L, spec.W)
    B = drift_coefficient(sd, spec.D)
    zeta_range = required_zeta_range(spec, B, eps_values, spec.T)
    return spec, build_expansion(spec, sd, order, zeta_range, spec.T)


def test_projected_nonlinearity():
    """Test F̄(φ) = −φ² for the canonical model"""
    spec = load_problem(canonical_text())
    sd = eigendecompose(spec.L, spec.W)
    h0, h0s = zero_mode(sd)
    fbar = projected_nonlinearity(spec, h0, h0s)
    assert fbar.a1 == pytest.approx(0.0)
    assert fbar.a2 == pytest.approx(-1.0)
    assert fbar(2.0) == pytest.approx(-4.0)


def test_canonical_summary():
    """Test the coefficients carried by the expansion set"""
    _, exp_set = _build(canonical_text(), 0)
    summary = exp_set.summary()

    assert summary['B'] == pytest.approx(2.0 / 3.0)
    assert summary['g'] == pytest.approx(-0.125)
    assert summary['mu'] == pytest.approx(1.0 / 18.0)
    assert summary['k_gap'] == pytest.approx(2.0)
    assert exp_set.q == pytest.approx([-0.25, 0.25])
    assert exp_set.phi1 is None


def test_phi0_sup_nonincreasing():
    """Test the damped profile stays positive and its sup never grows"""
    _, exp_set = _build(canonical_text(), 0)
    phi0 = exp_set.phi0
    sups = phi0.sup_norms()

    assert sups[0] == pytest.approx(1.0, abs=1e-3)
    assert np.all(np.diff(sups) <= 1e-12)
    assert sups[-1] < sups[0]
    assert phi0.values[-1].min() >= -1e-12


def test_phi0_linear_heat_kernel():
    """Test F ≡ 0 reproduces the spreading Gaussian"""
    _, exp_set = _build(canonical_text(c2="0, 0"), 0)
    phi0 = exp_set.phi0
    mu, B = exp_set.mu, exp_set.B
    a = 1.0 / (B * B)
    t = phi0.times[-1]
    spread = 1.0 + 4.0 * a * mu * t
    exact = np.exp(-a * phi0.zeta ** 2 / spread) / np.sqrt(spread)

    assert t == pytest.approx(0.25)
    assert np.max(np.abs(phi0.values[-1] - exact)) < 1e-4


def test_solve_phi0_rejects_antidiffusion():
    """Test μ ≤ 0 is refused"""
    zeta = np.linspace(-1.0, 1.0, 21)
    with pytest.raises(ExpansionError, match="diffusion coefficient"):
        solve_phi0(-0.1, ProjectedNonlinearity(a1=0.0, a2=0.0), np.zeros_like(zeta), zeta, 0.1)


def test_surge_terms_on_linear_profile():
    """Test φ₀ = ζ gives s₁ = −B·G(Ψ₀h₀) = (1/6, −1/6) and a pure-h₀ s₀"""
    spec = load_problem(canonical_text())
    sd = eigendecompose(spec.L, spec.W)
    B = drift_coefficient(sd, spec.D)
    zeta = np.linspace(-1.0, 1.0, 21)
    times = np.array([0.0, 0.1, 0.2, 0.3])
    phi0 = Profile(zeta=zeta, times=times, values=np.tile(zeta, (times.size, 1)))

    s0, s1 = build_surge_terms(sd, psi0(sd, spec.D), phi0, None, B)
    first = s1.on_grid()
    assert first[..., 0] == pytest.approx(np.full((4, 21), 1.0 / 6.0))
    assert first[..., 1] == pytest.approx(np.full((4, 21), -1.0 / 6.0))

    leading = s0(np.array([0.35, -0.5]), 0.15)
    assert leading == pytest.approx(np.array([[0.35, 0.35], [-0.5, -0.5]]))
    assert sd.inner(s0.on_grid(), sd.left_modes[1].real) == pytest.approx(np.zeros((4, 21)), abs=1e-12)

    with pytest.raises(ExpansionError, match="grid underflow"):
        s0(np.array([2.0]), 0.1)


def test_leading_surge_term_is_pure_kernel_mode():
    """Test s₀ = φ₀h₀ carries no component along h₁ anywhere on the (t, ζ) grid"""
    _, exp_set = _build(canonical_text(modes="mode0 = 1, 1, 0\nmode1 = 0.5, 2, 0.3"), 0)
    spec = load_problem(canonical_text())
    sd = eigendecompose(spec.L, spec.W)
    grid = exp_set.s0.on_grid()

    assert sd.inner(grid, sd.left_modes[1].real) == pytest.approx(np.zeros(grid.shape[:2]), abs=1e-12)
    assert sd.inner(grid, exp_set.h0_star) == pytest.approx(exp_set.phi0.values, abs=1e-12)

    zeta = np.linspace(exp_set.zeta_grid[0], exp_set.zeta_grid[-1], 37)
    values = exp_set.s0(zeta, 0.13)
    assert values[:, 0] == pytest.approx(values[:, 1], abs=1e-14)


def test_linear_profile_conserves_mass():
    """Test ∫φ₀dζ is constant in time when F ≡ 0"""
    _, exp_set = _build(canonical_text(c2="0, 0"), 0)
    phi0 = exp_set.phi0
    mass = phi0.values.sum(axis=1) * phi0.dz

    assert mass[0] == pytest.approx(exp_set.B * np.sqrt(np.pi), rel=1e-6)
    assert mass == pytest.approx(np.full(mass.size, mass[0]), rel=1e-8)


def test_boundary_layer_decay():
    """Test p₀ = exp(−ξ²)e^{−2τ}(1,−1) and its decay rate"""
    spec = load_problem(canonical_text(modes="mode1 = 1, 1, 0"))
    sd = eigendecompose(spec.L, spec.W)
    B = drift_coefficient(sd, spec.D)
    terms = build_boundary_terms(sd, spec.D, spec.w_modes, B)
    xi = np.linspace(-3.0, 3.0, 31)

    p = terms.p0(xi, 0.7)
    assert p[:, 0] == pytest.approx(np.exp(-xi ** 2) * np.exp(-1.4))
    assert p[:, 1] == pytest.approx(-p[:, 0])

    start = np.max(np.abs(terms.p0(xi, 0.0)))
    later = np.max(np.abs(terms.p0(xi, 3.0)))
    assert later <= np.exp(-2.0 * 3.0) * start * (1.0 + 1e-6)


def test_first_order_matching():
    """Test the matched φ₁ cancels the kernel part of p₁ as τ → ∞"""
    _, exp_set = _build(canonical_text(modes="mode0 = 1, 1, 0\nmode1 = 0.5, 2, 0.3"), 1)
    boundary = exp_set.boundary
    xi = np.linspace(-2.0, 2.0, 41)

    assert exp_set.phi1 is not None
    assert np.max(np.abs(boundary.kernel_limit(xi))) < 1e-6
    late = boundary.p1_coefficients(xi, 40.0)
    assert np.max(np.abs(late[:, 0])) < 1e-6


def test_first_order_build_on_canonical_model():
    """Test the exactly cancelling ε² right side still yields ρ₁ ≈ 0 and φ₁ ≡ 0"""
    spec, exp_set = _build(canonical_text(), 1, eps_values=(0.2, 0.1, 0.05, 0.025))
    sd = eigendecompose(spec.L, spec.W)
    rho = phi1_source(spec, sd, exp_set.psi0, exp_set.B, exp_set.mu,
                      projected_nonlinearity(spec, exp_set.h0, exp_set.h0_star), exp_set.phi0)

    assert rho.shape == exp_set.phi0.values.shape
    assert np.max(np.abs(rho)) < 1e-10
    assert np.max(np.abs(exp_set.phi1.values)) < 1e-10
    assert exp_set.s1.on_grid()[..., 0] == pytest.approx(-exp_set.s1.on_grid()[..., 1], abs=1e-9)


def test_assemble_initial_matches_data():
    """Test U₀ at t = 0 reproduces w(x/ε)"""
    spec, exp_set = _build(canonical_text(modes="mode0 = 1, 1, 0\nmode1 = 0.5, 2, 0.3"), 0)
    eps = 0.1
    x = np.linspace(-0.3, 0.3, 25)
    U = assemble_UN(exp_set, 0, eps, x, 0.0).values
    xi = x / eps
    expected = np.exp(-xi ** 2)[:, None] * np.ones(2) + 0.5 * np.exp(-2.0 * (xi - 0.3) ** 2)[:, None] * np.array([1.0, -1.0])

    assert U.shape == (25, 2)
    assert np.max(np.abs(U - expected)) < 1e-4


def test_assemble_field_shapes():
    """Test snapshots stack along the first axis"""
    _, exp_set = _build(canonical_text(), 1)
    x = np.linspace(-0.2, 0.5, 15)
    field = assemble_field(exp_set, 1, 0.1, x, [0.0, 0.1, 0.25])
    assert field.values.shape == (3, 15, 2)
    assert np.all(np.isfinite(field.values))
    assert field.scheme['source'] == 'expansion N=1'


def test_assemble_errors():
    """Test order and ε validation"""
    _, exp_set = _build(canonical_text(), 0)
    x = np.zeros(3)
    with pytest.raises(ExpansionError, match="order 1 requested"):
        assemble_UN(exp_set, 1, 0.1, x, 0.0)
    with pytest.raises(ExpansionError, match="order must be 0 or 1"):
        assemble_UN(exp_set, 2, 0.1, x, 0.0)
    with pytest.raises(ExpansionError, match="eps must be positive"):
        assemble_UN(exp_set, 0, 0.0, x, 0.0)


def test_order_validation_on_build():
    """Test only orders 0 and 1 are built"""
    spec = load_problem(canonical_text())
    sd = eigendecompose(spec.L, spec.W)
    with pytest.raises(ExpansionError, match="order must be 0 or 1"):
        build_expansion(spec, sd, 2, (-1.0, 1.0), spec.T)


def test_gaussian_bump_rejects_flat_profile():
    """Test β ≤ 0 fails model validation"""
    with pytest.raises(ValueError):
        GaussianBump(amplitude=1.0, beta=0.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
