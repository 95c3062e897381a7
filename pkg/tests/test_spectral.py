"""
Tests for the eigenstructure and the condition checker
"""

import pytest
import numpy as np
import scipy.linalg
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from asymptotics.errors import SpectralError
from asymptotics.principles import random_metzler
from asymptotics.problem import load_problem_file
from asymptotics.spectral import (
    biorthogonality_residual,
    check_conditions,
    diffusion_coefficient,
    drift_coefficient,
    eigendecompose,
    is_metzler,
    metzler_witness,
    pseudo_inverse_apply,
    psi0,
    relaxation_propagator,
    zero_mode,
)

CONFIG_DIR = Path(__file__).parent.parent / "config"

L = np.array([[-1.0, 1.0], [1.0, -1.0]])
D = np.array([2.0, 1.0])
ONES = np.ones(2)


@pytest.fixture
def sd():
    return eigendecompose(L, ONES)


def test_canonical_zero_mode(sd):
    """Test h₀ = (1,1), h₀* = (½,½) and the gap k = 2"""
    h0, h0s = zero_mode(sd)
    assert h0 == pytest.approx([1.0, 1.0])
    assert h0s == pytest.approx([0.5, 0.5])
    assert sd.inner(h0, h0s) == pytest.approx(1.0)
    assert sd.gap == pytest.approx(2.0, abs=1e-10)
    assert sd.eigenvalues[1].real == pytest.approx(-2.0)
    assert biorthogonality_residual(sd) < 1e-12


def test_canonical_coefficients(sd):
    """Test B = 2/3, Ψ₀ = (½,−½), g = −1/8, μ = 1/18"""
    B = drift_coefficient(sd, D)
    g, mu = diffusion_coefficient(sd, D)

    assert B == pytest.approx(2.0 / 3.0, abs=1e-10)
    assert psi0(sd, D) == pytest.approx([0.5, -0.5])
    assert g == pytest.approx(-1.0 / 8.0, abs=1e-10)
    assert mu == pytest.approx(1.0 / 18.0, abs=1e-10)


def test_pseudo_inverse(sd):
    """Test G on known right sides and the solvability identities"""
    assert pseudo_inverse_apply(sd, [1.0, -1.0]) == pytest.approx([-0.5, 0.5])
    assert pseudo_inverse_apply(sd, [0.5, -0.5]) == pytest.approx([-0.25, 0.25])

    f = np.array([[3.0, -3.0], [0.2, -0.2]])
    q = pseudo_inverse_apply(sd, f)
    assert q @ L.T == pytest.approx(f)
    assert q @ np.array([0.5, 0.5]) == pytest.approx([0.0, 0.0], abs=1e-14)


def test_pseudo_inverse_rejects_kernel_component(sd):
    """Test a right side with (f, h₀*) ≠ 0 is refused"""
    with pytest.raises(SpectralError, match="not solvable"):
        pseudo_inverse_apply(sd, [1.0, 1.0])


def test_pseudo_inverse_accepts_cancelled_right_side(sd):
    """Test a rounding-level residue is judged against the size of its summands"""
    residue = np.array([[1e-16, 1e-16], [0.0, 2e-16]])
    with pytest.raises(SpectralError, match="not solvable"):
        pseudo_inverse_apply(sd, residue)
    assert np.max(np.abs(pseudo_inverse_apply(sd, residue, scale=1.0))) < 1e-15
    with pytest.raises(SpectralError, match="not solvable"):
        pseudo_inverse_apply(sd, [1e-3, 1e-3], scale=1.0)


def test_symmetric_speeds_have_no_drift(sd):
    """Test D = (1,−1) makes (Dh₀, h₀*) vanish"""
    with pytest.raises(SpectralError, match="Dh0, h0\\*"):
        drift_coefficient(sd, [1.0, -1.0])


def test_repeated_eigenvalue():
    """Test a degenerate spectrum violates Condition V"""
    L3 = np.array([[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]])
    with pytest.raises(SpectralError, match="Condition V"):
        eigendecompose(L3, np.ones(3))


def test_no_zero_mode():
    """Test an invertible operator has no kernel"""
    with pytest.raises(SpectralError, match="no zero mode"):
        eigendecompose([[-1.0, 0.5], [0.5, -2.0]], ONES)


def test_weighted_product():
    """Test biorthonormality under non-unit weights"""
    L3 = np.array([[-1.0, 0.5, 0.2], [0.6, -0.9, 0.3], [0.4, 0.4, -0.5]])
    weights = np.array([0.2, 0.5, 0.3])
    sd3 = eigendecompose(L3, weights)

    assert biorthogonality_residual(sd3) < 1e-10
    h0, h0s = zero_mode(sd3)
    assert np.max(np.abs(L3 @ h0)) < 1e-10
    # h0* is an eigenvector of the weighted adjoint W⁻¹LᵀW
    adjoint = np.diag(1.0 / weights) @ L3.T @ np.diag(weights)
    assert np.max(np.abs(adjoint @ h0s)) < 1e-10


def test_relaxation_propagator_matches_expm(sd):
    """Test the modal propagator against the matrix exponential"""
    for s in (0.0, 0.1, 1.5):
        assert relaxation_propagator(sd, s) == pytest.approx(scipy.linalg.expm(L * s), abs=1e-12)


def test_metzler_helpers():
    """Test the quasimonotonicity witness"""
    assert is_metzler(L)
    assert metzler_witness(L) == pytest.approx(-2.0)
    assert not is_metzler([[-1.0, -5.0], [0.0, -1.0]])


def test_canonical_conditions_pass():
    """Test the canonical model passes I–VIII with the expected witnesses"""
    spec, _ = load_problem_file(CONFIG_DIR / "canonical.cfg")
    report = check_conditions(spec)

    assert [v.name for v in report.verdicts] == ['I', 'II', 'III', 'IV', 'V', 'VI', 'VII', 'VIII']
    assert report.passed
    assert report.verdict('I').value == pytest.approx(2.0)
    assert report.verdict('III').value == pytest.approx(-0.125)
    assert report.verdict('VII').value == pytest.approx(-2.0)
    assert report.verdict('VIII').value == pytest.approx(1.0)
    assert report.coefficients == {0: [1.0, 1.0, 0.0]}
    assert "sup|w0|=1" in report.verdict('VI').witness


@pytest.mark.parametrize("config,failing", [
    ("equal_speeds.cfg", ['III']),
    ("non_metzler.cfg", ['VII']),
])
def test_variants_fail_exactly_one_condition(config, failing):
    """Test each shipped variant breaks exactly its condition"""
    spec, _ = load_problem_file(CONFIG_DIR / config)
    report = check_conditions(spec)
    assert not report.passed
    assert report.failed() == failing


def _random_operators(seed, count, max_states=8):
    """Random Metzler operators with zero column sums and positive weights"""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.integers(2, max_states + 1))
        yield random_metzler(rng, m), rng.uniform(0.5, 2.0, size=m), rng


def test_pseudo_inverse_contract_random():
    """Test L(Gf) = f and (Gf, h₀*) = 0 for solvable f over 100 random operators"""
    for L_rand, weights, rng in _random_operators(11, 100):
        sd_rand = eigendecompose(L_rand, weights)
        h0, h0s = zero_mode(sd_rand)
        f = rng.uniform(-1.0, 1.0, size=L_rand.shape[0])
        f = f - sd_rand.inner(f, h0s) * h0

        q = pseudo_inverse_apply(sd_rand, f)
        assert np.max(np.abs(L_rand @ q - f)) <= 1e-10 * np.max(np.abs(f))
        assert abs(sd_rand.inner(q, h0s)) <= 1e-12 * (1.0 + np.max(np.abs(q)))


def test_biorthogonality_random():
    """Test (hᵢ, hⱼ*) = δᵢⱼ and (Ψ₀h₀, h₀*) = 0 on random operators"""
    for L_rand, weights, rng in _random_operators(12, 100):
        sd_rand = eigendecompose(L_rand, weights)
        speeds = rng.uniform(0.5, 3.0, size=L_rand.shape[0])
        h0, h0s = zero_mode(sd_rand)

        assert biorthogonality_residual(sd_rand) <= 1e-10
        assert abs(sd_rand.inner(psi0(sd_rand, speeds) * h0, h0s)) <= 1e-12


@pytest.mark.parametrize("c", [0.1, 3.0, 10.0])
def test_drift_invariant_under_operator_scaling(c):
    """Test B(cL) = B(L): only the eigenvalues scale"""
    for L_rand, weights, rng in _random_operators(13, 20):
        speeds = rng.uniform(0.5, 3.0, size=L_rand.shape[0])
        B = drift_coefficient(eigendecompose(L_rand, weights), speeds)
        B_scaled = drift_coefficient(eigendecompose(c * L_rand, weights), speeds)
        assert B_scaled == pytest.approx(B, rel=1e-10)


def _shifted_operator_preserves_positivity(L_test, rng, draws=200):
    """Brute force: (L − K·Id)u > 0 for every sampled u > 0"""
    m = L_test.shape[0]
    shifted = L_test - metzler_witness(L_test) * np.eye(m)
    samples = [rng.uniform(0.0, 1.0, size=m) + 1e-6 for _ in range(draws)]
    samples += [np.eye(m)[j] + 1e-3 for j in range(m)]
    return all(np.all(shifted @ u > 0.0) for u in samples)


def test_metzler_verdict_matches_positivity_simulation():
    """Test Condition VII agrees with sampled positivity of L − K·Id on 5×5 operators"""
    rng = np.random.default_rng(14)
    verdicts = []
    for n in range(60):
        L_test = random_metzler(rng, 5)
        if n % 2:
            # flip at least one off-diagonal entry to a clearly negative value
            i, j = rng.choice(5, size=2, replace=False)
            L_test[i, j] = -rng.uniform(0.1, 1.0)
        verdict = is_metzler(L_test)
        assert verdict == _shifted_operator_preserves_positivity(L_test, rng)
        verdicts.append(verdict)

    assert any(verdicts) and not all(verdicts)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
