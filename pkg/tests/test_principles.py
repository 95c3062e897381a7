"""
Tests for characteristic triangles and the comparison-principle suites
"""

import pytest
import numpy as np
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from asymptotics.errors import PrinciplesError
from asymptotics.models import LemmaVerdict
from asymptotics.principles import (
    GaussianData,
    TransportInstance,
    bound_ratio,
    characteristic_triangle,
    lemma1_comparison,
    lemma2_counterexample_search,
    lemma2_positivity,
    lemma3_barrier,
    lemma4_bound,
    lemma4_grid_stability,
    lemma4_ratio,
    lemma5_nonlinear_bound,
    nonlinear_instance,
    random_metzler,
    relaxation_ratio,
    run_suites,
    solve_on_triangle,
)
from asymptotics.principles.sampling import barrier_pair, bound_samples
from asymptotics.settings import PrinciplesSettings

L = np.array([[-1.0, 1.0], [1.0, -1.0]])
D = np.array([2.0, 1.0])


def _constant_instance(L, D, u0, f):
    return TransportInstance(L=L, D=D, initial=GaussianData.constant(u0), source=GaussianData.constant(f))


def test_triangle_geometry():
    """Test the base end points and membership"""
    tri = characteristic_triangle(0.0, 1.0, D)
    assert tri.m1 == pytest.approx(-1.0)
    assert tri.m2 == pytest.approx(-2.0)
    assert tri.contains(0.0, 1.0)
    assert tri.contains(-1.5, 0.0)
    assert not tri.contains(-0.5, 0.0)
    assert not tri.contains(0.0, 1.2)


def test_triangle_degenerate_speeds():
    """Test equal speeds collapse the base to a point"""
    tri = characteristic_triangle(1.0, 0.5, [1.5, 1.5])
    assert tri.m1 == pytest.approx(tri.m2)


def test_triangle_rejects_nonpositive_apex():
    """Test t₀ ≤ 0 raises"""
    with pytest.raises(PrinciplesError, match="t0 > 0"):
        characteristic_triangle(0.0, 0.0, D)


def test_lemma1_m_matrix_passes():
    """Test Lop = 2·Id − L with f₂ > |f₁| passes on random draws"""
    rng = np.random.default_rng(11)
    for k in range(100):
        Lop = 2.0 * np.eye(2) - L
        f1 = rng.uniform(-1.0, 1.0, 2)
        f2 = np.abs(f1) + rng.uniform(0.1, 1.0, 2)
        outcome = lemma1_comparison(Lop, f1, f2, instance=k)
        assert outcome.verdict == LemmaVerdict.PASS
        assert outcome.margin > 0.0


def test_lemma1_hypothesis_gap_skips():
    """Test f₂ ≤ |f₁| is reported as SKIP"""
    outcome = lemma1_comparison(2.0 * np.eye(2) - L, [1.0, -1.0], [0.5, 2.0])
    assert outcome.verdict == LemmaVerdict.SKIP
    assert outcome.detail.startswith("hypothesis not met")


def test_lemma1_singular_operator_skips():
    """Test a singular operator is not evaluated"""
    outcome = lemma1_comparison(L, [0.1, 0.1], [1.0, 1.0])
    assert outcome.verdict == LemmaVerdict.SKIP


def test_lemma2_supersolution_passes():
    """Test u⁰ ≡ 1, f ≡ 1 stays positive"""
    instance = _constant_instance(L, D, [1.0, 1.0], [1.0, 1.0])
    outcome = lemma2_positivity(instance, characteristic_triangle(0.0, 1.0, D))
    assert outcome.verdict == LemmaVerdict.PASS
    assert outcome.margin >= 1.0 - 1e-9
    assert "metzler=yes" in outcome.detail


def test_lemma2_counterexample():
    """Test a strongly negative coupling drives a state below zero"""
    bad = np.array([[-1.0, -5.0], [0.0, -1.0]])
    instance = _constant_instance(bad, np.array([1.0, 1.5]), [0.1, 1.0], [0.01, 0.01])
    outcome = lemma2_positivity(instance, characteristic_triangle(0.0, 1.0, [1.0, 1.5]))
    assert outcome.verdict == LemmaVerdict.FAIL
    assert "metzler=no" in outcome.detail
    assert "state=0" in outcome.detail


def test_lemma2_counterexample_search_finds_failure():
    """Test the randomized search reports at least one violation"""
    outcomes = lemma2_counterexample_search(10, seed=3, cells=100)
    assert len(outcomes) == 10
    assert any(o.verdict == LemmaVerdict.FAIL for o in outcomes)
    assert all("metzler=no" in o.detail for o in outcomes if o.verdict != LemmaVerdict.SKIP)


def test_lemma3_barrier_consistent():
    """Test random barrier pairs pass and agree with the sum/difference check"""
    rng = np.random.default_rng(5)
    for k in range(3):
        first, second, tri = barrier_pair(rng, 3)
        outcome = lemma3_barrier(first, second, tri, cells=100, index=k)
        assert outcome.verdict == LemmaVerdict.PASS
        assert "consistent" in outcome.detail
        assert "INCONSISTENT" not in outcome.detail


def test_lemma3_requires_shared_operator():
    """Test mismatched operators are refused"""
    first = _constant_instance(L, D, [1.0, 1.0], [1.0, 1.0])
    second = _constant_instance(2.0 * L, D, [0.1, 0.1], [0.0, 0.0])
    with pytest.raises(PrinciplesError, match="share the operator"):
        lemma3_barrier(first, second, characteristic_triangle(0.0, 0.5, D))


def test_lemma4_unit_data_ratio():
    """Test u⁰ ≡ 1, f ≡ 0 gives ratio at most 1"""
    instance = _constant_instance(L, D, [1.0, 1.0], [0.0, 0.0])
    outcome = lemma4_ratio(instance, characteristic_triangle(0.3, 0.8, D))
    assert outcome.verdict == LemmaVerdict.PASS
    assert outcome.ratio <= 1.0 + 1e-6


def test_lemma4_matches_direct_relaxation():
    """Test pure relaxation against expm on the solver's own time grid"""
    rng = np.random.default_rng(8)
    L3 = random_metzler(rng, 3)
    D3 = np.array([1.0, -0.5, 2.0])
    u0 = np.array([1.0, -0.5, 0.2])
    instance = _constant_instance(L3, D3, u0, np.zeros(3))
    tri = characteristic_triangle(0.0, 0.7, D3)

    solution = solve_on_triangle(instance, tri, cells=100)
    # rows of the grid that actually hold nodes of the triangle
    times = solution.times[solution.mask.any(axis=1)]
    expected = relaxation_ratio(L3, u0, times)
    assert bound_ratio(solution) == pytest.approx(expected, abs=1e-8)


def test_lemma4_zero_instance_skipped():
    """Test all-zero data is skipped"""
    instance = _constant_instance(L, D, [0.0, 0.0], [0.0, 0.0])
    outcome = lemma4_ratio(instance, characteristic_triangle(0.0, 0.5, D), cells=50)
    assert outcome.verdict == LemmaVerdict.SKIP


def test_lemma4_bound_is_worker_independent():
    """Test Ĉ and outcome order do not depend on the thread count"""
    samples = bound_samples(6, seed=21)
    serial = lemma4_bound(samples, cells=100, workers=1)
    parallel = lemma4_bound(samples, cells=100, workers=3)
    assert serial.c_hat == parallel.c_hat
    assert serial.ratios == parallel.ratios
    assert [o.instance for o in parallel.outcomes] == list(range(6))
    assert serial.c_hat == max(serial.ratios)


def test_lemma4_grid_stability():
    """Test Ĉ changes by at most 5% when dx and dt are halved"""
    coarse, fine, change = lemma4_grid_stability(bound_samples(10, seed=4), cells=200)
    assert coarse > 0.0
    assert change <= 0.05


def test_lemma5_canonical_passes():
    """Test the damped instance obeys the linearized bound"""
    instance = nonlinear_instance()
    result = lemma5_nonlinear_bound(instance, characteristic_triangle(0.0, 1.0, D), K=1.0)

    assert result.outcome.verdict == LemmaVerdict.PASS
    assert result.halvings == 0
    assert result.horizon == pytest.approx(1.0)
    assert result.c1 == pytest.approx(1.0)
    assert result.ratio <= result.c_hat_linear
    assert result.scale_change <= 0.10


def test_lemma5_large_data_skipped():
    """Test ‖u⁰‖ ≥ C₁K is outside the hypotheses"""
    instance = nonlinear_instance(amplitude=5.0)
    result = lemma5_nonlinear_bound(instance, characteristic_triangle(0.0, 1.0, D), K=1.0)
    assert result.outcome.verdict == LemmaVerdict.SKIP


def test_lemma5_horizon_halving():
    """Test T₀ is halved until the solution stays below K"""
    instance = nonlinear_instance(amplitude=0.005, source=1.0)
    tri = characteristic_triangle(0.0, 1.0, D)

    with pytest.raises(PrinciplesError, match="no admissible horizon after 3 halvings"):
        lemma5_nonlinear_bound(instance, tri, K=0.01, max_halvings=3, scale=None)

    result = lemma5_nonlinear_bound(instance, tri, K=0.01, max_halvings=20, scale=None)
    assert result.halvings > 3
    assert result.horizon < 1.0 / 8.0
    assert result.scaled_ratio is None


@pytest.mark.parametrize("samples", [4, None])
def test_run_suites_passes_and_is_reproducible(samples):
    """Test the suites pass at a small and at the default size and repeat under another worker count"""
    first = run_suites([1, 2, 3], samples=samples, seed=99, workers=1)
    second = run_suites([1, 2, 3], samples=samples, seed=99, workers=3)
    n = samples or PrinciplesSettings().samples

    assert first.passed
    assert first.rows() == second.rows()
    assert len(first.outcomes[1]) == n
    assert len(first.outcomes[3]) == n
    # counterexample search rows follow the regular ones
    assert [o.instance for o in first.outcomes[2]] == list(range(2 * n))
    assert f"lemma 1: {n} instances" in first.summary(1)
    regular = first.outcomes[2][:n]
    assert not any(LemmaVerdict(o.verdict) == LemmaVerdict.FAIL for o in regular)


def test_run_suites_nonlinear():
    """Test the Lemma 5 suite on the canonical operator"""
    report = run_suites([5], seed=1)
    assert report.nonlinear is not None
    assert report.passed
    assert "T0=1" in report.summary(5)


def test_run_suites_rejects_unknown_lemma():
    """Test only lemmas 1..5 exist"""
    with pytest.raises(ValueError, match="unknown lemma"):
        run_suites([6], samples=1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
