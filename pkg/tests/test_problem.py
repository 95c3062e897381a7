"""
Tests for problem documents and initial data
"""

import pytest
import numpy as np
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from asymptotics.errors import ConfigError
from asymptotics.models import GaussianBump, ProblemSpec
from asymptotics.principles import random_metzler
from asymptotics.problem import (
    dump_problem,
    load_problem,
    load_problem_file,
    mode_derivative,
    mode_profile,
    sample_initial,
    spec_hash,
    truncation_window,
    validate_initial_decay,
    window_grid,
)
from asymptotics.spectral import eigendecompose

CONFIG_DIR = Path(__file__).parent.parent / "config"

CANONICAL = """
[operator]
m = 2
row1 = -1, 1
row2 = 1, -1
weights = 1, 1

[speeds]
D = 2, 1

[nonlinearity]
c2 = -1, -1

[initial]
mode0 = 1, 1, 0

[run]
T = 0.25
"""


def test_load_canonical():
    """Test the canonical document parses with the derived speed floor"""
    spec = load_problem(CANONICAL)

    assert spec.m == 2
    assert spec.operator == [[-1.0, 1.0], [1.0, -1.0]]
    assert spec.speeds == [2.0, 1.0]
    assert spec.speed_floor == 1.0
    assert spec.c1 == [0.0, 0.0]
    assert spec.c2 == [-1.0, -1.0]
    assert spec.T == 0.25
    assert len(spec.w_modes[0]) == 1
    assert spec.w_modes[0][0].beta == 1.0


def test_shipped_canonical_matches_inline():
    """Test config/canonical.cfg describes the same instance"""
    spec, text = load_problem_file(CONFIG_DIR / "canonical.cfg")
    assert spec == load_problem(CANONICAL)
    assert spec_hash(text) == spec_hash(text)
    assert len(spec_hash(text)) == 64


def test_dump_reload_is_stable():
    """Test load → dump → load gives an equal spec"""
    text = CANONICAL.replace("mode0 = 1, 1, 0", "mode0 = 0.1, 0.3, 1e-3; -2.5e-1, 7, -1\nmode1 = 0.3333333333333333, 2")
    spec = load_problem(text)
    again = load_problem(dump_problem(spec))
    assert again == spec
    assert dump_problem(again) == dump_problem(spec)


def test_keys_are_case_insensitive():
    """Test upper-case keys and comments are accepted"""
    spec = load_problem(CANONICAL.replace("T = 0.25", "t = 0.5   # horizon").replace("D = 2, 1", "d = 2, 1"))
    assert spec.T == 0.5
    assert spec.speeds == [2.0, 1.0]


def test_nonpositive_beta_rejected_with_location():
    """Test a non-decaying bump names field and line"""
    with pytest.raises(ConfigError) as info:
        load_problem(CANONICAL.replace("mode0 = 1, 1, 0", "mode0 = 1, 0, 0"))
    assert "not Gaussian-decaying" in str(info.value)
    assert info.value.field == "mode0"
    assert info.value.line == 15


def test_speed_floor_violation():
    """Test D0 above min |D| is rejected"""
    with pytest.raises(ConfigError, match="speed lower bound"):
        load_problem(CANONICAL.replace("D = 2, 1", "D = 2, 1\nD0 = 1.5"))


@pytest.mark.parametrize("text,message", [
    (CANONICAL.replace("[run]\nT = 0.25", ""), "missing section"),
    (CANONICAL.replace("row2 = 1, -1", "row2 = 1"), "expected 2 values"),
    (CANONICAL.replace("T = 0.25", "T = abc"), "not a number"),
    (CANONICAL.replace("T = 0.25", "T = -1"), "must be positive"),
    (CANONICAL.replace("[speeds]", "[velocities]"), "unknown section"),
    (CANONICAL.replace("mode0 = 1, 1, 0", "mode5 = 1, 1, 0"), "exceeds state count"),
    (CANONICAL.replace("weights = 1, 1", "weights = 1, 0"), "weights must be positive"),
])
def test_bad_documents(text, message):
    """Test every malformed document raises ConfigError"""
    with pytest.raises(ConfigError, match=message):
        load_problem(text)


def test_mode_profile_and_derivative():
    """Test the analytic derivative against a central difference"""
    spec = load_problem(CANONICAL)
    bumps = spec.w_modes[0]
    z = np.linspace(-3.0, 3.0, 61)
    h = 1e-5

    assert mode_profile(bumps, z) == pytest.approx(np.exp(-z ** 2))
    numeric = (mode_profile(bumps, z + h) - mode_profile(bumps, z - h)) / (2 * h)
    assert mode_derivative(bumps, z) == pytest.approx(numeric, abs=1e-8)


def test_sample_initial_along_kernel():
    """Test w(ξ) = exp(−ξ²)·h₀ for the canonical data"""
    spec = load_problem(CANONICAL)
    sd = eigendecompose(spec.L, spec.W)
    xi = np.linspace(-2.0, 2.0, 9)

    field = sample_initial(spec, sd, xi)
    assert field.values.shape == (9, 2)
    assert field.values[:, 0] == pytest.approx(np.exp(-xi ** 2))
    assert field.values[:, 1] == pytest.approx(np.exp(-xi ** 2))


def test_sample_initial_mode_count_mismatch():
    """Test profiles for modes the operator lacks are rejected"""
    spec = load_problem(CANONICAL)
    sd = eigendecompose(spec.L, spec.W)
    bad = spec.model_copy(update={'w_modes': {0: spec.w_modes[0], 3: spec.w_modes[0]}})
    with pytest.raises(ConfigError, match="mode-count mismatch"):
        sample_initial(bad, sd, np.zeros(3))


def test_decay_certificate_and_window():
    """Test envelope constants and the truncation window"""
    spec = load_problem(CANONICAL)
    cert = validate_initial_decay(spec)
    assert cert.C == 1.0
    assert cert.beta_min == 1.0

    centre, half = truncation_window(spec, cert, eps=0.1, horizon=0.25, width=6.0)
    # ξ from −6 to 6 + 2·0.25/0.1 = 11
    assert centre - half == pytest.approx(-0.6)
    assert centre + half == pytest.approx(1.1)

    x = window_grid(centre, half, 0.01)
    assert x[0] == pytest.approx(-0.6)
    assert x[-1] >= 1.1 - 1e-12
    assert np.diff(x) == pytest.approx(np.full(x.size - 1, 0.01))


def test_empty_initial_data():
    """Test no modes gives a zero envelope with infinite decay"""
    spec = load_problem(CANONICAL.replace("mode0 = 1, 1, 0", ""))
    cert = validate_initial_decay(spec)
    assert cert.C == 0.0
    assert np.isinf(cert.beta_min)


def test_sample_initial_is_linear():
    """Test w ↦ Σ wᵢhᵢ is linear in the mode profiles"""
    spec = load_problem(CANONICAL)
    sd = eigendecompose(spec.L, spec.W)
    xi = np.linspace(-3.0, 3.0, 31)
    first = {0: [GaussianBump(amplitude=0.7, beta=1.5, center=0.2)],
             1: [GaussianBump(amplitude=-0.4, beta=0.8, center=-1.0)]}
    second = {0: [GaussianBump(amplitude=1.3, beta=0.5, center=-0.5)],
              1: [GaussianBump(amplitude=2.0, beta=3.0, center=0.4)]}

    def sample(modes):
        return sample_initial(spec.model_copy(update={'w_modes': modes}), sd, xi).values

    combined = {i: first[i] + second[i] for i in (0, 1)}
    assert sample(combined) == pytest.approx(sample(first) + sample(second), abs=1e-14)

    scaled = {i: [b.model_copy(update={'amplitude': -2.5 * b.amplitude}) for b in bumps]
              for i, bumps in first.items()}
    assert sample(scaled) == pytest.approx(-2.5 * sample(first), abs=1e-14)


def _random_spec(rng):
    m = int(rng.integers(2, 6))
    speeds = [float(v) for v in rng.uniform(0.5, 3.0, size=m) * rng.choice([-1.0, 1.0], size=m)]
    modes = {}
    for index in rng.choice(m, size=int(rng.integers(1, m + 1)), replace=False):
        modes[int(index)] = [GaussianBump(amplitude=float(rng.normal()), beta=float(rng.uniform(0.1, 5.0)),
                                          center=float(rng.normal()))
                             for _ in range(int(rng.integers(1, 4)))]
    return ProblemSpec(
        m=m, operator=random_metzler(rng, m).tolist(), weights=rng.uniform(0.1, 2.0, size=m).tolist(),
        speeds=speeds, speed_floor=float(min(abs(d) for d in speeds) * rng.uniform(0.5, 1.0)),
        c1=rng.normal(size=m).tolist(), c2=rng.normal(size=m).tolist(), w_modes=modes,
        horizon=float(rng.uniform(0.05, 2.0)),
    )


def test_dump_reload_random_specs():
    """Test load(dump(spec)) == spec on random instances"""
    rng = np.random.default_rng(21)
    for _ in range(25):
        spec = _random_spec(rng)
        assert load_problem(dump_problem(spec)) == spec


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
