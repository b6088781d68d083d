import math

import numpy as np
import pytest

from fluxonium_cz.pulse import PulseSpec, drive_matrix, drive_operator, edge_area, envelope


@pytest.fixture
def spec():
    return PulseSpec(eps_a=0.018, eps_b=0.02, f_d=5.2, t_width=15.0, t_plateau=25.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        PulseSpec(1, 1, 5, t_width=0.0, t_plateau=1)
    with pytest.raises(ValueError):
        PulseSpec(1, 1, 5, t_width=1.0, t_plateau=-0.1)
    s = PulseSpec(0.9, 1.0, 5.0, 15.0, 30.0)
    assert s.t_gate == 60.0
    assert s.amp_ratio == pytest.approx(0.9)


def test_envelope_endpoints_and_plateau(spec):
    assert envelope(0.0, spec) == pytest.approx(0.0, abs=1e-15)
    assert envelope(spec.t_gate, spec) == pytest.approx(0.0, abs=1e-15)
    assert envelope(spec.t_width + spec.t_plateau / 2, spec) == 1.0
    assert envelope(spec.t_width, spec) == pytest.approx(1.0, abs=1e-15)
    assert envelope(spec.t_width + spec.t_plateau, spec) == pytest.approx(1.0, abs=1e-15)


def test_envelope_edge_value_direct_evaluation(spec):
    # normalized Gaussian edge with sigma = t_width / sqrt(2 pi), evaluated at t = t_width/2
    sigma = spec.t_width / math.sqrt(2 * math.pi)
    raw = math.exp(-((7.5 - 15.0) ** 2) / (2 * sigma**2))
    expected = (raw - math.exp(-math.pi)) / (1 - math.exp(-math.pi))
    assert expected == pytest.approx(0.431365189545061, abs=1e-12)
    assert envelope(7.5, spec) == pytest.approx(expected, abs=1e-12)


def test_envelope_symmetry_and_monotonicity(spec):
    t = np.linspace(0.0, spec.t_gate, 801)
    e = envelope(t, spec)
    assert np.abs(e - e[::-1]).max() < 1e-12
    rise = envelope(np.linspace(0, spec.t_width, 200), spec)
    assert np.all(np.diff(rise) >= -1e-15)
    fall = envelope(np.linspace(spec.t_gate - spec.t_width, spec.t_gate, 200), spec)
    assert np.all(np.diff(fall) <= 1e-15)


def test_envelope_domain_errors(spec):
    with pytest.raises(ValueError):
        envelope(-0.01, spec)
    with pytest.raises(ValueError):
        envelope(spec.t_gate + 0.01, spec)


def test_edge_area_matches_quadrature(spec):
    t = np.linspace(0.0, spec.t_width, 20001)
    numeric = np.trapezoid(envelope(t, spec), t) / spec.t_width
    assert edge_area() == pytest.approx(numeric, abs=1e-8)


def test_drive_operator_zero_cases(joint, spec):
    zero_spec = PulseSpec(0.0, 0.0, spec.f_d, spec.t_width, spec.t_plateau)
    assert np.abs(drive_operator(joint, zero_spec, 10.0)).max() == 0.0
    assert np.abs(drive_operator(joint, spec, 0.0)).max() == pytest.approx(0.0, abs=1e-15)


def test_drive_operator_hermitian_and_linear(joint, spec):
    t = 17.3
    op = drive_operator(joint, spec, t)
    assert np.abs(op - op.conj().T).max() < 1e-12
    double = PulseSpec(2 * spec.eps_a, 2 * spec.eps_b, spec.f_d, spec.t_width, spec.t_plateau)
    assert np.allclose(drive_operator(joint, double, t), 2 * op, atol=1e-14)
    only_a = PulseSpec(spec.eps_a, 0.0, spec.f_d, spec.t_width, spec.t_plateau)
    only_b = PulseSpec(0.0, spec.eps_b, spec.f_d, spec.t_width, spec.t_plateau)
    assert np.allclose(
        drive_operator(joint, only_a, t) + drive_operator(joint, only_b, t), op, atol=1e-14
    )


def test_drive_matrix_composition(joint, spec):
    mat = drive_matrix(joint, spec)
    assert np.allclose(mat, spec.eps_a * joint.charge_a + spec.eps_b * joint.charge_b)
