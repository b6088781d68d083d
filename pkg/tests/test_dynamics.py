import math

import numpy as np
import pytest

import fluxonium_cz as fz
from fluxonium_cz.dynamics import CZ, avg_gate_fidelity, leakage, project_and_fix, propagate
from fluxonium_cz.errors import NumericalError, PhaseUndefinedError
from fluxonium_cz.pulse import PulseSpec

TWO_PI = 2.0 * math.pi


def _synthetic_full(joint, comp_phases, scale=1.0):
    """Diagonal full-space operator with given phases on the computational states."""
    u = np.eye(joint.dim, dtype=complex)
    for idx, phase in zip(joint.computational_indices, comp_phases):
        u[idx, idx] = scale * np.exp(1j * phase)
    return u


def test_free_evolution_phases(joint):
    spec = PulseSpec(0.0, 0.0, 5.2, t_width=10.0, t_plateau=23.0)
    u = propagate(joint, spec, tol=1e-10)
    expected = np.diag(np.exp(-1j * TWO_PI * joint.energies * spec.t_gate))
    assert np.abs(u - expected).max() < 1e-8


def test_short_pulse_is_identity(joint, design):
    spec0, _ = design
    spec = PulseSpec(spec0.eps_a, spec0.eps_b, spec0.f_d, t_width=1e-3, t_plateau=0.0)
    u = propagate(joint, spec, tol=1e-10)
    assert np.abs(u - np.eye(joint.dim)).max() < 1e-6


def test_unitarity_within_contract(joint, design):
    spec, _ = design
    tol = 1e-10
    u = propagate(joint, spec, tol=tol)
    col_norm_dev = np.abs(np.linalg.norm(u, axis=0) - 1.0).max()
    assert col_norm_dev < 10.0 * tol
    assert np.abs(u.conj().T @ u - np.eye(joint.dim)).max() < 1e-8


def test_tolerance_halving_stable_fidelity(joint, design):
    spec0, _ = design
    # shorter pulse keeps this two-propagation check quick
    spec = PulseSpec(spec0.eps_a, spec0.eps_b, spec0.f_d, t_width=5.0, t_plateau=10.0)
    f = []
    for tol in (2e-10, 1e-10):
        res = project_and_fix(propagate(joint, spec, tol=tol), joint)
        f.append(res.fidelity)
    assert abs(f[0] - f[1]) < 1e-8


def test_tol_domain(joint, design):
    spec, _ = design
    with pytest.raises(ValueError):
        propagate(joint, spec, tol=1e-5)
    with pytest.raises(ValueError):
        propagate(joint, spec, tol=1e-13)


def test_columns_subset_matches_full(joint, design):
    spec0, _ = design
    spec = PulseSpec(spec0.eps_a, spec0.eps_b, spec0.f_d, t_width=3.0, t_plateau=4.0)
    comp = joint.computational_indices
    u_full = propagate(joint, spec, tol=1e-9)
    u_cols = propagate(joint, spec, tol=1e-9, columns=comp)
    assert np.abs(u_full[:, comp] - u_cols).max() < 1e-8
    res_full = project_and_fix(u_full, joint)
    res_cols = project_and_fix(u_cols, joint)
    assert res_full.fidelity == pytest.approx(res_cols.fidelity, abs=1e-9)


def test_gauge_combination_example(joint):
    u = _synthetic_full(joint, (0.3, -0.2, 0.5, 1.1))
    res = project_and_fix(u, joint)
    assert res.delta_phi == pytest.approx(1.1 + 0.3 - (-0.2) - 0.5, abs=1e-12)
    # fixed operator has real-positive 00, 01, 10 diagonal
    d = np.diag(res.u_comp)
    assert np.allclose(np.angle(d[:3]), 0.0, atol=1e-12)
    assert np.angle(d[3]) == pytest.approx(res.delta_phi, abs=1e-12)


def test_identity_fidelity_against_cz(joint):
    u = np.eye(joint.dim, dtype=complex)
    res = project_and_fix(u, joint)
    assert res.delta_phi == 0.0
    assert res.fidelity == pytest.approx(0.4, abs=1e-12)


def test_free_evolution_conditional_phase(joint, summary):
    t = 80.0
    spec = PulseSpec(0.0, 0.0, 5.2, t_width=10.0, t_plateau=60.0)
    res = project_and_fix(propagate(joint, spec, tol=1e-10), joint)
    expected = np.angle(np.exp(-1j * TWO_PI * summary.xi_zz * t))
    assert res.delta_phi == pytest.approx(expected, abs=1e-7)


def test_virtual_z_gauge_invariance(joint, design):
    spec0, _ = design
    spec = PulseSpec(spec0.eps_a, spec0.eps_b, spec0.f_d, t_width=3.0, t_plateau=2.0)
    u = propagate(joint, spec, tol=1e-9)
    base = project_and_fix(u, joint)
    rng = np.random.default_rng(11)
    for _ in range(5):
        pre = np.ones(joint.dim, dtype=complex)
        pre[joint.computational_indices] = np.exp(1j * rng.uniform(-np.pi, np.pi, 4))
        res = project_and_fix(pre[:, None] * u, joint)
        assert res.fidelity == pytest.approx(base.fidelity, abs=1e-10)
        assert res.p_leak == pytest.approx(base.p_leak, abs=1e-10)


def test_avg_gate_fidelity_values():
    assert avg_gate_fidelity(CZ, CZ) == pytest.approx(1.0, abs=1e-15)
    assert avg_gate_fidelity(np.eye(4, dtype=complex)) == pytest.approx(0.4, abs=1e-15)
    rng = np.random.default_rng(3)
    for phi in np.concatenate(([np.pi / 2], rng.uniform(-np.pi, np.pi, 10))):
        u = np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)])
        expected = 1.0 - 0.3 * (1.0 + math.cos(phi))
        assert avg_gate_fidelity(u) == pytest.approx(expected, abs=1e-12)
    assert avg_gate_fidelity(np.diag([1, 1, 1, 1j])) == pytest.approx(0.7, abs=1e-12)


def test_leakage_values():
    assert abs(leakage(CZ)) <= 1e-9
    u = np.eye(4, dtype=complex)
    u[:, 3] = 0.0
    assert leakage(u) == pytest.approx(0.25, abs=1e-15)


def test_phase_undefined_error(joint):
    u = _synthetic_full(joint, (0.0, 0.0, 0.0, 0.0))
    k11 = joint.label_map[(1, 1)]
    u[k11, k11] = 1e-8
    with pytest.raises(PhaseUndefinedError):
        project_and_fix(u, joint)


def test_column_norm_invariant(joint):
    u = _synthetic_full(joint, (0.0, 0.0, 0.0, 0.0), scale=1.0 + 1e-6)
    with pytest.raises(NumericalError):
        project_and_fix(u, joint)


def test_evolve_states_matches_propagate(joint, design):
    spec0, _ = design
    spec = PulseSpec(spec0.eps_a, spec0.eps_b, spec0.f_d, t_width=3.0, t_plateau=2.0)
    k10 = joint.label_map[(1, 0)]
    psi0 = np.zeros(joint.dim, dtype=complex)
    psi0[k10] = 1.0
    traj = fz.evolve_states(joint, spec, psi0, [0.0, spec.t_gate / 2, spec.t_gate], tol=1e-9)
    u = propagate(joint, spec, tol=1e-9, columns=[k10])
    assert np.abs(traj[0, :, 0] - psi0).max() < 1e-9
    assert np.abs(traj[-1, :, 0] - u[:, 0]).max() < 1e-7
    norms = np.linalg.norm(traj[:, :, 0], axis=1)
    assert np.abs(norms - 1.0).max() < 1e-7
