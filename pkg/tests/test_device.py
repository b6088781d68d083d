import math

import numpy as np
import pytest

from fluxonium_cz.device import (
    FluxoniumParams,
    REQUIRED_LABELS,
    build_fluxonium,
    build_joint,
    flux_sweep,
    spectrum_summary,
    _oscillator_ops,
    _single_hamiltonian,
)
from fluxonium_cz.errors import ConvergenceError, LabelingError

QUBIT_A = FluxoniumParams(0.973, 0.457, 5.899, math.pi)
QUBIT_B = FluxoniumParams(1.027, 0.684, 5.768, math.pi)
J_C = 0.224


def test_params_validation():
    with pytest.raises(ValueError):
        FluxoniumParams(-1.0, 0.5, 5.0, math.pi)
    with pytest.raises(ValueError):
        FluxoniumParams(1.0, 0.0, 5.0, math.pi)
    with pytest.raises(ValueError):
        FluxoniumParams(1.0, 0.5, -0.1, math.pi)
    with pytest.raises(ValueError):
        FluxoniumParams(1.0, 0.5, 5.0, math.inf)
    FluxoniumParams(1.0, 0.5, 0.0, 0.0)  # e_j = 0 allowed


def test_commutator_in_truncated_basis():
    n = 30
    phase, charge = _oscillator_ops(n, 1.0, 0.5)
    comm = phase @ charge - charge @ phase
    target = 1j * np.eye(n)
    # the truncation corrupts only the highest-index diagonal entry
    mask = np.ones((n, n), dtype=bool)
    mask[n - 1, n - 1] = False
    assert np.abs((comm - target)[mask]).max() < 1e-12


def test_hamiltonian_hermitian():
    h, _, _ = _single_hamiltonian(QUBIT_A, 60)
    assert np.abs(h - h.conj().T).max() / np.abs(h).max() < 1e-12


def test_harmonic_limit():
    # with the junction removed the spectrum is the bare LC oscillator
    params = FluxoniumParams(0.973, 0.457, 0.0, 1.234)
    mode = build_fluxonium(params, n_basis=60)
    f_osc = math.sqrt(8.0 * 0.973 * 0.457)
    assert mode.energies[1] == pytest.approx(f_osc, rel=1e-10)
    assert np.allclose(mode.energies, f_osc * np.arange(6), rtol=1e-9, atol=1e-9)
    assert f_osc == pytest.approx(1.886, abs=5e-4)


def test_parity_selection_at_sweet_spot():
    for params in (QUBIT_A, QUBIT_B):
        mode = build_fluxonium(params)
        n = np.abs(mode.charge_op)
        # same-parity pairs among the lowest four states
        for i, j in ((0, 2), (1, 3), (0, 0), (1, 1), (2, 2), (3, 3)):
            assert n[i, j] < 1e-8, (i, j, n[i, j])
        assert n[0, 1] > 1e-3 and n[1, 2] > 0.1


def test_convergence_check_raises_for_small_basis():
    with pytest.raises(ConvergenceError):
        build_fluxonium(QUBIT_A, n_basis=20)
    build_fluxonium(QUBIT_A, n_basis=60)  # default passes


def test_convergence_on_doubling():
    e60 = build_fluxonium(QUBIT_A, n_basis=60).energies
    e120 = build_fluxonium(QUBIT_A, n_basis=120, check_convergence=False).energies
    assert (np.abs(e60 - e120) / np.maximum(1.0, np.abs(e120))).max() < 1e-7


def test_basis_size_precondition():
    with pytest.raises(ValueError):
        build_fluxonium(QUBIT_A, n_basis=19)


def test_uncoupled_joint_factorizes():
    a = build_fluxonium(QUBIT_A)
    b = build_fluxonium(QUBIT_B)
    joint = build_joint(a, b, j_c=0.0, m_trunc=20)
    sums = np.sort(np.add.outer(a.energies, b.energies).ravel())
    assert np.abs(joint.energies - sums[:20]).max() < 1e-9


def test_labels_and_overlaps(joint):
    labels = {joint.label_map[l] for l in REQUIRED_LABELS}
    assert len(labels) == len(REQUIRED_LABELS)
    assert all(v > 0.5 for v in joint.label_overlaps.values())
    # dressed ordering of the computational states for this device
    assert joint.label_map[(0, 0)] == 0
    assert joint.energy((1, 0)) < joint.energy((0, 1))


def test_labeling_error_for_overwhelming_coupling():
    a = build_fluxonium(QUBIT_A)
    b = build_fluxonium(QUBIT_B)
    with pytest.raises(LabelingError):
        build_joint(a, b, j_c=40.0, m_trunc=20)


def test_m_trunc_precondition():
    a = build_fluxonium(QUBIT_A)
    b = build_fluxonium(QUBIT_B)
    with pytest.raises(ValueError):
        build_joint(a, b, J_C, m_trunc=8)
    with pytest.raises(ValueError):
        build_joint(a, b, J_C, m_trunc=37)


def test_spectrum_quantities(joint, summary):
    # transition frequencies land within the broad windows; the qubit
    # splitting values themselves are asserted in the acceptance suite
    assert summary.f_10_20 == pytest.approx(5.1766, abs=0.02)
    assert summary.f_11_21 == pytest.approx(5.1986, abs=0.02)
    assert abs(summary.xi_zz) == pytest.approx(4.6e-5, abs=1e-5)
    assert summary.delta > 0
    assert summary.delta_sign == 1
    assert summary.delta == pytest.approx(summary.f_11_21 - summary.f_10_20, abs=1e-12)


def test_matrix_element_hierarchy(summary):
    assert summary.n01_a < summary.n12_a
    assert summary.n01_b < summary.n12_b


def test_spectral_gap_above_computational(joint):
    e11 = joint.energy((1, 1))
    noncomp = [joint.energy(l) for l in ((2, 0), (0, 2), (2, 1), (1, 2))]
    assert min(noncomp) - e11 > 4.0


def test_uncoupled_zz_vanishes():
    a = build_fluxonium(QUBIT_A)
    b = build_fluxonium(QUBIT_B)
    joint0 = build_joint(a, b, j_c=0.0, m_trunc=20)
    assert abs(spectrum_summary(joint0).xi_zz) < 1e-9


def test_flux_sweep_single_point_matches_summary(summary):
    rows = flux_sweep(QUBIT_A, QUBIT_B, J_C, [math.pi])
    assert len(rows) == 1 and rows[0].ok
    assert rows[0].summary.f_a == pytest.approx(summary.f_a, abs=1e-12)
    assert rows[0].summary.xi_zz == pytest.approx(summary.xi_zz, abs=1e-12)


def test_flux_sweep_sweet_spot_symmetry_and_argmin():
    offsets = np.array([-0.06, -0.03, 0.0, 0.03, 0.06])
    rows = flux_sweep(QUBIT_A, QUBIT_B, J_C, math.pi + offsets, n_basis=60)
    f_a = np.array([r.summary.f_a for r in rows])
    f_b = np.array([r.summary.f_b for r in rows])
    assert abs(f_a[0] - f_a[-1]) < 1e-9 and abs(f_a[1] - f_a[-2]) < 1e-9
    assert abs(f_b[0] - f_b[-1]) < 1e-9
    assert np.argmin(f_a) == 2 and np.argmin(f_b) == 2


def test_flux_sweep_offset_splits_sweet_spots():
    offset = 0.0014 * 2 * math.pi
    grid = math.pi + np.linspace(-3 * offset, 3 * offset, 13)
    rows = flux_sweep(QUBIT_A, QUBIT_B, J_C, grid, flux_offset=offset)
    f_a = np.array([r.summary.f_a for r in rows])
    f_b = np.array([r.summary.f_b for r in rows])
    assert np.argmin(f_a) != np.argmin(f_b)


def test_flux_sweep_empty_grid_rejected():
    with pytest.raises(ValueError):
        flux_sweep(QUBIT_A, QUBIT_B, J_C, [])
