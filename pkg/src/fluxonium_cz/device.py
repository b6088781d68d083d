"""Static model of one and two capacitively coupled fluxonium circuits.

All energies are given as frequencies (E/h) in GHz, times in ns, external
flux as a phase in radians. Single circuits are diagonalized in the harmonic
oscillator basis of their LC part; the junction cosine is built from the
spectral decomposition of the phase operator, which stays accurate at the
large zero-point phase amplitudes of a fluxonium.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import eigh

from .errors import ConvergenceError, LabelingError, NumericalError

__all__ = [
    "FluxoniumParams",
    "SingleMode",
    "JointSystem",
    "SpectrumSummary",
    "FluxSweepRow",
    "REQUIRED_LABELS",
    "build_fluxonium",
    "build_joint",
    "spectrum_summary",
    "flux_sweep",
]

# bare product labels that must be identifiable in the coupled spectrum
REQUIRED_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2))

_REL_ENERGY_TOL = 1e-7  # convergence target under basis doubling


@dataclass(frozen=True)
class FluxoniumParams:
    """Circuit energies (GHz) and external flux (rad) of one fluxonium."""

    e_c: float
    e_l: float
    e_j: float
    phi_ext: float

    def __post_init__(self):
        if not self.e_c > 0:
            raise ValueError(f"e_c must be positive, got {self.e_c}")
        if not self.e_l > 0:
            raise ValueError(f"e_l must be positive, got {self.e_l}")
        if self.e_j < 0:
            raise ValueError(f"e_j must be non-negative, got {self.e_j}")
        if not math.isfinite(self.phi_ext):
            raise ValueError("phi_ext must be finite")


@dataclass(frozen=True)
class SingleMode:
    """Lowest eigenstates of one fluxonium, with operators in its eigenbasis."""

    n_basis: int
    energies: np.ndarray  # ascending, ground state at 0 (GHz)
    phase_op: np.ndarray
    charge_op: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.size


@dataclass(frozen=True)
class JointSystem:
    """Coupled two-fluxonium system in its dressed eigenbasis.

    ``label_map`` sends a bare product label (i, j), i for qubit A, to the
    dressed eigenstate index; ``charge_a``/``charge_b`` are the single-qubit
    charge operators in the dressed basis, truncated to ``m_trunc`` states.
    """

    j_c: float
    m_trunc: int
    energies: np.ndarray  # ascending, ground state at 0 (GHz)
    label_map: dict[tuple[int, int], int]
    charge_a: np.ndarray
    charge_b: np.ndarray
    label_overlaps: dict[tuple[int, int], float] = field(repr=False, default_factory=dict)

    @property
    def dim(self) -> int:
        return self.energies.size

    def energy(self, label: tuple[int, int]) -> float:
        return float(self.energies[self.label_map[label]])

    def transition(self, lo: tuple[int, int], hi: tuple[int, int]) -> float:
        return self.energy(hi) - self.energy(lo)

    @property
    def computational_indices(self) -> list[int]:
        """Dressed indices of (|00>, |01>, |10>, |11>), in that order."""
        return [self.label_map[l] for l in ((0, 0), (0, 1), (1, 0), (1, 1))]


@dataclass(frozen=True)
class SpectrumSummary:
    """Static spectrum quantities of the coupled device (GHz)."""

    f_a: float
    f_b: float
    delta: float  # |f_11_21 - f_10_20|, stored positive
    delta_sign: int  # +1 if f_11_21 >= f_10_20
    xi_zz: float  # E00 + E11 - E01 - E10, signed
    f_10_20: float
    f_11_21: float
    n01_a: float
    n12_a: float
    n01_b: float
    n12_b: float


def _oscillator_ops(n_basis: int, e_c: float, e_l: float):
    a = np.diag(np.sqrt(np.arange(1.0, n_basis)), 1)
    phi_zpf = (2.0 * e_c / e_l) ** 0.25
    phase = phi_zpf * (a + a.T)
    charge = 1j / (2.0 * phi_zpf) * (a.T - a)
    return phase, charge


def _single_hamiltonian(params: FluxoniumParams, n_basis: int):
    phase, charge = _oscillator_ops(n_basis, params.e_c, params.e_l)
    lam, v = eigh(phase)
    cos_shifted = (v * np.cos(lam - params.phi_ext)) @ v.T
    f_osc = math.sqrt(8.0 * params.e_c * params.e_l)
    h = f_osc * (np.diag(np.arange(n_basis)) + 0.5 * np.eye(n_basis))
    h -= params.e_j * cos_shifted
    return h, phase, charge


def _diag_lowest(params: FluxoniumParams, n_basis: int, n_keep: int):
    h, phase, charge = _single_hamiltonian(params, n_basis)
    try:
        evals, evecs = eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"single-mode diagonalization failed at n_basis={n_basis}") from exc
    v = evecs[:, :n_keep]
    energies = evals[:n_keep] - evals[0]
    return energies, v.T.conj() @ phase @ v, v.T.conj() @ charge @ v


def build_fluxonium(
    params: FluxoniumParams,
    n_basis: int = 60,
    n_keep: int = 6,
    check_convergence: bool = True,
) -> SingleMode:
    """Diagonalize one fluxonium and return its lowest ``n_keep`` states.

    Energies are referenced to the ground state. When ``check_convergence``
    is set, the basis is doubled and every retained energy must move by less
    than 1e-7 (relative); otherwise a :class:`ConvergenceError` is raised.
    """
    if n_basis < 20:
        raise ValueError(f"n_basis must be at least 20, got {n_basis}")
    if not 1 <= n_keep <= n_basis:
        raise ValueError("n_keep must lie in [1, n_basis]")
    energies, phase_op, charge_op = _diag_lowest(params, n_basis, n_keep)
    if check_convergence:
        ref, _, _ = _diag_lowest(params, 2 * n_basis, n_keep)
        rel = np.abs(energies - ref) / np.maximum(1.0, np.abs(ref))
        if rel.max() > _REL_ENERGY_TOL:
            raise ConvergenceError(
                f"n_basis={n_basis} not converged: doubling moves energies by "
                f"{rel.max():.2e} (relative), limit {_REL_ENERGY_TOL:g}"
            )
    return SingleMode(n_basis=n_basis, energies=energies, phase_op=phase_op, charge_op=charge_op)


def build_joint(a: SingleMode, b: SingleMode, j_c: float, m_trunc: int = 20) -> JointSystem:
    """Couple two single modes by ``j_c * n_A n_B`` and label the dressed states.

    Labels are assigned per bare product state by maximum squared overlap,
    ties broken by the lower dressed index; an overlap at or below 0.5 for
    any required label raises :class:`LabelingError`.
    """
    ka, kb = a.dim, b.dim
    dim = ka * kb
    if not 9 <= m_trunc <= dim:
        raise ValueError(f"m_trunc must lie in [9, {dim}], got {m_trunc}")
    h = (
        np.kron(np.diag(a.energies), np.eye(kb))
        + np.kron(np.eye(ka), np.diag(b.energies))
        + j_c * np.kron(a.charge_op, b.charge_op)
    )
    herm = np.abs(h - h.conj().T).max() / max(1.0, np.abs(h).max())
    if herm > 1e-12:
        raise NumericalError(f"joint Hamiltonian not Hermitian: deviation {herm:.2e}")
    h = 0.5 * (h + h.conj().T)
    if np.abs(h.imag).max() < 1e-14:
        h = h.real  # product of two antisymmetric imaginary charge operators is real
    try:
        evals, evecs = eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"joint diagonalization failed at dim={dim}") from exc
    energies = evals - evals[0]

    label_map: dict[tuple[int, int], int] = {}
    overlaps: dict[tuple[int, int], float] = {}
    for (i, j) in REQUIRED_LABELS:
        if i >= ka or j >= kb:
            raise LabelingError(f"bare state |{i}{j}> outside retained single-mode states")
        bare = i * kb + j
        weights = np.abs(evecs[bare, :]) ** 2
        k = int(np.argmax(weights))  # argmax takes the lowest index on ties
        if weights[k] <= 0.5:
            raise LabelingError(
                f"dressed label for |{i}{j}> ambiguous: best overlap {weights[k]:.3f} <= 0.5"
            )
        if k >= m_trunc:
            raise LabelingError(f"|{i}{j}> maps to dressed index {k} >= m_trunc={m_trunc}")
        label_map[(i, j)] = k
        overlaps[(i, j)] = float(weights[k])
    if len(set(label_map.values())) != len(label_map):
        raise LabelingError("label map not injective over the required states")

    w = evecs[:, :m_trunc]
    charge_a = w.conj().T @ np.kron(a.charge_op, np.eye(kb)) @ w
    charge_b = w.conj().T @ np.kron(np.eye(ka), b.charge_op) @ w
    return JointSystem(
        j_c=j_c,
        m_trunc=m_trunc,
        energies=energies[:m_trunc],
        label_map=label_map,
        charge_a=charge_a,
        charge_b=charge_b,
        label_overlaps=overlaps,
    )


def spectrum_summary(joint: JointSystem) -> SpectrumSummary:
    """Collect qubit frequencies, the gate-transition splitting, the static ZZ
    rate, and the relevant charge matrix elements from a labeled system."""
    for label in REQUIRED_LABELS:
        if label not in joint.label_map:
            raise LabelingError(f"label map incomplete: missing |{label[0]}{label[1]}>")
    e = joint.energy
    f_a = e((1, 0)) - e((0, 0))
    f_b = e((0, 1)) - e((0, 0))
    f_10_20 = joint.transition((1, 0), (2, 0))
    f_11_21 = joint.transition((1, 1), (2, 1))
    raw_delta = f_11_21 - f_10_20
    xi_zz = e((0, 0)) + e((1, 1)) - e((0, 1)) - e((1, 0))
    k = joint.label_map
    na, nb = joint.charge_a, joint.charge_b
    return SpectrumSummary(
        f_a=f_a,
        f_b=f_b,
        delta=abs(raw_delta),
        delta_sign=1 if raw_delta >= 0 else -1,
        xi_zz=xi_zz,
        f_10_20=f_10_20,
        f_11_21=f_11_21,
        n01_a=abs(na[k[(0, 0)], k[(1, 0)]]),
        n12_a=abs(na[k[(1, 0)], k[(2, 0)]]),
        n01_b=abs(nb[k[(0, 0)], k[(0, 1)]]),
        n12_b=abs(nb[k[(0, 1)], k[(0, 2)]]),
    )


@dataclass(frozen=True)
class FluxSweepRow:
    phi_ext_a: float
    phi_ext_b: float
    ok: bool
    summary: SpectrumSummary | None
    error: str | None


def flux_sweep(
    params_a: FluxoniumParams,
    params_b: FluxoniumParams,
    j_c: float,
    flux_grid,
    flux_offset: float = 0.0,
    n_basis: int = 60,
    n_keep: int = 6,
    m_trunc: int = 20,
) -> list[FluxSweepRow]:
    """Spectrum summary per external-flux grid point.

    ``flux_offset`` shifts qubit B's flux relative to qubit A, modelling a
    flux imbalance between the two loops. Points where dressed labeling
    fails are flagged and the sweep continues.
    """
    flux_grid = np.atleast_1d(np.asarray(flux_grid, dtype=float))
    if flux_grid.size == 0:
        raise ValueError("flux grid must be non-empty")
    rows = []
    for phi in flux_grid:
        pa = FluxoniumParams(params_a.e_c, params_a.e_l, params_a.e_j, phi)
        pb = FluxoniumParams(params_b.e_c, params_b.e_l, params_b.e_j, phi + flux_offset)
        try:
            mode_a = build_fluxonium(pa, n_basis, n_keep, check_convergence=False)
            mode_b = build_fluxonium(pb, n_basis, n_keep, check_convergence=False)
            joint = build_joint(mode_a, mode_b, j_c, m_trunc)
            rows.append(FluxSweepRow(phi, phi + flux_offset, True, spectrum_summary(joint), None))
        except LabelingError as exc:
            rows.append(FluxSweepRow(phi, phi + flux_offset, False, None, str(exc)))
    return rows
