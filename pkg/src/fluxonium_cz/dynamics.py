"""Time-dependent Schrödinger propagation and gate metrics.

The drive is kept in the lab frame (no rotating-wave approximation). States
are propagated in the eigenbasis of the static joint Hamiltonian; the static
diagonal is removed exactly by an interaction-picture phase factor, so the
integrator only resolves the drive term. Phases count cycles: GHz times ns
enters the equations of motion with an explicit 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from .device import JointSystem
from .errors import IntegrationError, NumericalError, PhaseUndefinedError
from .pulse import PulseSpec, drive_matrix

__all__ = [
    "CZ",
    "GateResult",
    "propagate",
    "evolve_states",
    "project_and_fix",
    "avg_gate_fidelity",
    "leakage",
]

CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)

_TWO_PI = 2.0 * math.pi
_EXP_EDGE = math.exp(-math.pi)
_LEAK_FLOOR = -1e-9


@dataclass(frozen=True)
class GateResult:
    """Projected 4x4 operator, ordered (|00>, |01>, |10>, |11>), with metrics."""

    u_comp: np.ndarray
    delta_phi: float
    fidelity: float
    p_leak: float


@njit(cache=True)
def _envelope_scalar(t, t_width, t_plateau):
    # must match pulse.envelope exactly; duplicated here so the RHS can be jitted
    tg = 2.0 * t_width + t_plateau
    if t <= t_width:
        x = t
    elif t >= tg - t_width:
        x = tg - t
    else:
        return 1.0
    if x < 0.0:
        x = 0.0
    sigma2 = t_width * t_width / _TWO_PI
    raw = np.exp(-((x - t_width) ** 2) / (2.0 * sigma2))
    return (raw - _EXP_EDGE) / (1.0 - _EXP_EDGE)


@njit(cache=True, fastmath=True)
def _schrodinger_rhs(t, y, energies, drive, amp, f_d, t_width, t_plateau, ncol):
    m = energies.shape[0]
    g = amp * _envelope_scalar(t, t_width, t_plateau) * np.cos(_TWO_PI * f_d * t)
    chi = y.view(np.complex128).reshape(m, ncol)
    phase = np.empty(m, dtype=np.complex128)
    for j in range(m):
        phase[j] = np.exp(1j * _TWO_PI * energies[j] * t)
    out = np.empty((m, ncol), dtype=np.complex128)
    for j in range(m):
        acc = np.zeros(ncol, dtype=np.complex128)
        for k in range(m):
            c = drive[j, k] * phase[j] * np.conj(phase[k])
            for l in range(ncol):
                acc[l] += c * chi[k, l]
        for l in range(ncol):
            out[j, l] = (-1j * _TWO_PI * g) * acc[l]
    return out.ravel().view(np.float64)


def _integrate(joint: JointSystem, spec: PulseSpec, y0c: np.ndarray, tol: float, t_eval=None):
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-12, 1e-6], got {tol:g}")
    m, ncol = y0c.shape
    energies = np.ascontiguousarray(joint.energies, dtype=np.float64)
    drive = np.ascontiguousarray(drive_matrix(joint, spec), dtype=np.complex128)
    y0 = np.ascontiguousarray(y0c).ravel().view(np.float64).copy()
    itol = max(0.1 * tol, 1e-13)  # internal margin so the 10*tol contract holds
    sol = solve_ivp(
        _schrodinger_rhs,
        (0.0, spec.t_gate),
        y0,
        method="DOP853",
        rtol=itol,
        atol=itol,
        t_eval=t_eval,
        args=(energies, drive, 1.0, spec.f_d, spec.t_width, spec.t_plateau, ncol),
    )
    if not sol.success:
        raise IntegrationError(f"propagation failed at tol={tol:g}: {sol.message}")
    return sol


def propagate(joint: JointSystem, spec: PulseSpec, tol: float = 1e-10, columns=None) -> np.ndarray:
    """Evolution operator over the truncated joint space for one pulse.

    Propagates basis columns from t = 0 to t_gate in the lab frame and
    returns the operator in the dressed eigenbasis. ``columns`` restricts
    the computation to the given dressed indices (full operator when None);
    the result is unitary within 10*tol in maximum column-norm deviation.
    """
    m = joint.dim
    if columns is None:
        y0c = np.eye(m, dtype=np.complex128)
    else:
        y0c = np.zeros((m, len(columns)), dtype=np.complex128)
        for i, c in enumerate(columns):
            y0c[c, i] = 1.0
    sol = _integrate(joint, spec, y0c, tol)
    chi = sol.y[:, -1].view(np.complex128).reshape(y0c.shape)
    return np.exp(-1j * _TWO_PI * joint.energies * spec.t_gate)[:, None] * chi


def evolve_states(joint: JointSystem, spec: PulseSpec, states: np.ndarray, t_eval, tol: float = 1e-8):
    """State trajectories under the pulse; returns array (n_times, dim, n_states).

    ``states`` is a (dim, n_states) array of initial columns; ``t_eval`` must
    be an increasing grid inside [0, t_gate].
    """
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim == 1:
        states = states[:, None]
    t_eval = np.asarray(t_eval, dtype=float)
    sol = _integrate(joint, spec, states, tol, t_eval=t_eval)
    nt = sol.t.size
    chi = sol.y.T.copy().view(np.complex128).reshape(nt, *states.shape)
    phases = np.exp(-1j * _TWO_PI * np.outer(sol.t, joint.energies))
    return phases[:, :, None] * chi


def avg_gate_fidelity(u_comp: np.ndarray, u_target: np.ndarray | None = None) -> float:
    """Average gate fidelity [Tr(U^dag U) + |Tr(T^dag U)|^2] / 20 against target T."""
    u = np.asarray(u_comp)
    t = CZ if u_target is None else np.asarray(u_target)
    if u.shape != (4, 4) or t.shape != (4, 4):
        raise ValueError("operators must be 4x4")
    return float((np.trace(u.conj().T @ u).real + abs(np.trace(t.conj().T @ u)) ** 2) / 20.0)


def leakage(u_comp: np.ndarray) -> float:
    """Average population lost from the computational subspace, 1 - Tr(U^dag U)/4."""
    u = np.asarray(u_comp)
    if u.shape != (4, 4):
        raise ValueError("operator must be 4x4")
    val = 1.0 - np.trace(u.conj().T @ u).real / 4.0
    return float(max(val, _LEAK_FLOOR))


def project_and_fix(u_full: np.ndarray, joint: JointSystem) -> GateResult:
    """Project onto the computational subspace and absorb single-qubit phases.

    Virtual Z rotations (plus a global phase) null the phases of the 00, 01
    and 10 diagonal elements; the remaining 11 phase is the gauge-invariant
    conditional phase arg<11> + arg<00> - arg<01> - arg<10> of the raw
    diagonal. Accepts the full operator or just the four computational
    columns (in (00, 01, 10, 11) order).
    """
    comp = joint.computational_indices
    u_full = np.asarray(u_full)
    if u_full.shape == (joint.dim, joint.dim):
        uc = u_full[np.ix_(comp, comp)]
    elif u_full.shape == (joint.dim, 4):
        uc = u_full[comp, :]
    else:
        raise ValueError(f"expected ({joint.dim},{joint.dim}) or ({joint.dim},4) operator")
    diag = np.diag(uc)
    if np.abs(diag).min() < 1e-6:
        raise PhaseUndefinedError(
            f"diagonal element too small for phase fixing: |<ii|U|ii>|_min = {np.abs(diag).min():.2e}"
        )
    th = np.angle(diag)
    delta_phi = float(np.angle(np.exp(1j * (th[3] + th[0] - th[1] - th[2]))))
    z_a = th[0] - th[2]
    z_b = th[0] - th[1]
    glob = -th[0]
    fix = np.exp(1j * np.array([glob, glob + z_b, glob + z_a, glob + z_a + z_b]))
    u_fixed = fix[:, None] * uc
    col_norms = np.linalg.norm(u_fixed, axis=0)
    if col_norms.max() > 1.0 + 1e-9:
        raise NumericalError(f"projected column norm {col_norms.max():.12f} exceeds 1 + 1e-9")
    return GateResult(
        u_comp=u_fixed,
        delta_phi=delta_phi,
        fidelity=avg_gate_fidelity(u_fixed),
        p_leak=leakage(u_fixed),
    )
