"""Incoherent gate-error models for the two driven gate transitions.

Two routes are provided and cross-checked against each other: closed-form
first-order expressions for a resonantly driven full Rabi rotation, and a
numerical master-equation integration of the six-level system (four
computational states plus |20> and |21>) in the rotating frame, including
the drive detunings of the synchronized gate.

Conventions follow the published error budget this toolkit reproduces: the
default dephasing collapse rate is the full transverse rate 1/T2R (which
reproduces the published numerical 0.64% figure); ``pure_dephasing=True``
subtracts the relaxation half-rate, 1/T2R - 1/(2 T1). Rates are per
microsecond, gate times in ns.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, NumericalError

__all__ = [
    "CoherenceSet",
    "analytic_state_error",
    "analytic_gate_error",
    "lindblad_gate_error",
    "sixteen_input_states",
]

_NS_PER_US = 1e-3  # multiply (1/us rate) * (ns time) by this to get a pure number
_TWO_PI = 2.0 * math.pi

# basis order of the six-level model
_I00, _I01, _I10, _I11, _I20, _I21 = range(6)


@dataclass(frozen=True)
class CoherenceSet:
    """T1 / T2-Ramsey times (us) of the two gate transitions."""

    t1_10_20: float
    t2r_10_20: float
    t1_11_21: float
    t2r_11_21: float

    def __post_init__(self):
        for name in ("t1_10_20", "t2r_10_20", "t1_11_21", "t2r_11_21"):
            val = getattr(self, name)
            if not val > 0 or math.isnan(val):
                raise ValueError(f"{name} must be positive, got {val}")
        if self.t2r_10_20 > 2.0 * self.t1_10_20 or self.t2r_11_21 > 2.0 * self.t1_11_21:
            raise ValueError("T2R exceeds 2*T1: pure-dephasing rate would be negative")

    # relaxation and pure-dephasing rates, 1/us
    @property
    def gamma1_10_20(self) -> float:
        return 1.0 / self.t1_10_20

    @property
    def gamma1_11_21(self) -> float:
        return 1.0 / self.t1_11_21

    @property
    def gamma_phi_10_20(self) -> float:
        return 1.0 / self.t2r_10_20 - 0.5 / self.t1_10_20

    @property
    def gamma_phi_11_21(self) -> float:
        return 1.0 / self.t2r_11_21 - 0.5 / self.t1_11_21

    # total transverse decoherence rates, 1/us
    @property
    def gamma2_10_20(self) -> float:
        return 1.0 / self.t2r_10_20

    @property
    def gamma2_11_21(self) -> float:
        return 1.0 / self.t2r_11_21

    def scaled(self, factor: float) -> "CoherenceSet":
        """All rates multiplied by ``factor`` (times divided by it)."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return CoherenceSet(
            self.t1_10_20 / factor,
            self.t2r_10_20 / factor,
            self.t1_11_21 / factor,
            self.t2r_11_21 / factor,
        )


def analytic_state_error(c2: float, gamma1: float, gamma_phi: float, t_gate: float) -> float:
    """First-order error after one full resonant rotation, for a state with
    weight ``c2`` on the driven computational level.

    Rates in 1/us, ``t_gate`` in ns.
    """
    if not 0.0 <= c2 <= 1.0:
        raise ValueError(f"c2 must lie in [0, 1], got {c2}")
    t = t_gate * _NS_PER_US
    return (
        0.5 * (gamma1 + 2.0 * gamma_phi) * t * c2 * (1.0 - c2)
        + 0.125 * (3.0 * gamma1 + 2.0 * gamma_phi) * t * c2 * c2
    )


def analytic_gate_error(coherence: CoherenceSet, t_gate: float, exact: bool = False) -> float:
    """Closed-form incoherent gate error for a square pulse of length ``t_gate`` (ns).

    Default mode evaluates the published T2-dominant estimate
    0.15 * t_gate * (1/T2R(10-20) + 1/T2R(11-21)); with ``exact=True`` the
    full first-order average (9/256) t/T1 + (37/256) t/T2 is summed over
    both transitions instead.
    """
    t = t_gate * _NS_PER_US
    if exact:
        return (
            (9.0 / 256.0) * t * (coherence.gamma1_10_20 + coherence.gamma1_11_21)
            + (37.0 / 256.0) * t * (coherence.gamma2_10_20 + coherence.gamma2_11_21)
        )
    return 0.15 * t * (coherence.gamma2_10_20 + coherence.gamma2_11_21)


def sixteen_input_states() -> np.ndarray:
    """The 16 two-qubit product states built from |0>, |1>, |+>, |+i> per qubit,
    embedded in the six-level basis (columns of the returned (6, 16) array)."""
    s = 1.0 / math.sqrt(2.0)
    singles = [
        np.array([1.0, 0.0], dtype=complex),
        np.array([0.0, 1.0], dtype=complex),
        np.array([s, s], dtype=complex),
        np.array([s, 1j * s], dtype=complex),
    ]
    states = np.zeros((6, 16), dtype=complex)
    col = 0
    for sa in singles:
        for sb in singles:
            states[_I00, col] = sa[0] * sb[0]
            states[_I01, col] = sa[0] * sb[1]
            states[_I10, col] = sa[1] * sb[0]
            states[_I11, col] = sa[1] * sb[1]
            col += 1
    return states


def _six_level_model(delta_split, delta_detuning, omega_10, omega_11,
                     coherence, rate_scale, pure_dephasing):
    h = np.zeros((6, 6))
    h[_I21, _I21] = delta_detuning
    h[_I20, _I20] = delta_detuning - delta_split
    h[_I11, _I21] = h[_I21, _I11] = 0.5 * omega_11
    h[_I10, _I20] = h[_I20, _I10] = 0.5 * omega_10

    if pure_dephasing:
        g_deph_1020, g_deph_1121 = coherence.gamma_phi_10_20, coherence.gamma_phi_11_21
    else:
        g_deph_1020, g_deph_1121 = coherence.gamma2_10_20, coherence.gamma2_11_21
    rates_per_ns = [
        (coherence.gamma1_11_21, _I11, _I21, False),
        (g_deph_1121, _I21, _I21, True),
        (coherence.gamma1_10_20, _I10, _I20, False),
        (g_deph_1020, _I20, _I20, True),
    ]
    collapse = []
    for g, i, j, dephasing in rates_per_ns:
        g_ns = g * rate_scale * _NS_PER_US
        if g_ns == 0.0:
            continue
        op = np.zeros((6, 6))
        op[i, j] = math.sqrt(2.0 * g_ns) if dephasing else math.sqrt(g_ns)
        collapse.append(op)
    return h, collapse


def _evolve(h, collapse, psi0, t_gate, tol):
    rho0 = np.outer(psi0, psi0.conj())
    ldl = [op.T @ op for op in collapse]

    def rhs(_t, y):
        rho = y.view(np.complex128).reshape(6, 6)
        drho = -1j * _TWO_PI * (h @ rho - rho @ h)
        for op, m in zip(collapse, ldl):
            drho = drho + (op @ rho @ op.T - 0.5 * (m @ rho + rho @ m))
        return drho.ravel().view(np.float64)

    def rhs_pure(_t, y):
        psi = y.view(np.complex128)
        return (-1j * _TWO_PI * (h @ psi)).view(np.float64)

    itol = max(0.1 * tol, 1e-13)
    sol = solve_ivp(rhs, (0.0, t_gate), rho0.ravel().view(np.float64).copy(),
                    method="DOP853", rtol=itol, atol=itol)
    if not sol.success:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")
    rho = sol.y[:, -1].copy().view(np.complex128).reshape(6, 6)
    sol_ref = solve_ivp(rhs_pure, (0.0, t_gate), psi0.astype(complex).view(np.float64).copy(),
                        method="DOP853", rtol=1e-12, atol=1e-12)
    if not sol_ref.success:
        raise IntegrationError(f"reference propagation failed: {sol_ref.message}")
    psi = sol_ref.y[:, -1].copy().view(np.complex128)
    psi = psi / np.linalg.norm(psi)

    trace_err = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_err > 1e-9:
        raise NumericalError(f"density-matrix trace drifted by {trace_err:.2e}")
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if min_eig < -1e-8:
        raise NumericalError(f"density matrix not positive: min eigenvalue {min_eig:.2e}")
    fidelity = float(np.real(psi.conj() @ rho @ psi))
    return 1.0 - fidelity


def lindblad_gate_error(
    delta_split: float,
    delta_detuning: float,
    omega_10: float,
    omega_11: float,
    coherence: CoherenceSet,
    t_gate: float,
    rate_scale: float = 1.0,
    pure_dephasing: bool = False,
    initial_states: np.ndarray | None = None,
    tol: float = 1e-10,
) -> float:
    """Incoherent gate error from the six-level master equation (square pulse).

    The rotating-frame Hamiltonian carries the two drive terms with their
    detunings (``delta_detuning`` from the 11-21 transition, shifted by the
    splitting for 10-20); collapse operators act on the two driven
    transitions only. The error of each input state is one minus its overlap
    with the dissipation-free evolution, averaged over the 16 tomography
    product states unless ``initial_states`` (columns, dim 6) is given.
    """
    h, collapse = _six_level_model(
        delta_split, delta_detuning, omega_10, omega_11, coherence, rate_scale, pure_dephasing
    )
    if initial_states is None:
        states = sixteen_input_states()
    else:
        states = np.asarray(initial_states, dtype=complex)
        if states.ndim == 1:
            states = states[:, None]
        if states.shape[0] != 6:
            raise ValueError("initial states must be six-level column vectors")
    errors = [
        _evolve(h, collapse, np.ascontiguousarray(states[:, k]), t_gate, tol)
        for k in range(states.shape[1])
    ]
    return float(np.mean(errors))
