"""Synchronized-Rabi gate design: detuning/amplitude selection, Rabi maps,
and the coherent-error scan over gate duration."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import curve_fit, minimize

from .device import JointSystem
from .dynamics import evolve_states, project_and_fix, propagate
from .errors import FitError, InfeasibleGateError
from .pulse import PulseSpec, edge_area
from .dynamics import CZ  # noqa: F401  (re-exported for convenience)

__all__ = [
    "SyncSolution",
    "sync_parameters",
    "geometric_phases",
    "rabi_frequency_ratio",
    "design_pulse",
    "fit_rabi_frequency",
    "measure_rabi_ratio",
    "calibrate_rabi_rate",
    "RabiMap",
    "rabi_map",
    "DurationPoint",
    "scan_gate_error_vs_duration",
    "LandscapePoint",
    "error_landscape",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SyncSolution:
    """Drive parameters that close both gate-transition Rabi cones together."""

    delta_detuning: float  # drive detuning from the 11-21 transition (GHz)
    omega: float  # common generalized Rabi frequency (GHz)
    omega_11_21: float
    omega_10_20: float
    t_gate_ideal: float  # ns, one full generalized rotation
    f_d: float
    target_phase: float  # radians


def sync_parameters(delta: float, r: float, target_phase: float, f_11_21: float) -> SyncSolution:
    """Solve the synchronization condition for a conditional-phase gate.

    Given the splitting ``delta`` between the two gate transitions, the
    resonance Rabi-frequency ratio ``r`` and a target conditional phase, the
    generalized Rabi frequency is fixed by |phase| = pi * delta / omega and
    the detuning follows from matching sqrt(omega_11^2 + d^2) =
    sqrt(omega_10^2 + (d - delta)^2) with omega_11 = r * omega_10.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if not 0 < abs(target_phase) <= math.pi:
        raise ValueError(f"target phase must lie in (0, pi], got {target_phase}")
    omega = math.pi * delta / abs(target_phase)
    r2 = r * r
    if r == 1.0:
        d = 0.5 * delta  # exact symmetric branch: drive midway between transitions
    else:
        disc = r2 * delta * delta + (r2 - 1.0) ** 2 * omega * omega
        candidates = [
            (r2 * delta - math.sqrt(disc)) / (r2 - 1.0),
            (r2 * delta + math.sqrt(disc)) / (r2 - 1.0),
        ]
        valid = [c for c in candidates if 0.0 < c < delta and omega >= abs(c)
                 and omega >= abs(c - delta)]
        if not valid:
            raise InfeasibleGateError(
                f"no detuning synchronizes both transitions at omega={omega:.6g} GHz "
                f"(delta={delta:.6g}, r={r:.4g}); the target phase is too small for this ratio"
            )
        d = valid[0]
    omega_11 = math.sqrt(omega * omega - d * d)
    omega_10 = math.sqrt(omega * omega - (d - delta) ** 2)
    residual = abs(math.hypot(omega_11, d) - math.hypot(omega_10, d - delta))
    if residual > 1e-9:
        raise InfeasibleGateError(f"synchronization residual {residual:.2e} exceeds 1e-9")
    return SyncSolution(
        delta_detuning=d,
        omega=omega,
        omega_11_21=omega_11,
        omega_10_20=omega_10,
        t_gate_ideal=1.0 / omega,
        f_d=f_11_21 - d,
        target_phase=target_phase,
    )


def geometric_phases(solution: SyncSolution, delta: float) -> tuple[float, float, float]:
    """Solid angles of both Rabi cones and the conditional phase they imply.

    Returns (theta_10, theta_11, delta_phi) with delta_phi =
    -(theta_11 - theta_10)/2 = -pi * delta / omega.
    """
    d, omega = solution.delta_detuning, solution.omega
    theta_10 = _TWO_PI * (1.0 - (delta - d) / omega)
    theta_11 = _TWO_PI * (1.0 + d / omega)
    delta_phi = -(theta_11 - theta_10) / 2.0
    return theta_10, theta_11, delta_phi


def _gate_elements(joint: JointSystem, eps_ratio: float):
    k = joint.label_map
    d_unit = eps_ratio * joint.charge_a + joint.charge_b  # unit eps_b
    el_1121 = d_unit[k[(1, 1)], k[(2, 1)]]
    el_1020 = d_unit[k[(1, 0)], k[(2, 0)]]
    return el_1121, el_1020


def rabi_frequency_ratio(joint: JointSystem, eps_ratio: float) -> float:
    """Resonance Rabi-frequency ratio r predicted from charge matrix elements."""
    el_1121, el_1020 = _gate_elements(joint, eps_ratio)
    return abs(el_1121) / abs(el_1020)


def design_pulse(
    joint: JointSystem,
    eps_ratio: float = 0.9,
    target_phase: float = math.pi,
    t_width: float = 15.0,
    t_plateau: float | None = None,
    r: float | None = None,
) -> tuple[PulseSpec, SyncSolution]:
    """Build the initial flat-top pulse realizing the synchronized gate.

    ``r`` defaults to the matrix-element prediction (it can be replaced by a
    fitted value from a Rabi map). When ``t_plateau`` is not given it is
    chosen so the envelope area equals the ideal square-pulse duration; when
    it is given, the amplitude is rescaled by the area ratio instead.
    """
    from .device import spectrum_summary

    summary = spectrum_summary(joint)
    delta = summary.delta
    if r is None:
        r = rabi_frequency_ratio(joint, eps_ratio)
    sol = sync_parameters(delta, r, target_phase, summary.f_11_21)
    edge = edge_area() * t_width
    if t_plateau is None:
        t_plateau = max(sol.t_gate_ideal - 2.0 * edge, 0.0)
    area = t_plateau + 2.0 * edge
    el_1121, _ = _gate_elements(joint, eps_ratio)
    eps_b = sol.omega_11_21 / abs(el_1121) * (sol.t_gate_ideal / area)
    spec = PulseSpec(eps_a=eps_ratio * eps_b, eps_b=eps_b, f_d=sol.f_d,
                     t_width=t_width, t_plateau=t_plateau)
    return spec, sol


def fit_rabi_frequency(times, populations) -> float:
    """Frequency (GHz) of a sinusoidal population trace, FFT-seeded cosine fit."""
    t = np.asarray(times, float)
    p = np.asarray(populations, float)
    if t.size < 8:
        raise FitError("need at least 8 samples to fit a Rabi frequency")
    spectrum = np.abs(np.fft.rfft(p - p.mean()))
    freqs = np.fft.rfftfreq(t.size, t[1] - t[0])
    f0 = freqs[np.argmax(spectrum[1:]) + 1]

    def model(tt, a, f, phase, off):
        return a * np.cos(_TWO_PI * f * tt + phase) + off

    try:
        popt, _ = curve_fit(model, t, p, p0=[-0.5 * p.max(), f0, 0.0, 0.5 * p.max()])
    except RuntimeError as exc:
        raise FitError(f"Rabi frequency fit did not converge: {exc}") from exc
    return float(abs(popt[1]))


def _rabi_trace(joint, eps_ratio, eps_b, f_d, start, exc, duration, t_width, n_samples, tol):
    spec = PulseSpec(eps_ratio * eps_b, eps_b, f_d, t_width, duration - 2 * t_width)
    psi0 = np.zeros(joint.dim, dtype=complex)
    psi0[joint.label_map[start]] = 1.0
    t_eval = np.linspace(0.0, spec.t_gate, n_samples)
    traj = evolve_states(joint, spec, psi0, t_eval, tol=tol)
    p_exc = np.abs(traj[:, joint.label_map[exc], 0]) ** 2
    return t_eval, p_exc


def measure_rabi_ratio(
    joint: JointSystem,
    eps_ratio: float = 0.9,
    omega_scale: float = 0.012,
    duration: float = 420.0,
    t_width: float = 2.0,
    n_samples: int = 401,
    tol: float = 1e-8,
) -> tuple[float, float, float]:
    """Fitted ratio of the resonance Rabi frequencies of the two gate transitions.

    Drives each transition on resonance at a small amplitude (the 11-21
    rotation rate is set to ``omega_scale`` GHz) and fits the oscillation of
    the excited population. Returns (r, omega_11_21, omega_10_20).
    """
    from .device import spectrum_summary

    summary = spectrum_summary(joint)
    el_1121, _ = _gate_elements(joint, eps_ratio)
    eps_b = omega_scale / abs(el_1121)
    t, p = _rabi_trace(joint, eps_ratio, eps_b, summary.f_11_21, (1, 1), (2, 1),
                       duration, t_width, n_samples, tol)
    omega_11 = fit_rabi_frequency(t, p)
    t, p = _rabi_trace(joint, eps_ratio, eps_b, summary.f_10_20, (1, 0), (2, 0),
                       duration, t_width, n_samples, tol)
    omega_10 = fit_rabi_frequency(t, p)
    return omega_11 / omega_10, omega_11, omega_10


def calibrate_rabi_rate(
    joint: JointSystem,
    eps_ratio: float,
    transition: str = "11-21",
    amplitudes=(0.005, 0.010, 0.015),
    duration: float = 600.0,
    tol: float = 1e-8,
) -> float:
    """Rabi frequency per unit eps_b, from a linear fit at three small amplitudes."""
    from .device import spectrum_summary

    summary = spectrum_summary(joint)
    if transition == "11-21":
        f_d, start, exc = summary.f_11_21, (1, 1), (2, 1)
    elif transition == "10-20":
        f_d, start, exc = summary.f_10_20, (1, 0), (2, 0)
    else:
        raise ValueError("transition must be '11-21' or '10-20'")
    el_1121, _ = _gate_elements(joint, eps_ratio)
    fitted = []
    amps = [a / abs(el_1121) for a in amplitudes]
    for eps_b in amps:
        t, p = _rabi_trace(joint, eps_ratio, eps_b, f_d, start, exc, duration, 2.0, 401, tol)
        fitted.append(fit_rabi_frequency(t, p))
    slope = float(np.dot(amps, fitted) / np.dot(amps, amps))  # least squares through origin
    return slope


@dataclass(frozen=True)
class RabiMap:
    """Excited-population chevron traces versus drive frequency and time."""

    f_d: np.ndarray  # (n_f,)
    times: np.ndarray  # (n_t,)
    p_exc_10: np.ndarray  # (n_f, n_t), started from |10>
    p_exc_11: np.ndarray  # (n_f, n_t), started from |11>


def rabi_map(
    joint: JointSystem,
    eps_b: float,
    f_d_grid,
    duration: float,
    eps_ratio: float = 0.9,
    t_width: float = 2.0,
    n_times: int = 121,
    tol: float = 1e-8,
) -> RabiMap:
    """Rabi chevrons of both gate transitions over a drive-frequency grid.

    The excited population is the probability of having left the initial
    state; chevron minima locate the two transition frequencies.
    """
    f_d_grid = np.atleast_1d(np.asarray(f_d_grid, float))
    p10 = np.empty((f_d_grid.size, n_times))
    p11 = np.empty_like(p10)
    k10 = joint.label_map[(1, 0)]
    k11 = joint.label_map[(1, 1)]
    psi0 = np.zeros((joint.dim, 2), dtype=complex)
    psi0[k10, 0] = 1.0
    psi0[k11, 1] = 1.0
    times = np.linspace(0.0, duration, n_times)
    for i, f_d in enumerate(f_d_grid):
        spec = PulseSpec(eps_ratio * eps_b, eps_b, f_d, t_width, duration - 2 * t_width)
        traj = evolve_states(joint, spec, psi0, times, tol=tol)
        p10[i] = 1.0 - np.abs(traj[:, k10, 0]) ** 2
        p11[i] = 1.0 - np.abs(traj[:, k11, 1]) ** 2
    return RabiMap(f_d=f_d_grid, times=times, p_exc_10=p10, p_exc_11=p11)


@dataclass(frozen=True)
class DurationPoint:
    t_gate: float
    t_plateau: float
    eps_b: float
    f_d: float
    p_leak: float
    gate_error: float
    delta_phi: float
    n_evals: int


def _optimize_leakage(joint, eps_ratio, t_width, t_plateau, eps_b0, f_d0, tol, maxfev):
    comp = joint.computational_indices

    def leak_of(eps_b, f_d):
        spec = PulseSpec(eps_ratio * eps_b, eps_b, f_d, t_width, t_plateau)
        cols = propagate(joint, spec, tol=tol, columns=comp)
        return project_and_fix(cols, joint)

    def cost(x):
        return leak_of(eps_b0 * math.exp(x[0]), f_d0 + 1e-3 * x[1]).p_leak

    res = minimize(
        cost,
        [0.0, 0.0],
        method="Nelder-Mead",
        options={
            "maxfev": maxfev,
            "xatol": 1e-6,
            "fatol": 1e-12,
            "initial_simplex": [[0.0, 0.0], [0.02, 0.0], [0.0, 0.3]],
        },
    )
    eps_b = eps_b0 * math.exp(res.x[0])
    f_d = f_d0 + 1e-3 * res.x[1]
    return eps_b, f_d, res.nfev


def scan_gate_error_vs_duration(
    joint: JointSystem,
    durations,
    eps_ratio: float = 0.9,
    t_width: float = 15.0,
    target_phase: float = math.pi,
    tol: float = 1e-9,
    maxfev: int = 60,
) -> list[DurationPoint]:
    """Coherent gate error versus total duration, leakage-optimized per point.

    For each total duration the drive amplitude and frequency are adjusted
    to minimize the final leakage (Nelder-Mead around the synchronized
    design); the remaining error is dominated by the conditional-phase
    mismatch except at the duration where the accumulated phase hits the
    target.
    """
    durations = np.atleast_1d(np.asarray(durations, float))
    comp = joint.computational_indices
    rows: list[DurationPoint] = []
    warm: tuple[float, float] | None = None
    prev_area = None
    for tg in durations:
        t_plateau = tg - 2.0 * t_width
        if t_plateau < 0:
            raise ValueError(f"duration {tg} shorter than the two edges (2 x {t_width})")
        spec0, _ = design_pulse(joint, eps_ratio, target_phase, t_width, t_plateau=t_plateau)
        area = t_plateau + 2.0 * edge_area() * t_width
        if warm is None:
            eps_b0, f_d0 = spec0.eps_b, spec0.f_d
        else:
            eps_b0 = warm[0] * prev_area / area
            f_d0 = warm[1]
        eps_b, f_d, nfev = _optimize_leakage(
            joint, eps_ratio, t_width, t_plateau, eps_b0, f_d0, tol, maxfev
        )
        spec = PulseSpec(eps_ratio * eps_b, eps_b, f_d, t_width, t_plateau)
        result = project_and_fix(propagate(joint, spec, tol=tol, columns=comp), joint)
        rows.append(
            DurationPoint(
                t_gate=float(tg),
                t_plateau=float(t_plateau),
                eps_b=eps_b,
                f_d=f_d,
                p_leak=result.p_leak,
                gate_error=1.0 - result.fidelity,
                delta_phi=result.delta_phi,
                n_evals=nfev,
            )
        )
        warm = (eps_b, f_d)
        prev_area = area
    return rows


@dataclass(frozen=True)
class LandscapePoint:
    delta_detuning: float
    amp_scale: float
    p_leak: float
    gate_error: float
    delta_phi: float


def error_landscape(
    joint: JointSystem,
    t_gate: float,
    detunings,
    amp_scales,
    eps_ratio: float = 0.9,
    t_width: float = 15.0,
    tol: float = 1e-9,
) -> list[LandscapePoint]:
    """Leakage and gate error over a detuning x amplitude grid at fixed duration."""
    from .device import spectrum_summary

    summary = spectrum_summary(joint)
    t_plateau = t_gate - 2.0 * t_width
    if t_plateau < 0:
        raise ValueError("t_gate shorter than the two edges")
    spec0, _ = design_pulse(joint, eps_ratio, t_width=t_width, t_plateau=t_plateau)
    comp = joint.computational_indices
    rows = []
    for d in np.atleast_1d(np.asarray(detunings, float)):
        for s in np.atleast_1d(np.asarray(amp_scales, float)):
            spec = PulseSpec(
                spec0.eps_a * s, spec0.eps_b * s, summary.f_11_21 - d, t_width, t_plateau
            )
            res = project_and_fix(propagate(joint, spec, tol=tol, columns=comp), joint)
            rows.append(
                LandscapePoint(
                    delta_detuning=float(d),
                    amp_scale=float(s),
                    p_leak=res.p_leak,
                    gate_error=1.0 - res.fidelity,
                    delta_phi=res.delta_phi,
                )
            )
    return rows
