"""Benchmarking and readout analysis: decay-curve fitting, fidelity formulas,
error-bar propagation, readout cross-talk correction, initialization rate
equations, and the process matrix of a unitary in the Pauli basis."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import curve_fit

from .errors import CalibrationError, FitError

__all__ = [
    "RbCurve",
    "RbFit",
    "ReadoutCal",
    "CorrectedPopulations",
    "rb_model",
    "fit_rb",
    "clifford_fidelity",
    "interleaved_error",
    "rb_error_bar",
    "readout_matrix",
    "readout_correct",
    "rate_evolve",
    "fit_rates",
    "two_qubit_paulis",
    "chi_from_unitary",
    "process_fidelity",
    "synth_rb_curve",
    "rb_curve_from_csv",
    "rb_curve_to_csv",
    "chi_to_csv",
]


@dataclass(frozen=True)
class RbCurve:
    """Survival-probability decay curve of a randomized sequence."""

    m_values: np.ndarray
    survival: np.ndarray
    std: np.ndarray | None = None
    n_interleaved: int = 0

    def __post_init__(self):
        m = np.asarray(self.m_values, dtype=float)
        s = np.asarray(self.survival, dtype=float)
        object.__setattr__(self, "m_values", m)
        object.__setattr__(self, "survival", s)
        if self.std is not None:
            object.__setattr__(self, "std", np.asarray(self.std, dtype=float))
        if m.shape != s.shape or (self.std is not None and self.std.shape != s.shape):
            raise ValueError("m_values, survival and std must have matching shapes")
        if np.any(s < 0) or np.any(s > 1):
            raise ValueError("survival probabilities must lie in [0, 1]")


class RbFit(NamedTuple):
    p: float
    a: float
    b: float
    c: float
    dp: float


def rb_model(m, a, b, c, p):
    """First-order decay model a + b p^m + c (m - 1) p^(m - 2)."""
    m = np.asarray(m, dtype=float)
    return a + b * np.power(p, m) + c * (m - 1.0) * np.power(p, np.maximum(m - 2.0, 0.0))


def fit_rb(curve: RbCurve) -> RbFit:
    """Nonlinear least-squares fit of the decay model; dp is the 1-sigma
    uncertainty of the depolarizing parameter from the fit covariance."""
    m, s = curve.m_values, curve.survival
    if np.unique(m).size < 4:
        raise ValueError("need at least 4 distinct sequence lengths")
    a0 = float(np.mean(s[np.argsort(m)][-max(2, m.size // 4):]))
    b0 = float(s[np.argmin(m)] - a0)
    order = np.argsort(m)
    m_lo, m_hi = m[order[0]], m[order[-1]]
    s_lo, s_hi = s[order[0]], s[order[-1]]
    if abs(b0) > 1e-12 and (s_hi - a0) / (s_lo - a0) > 0:
        p0 = float(np.clip(((s_hi - a0) / (s_lo - a0)) ** (1.0 / max(m_hi - m_lo, 1.0)), 0.5, 1.0))
    else:
        p0 = 0.99
    sigma = curve.std if curve.std is not None and np.all(curve.std > 0) else None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # covariance of boundary fits not estimable
            popt, pcov = curve_fit(
                lambda mm, a, b, c, p: rb_model(mm, a, b, c, p),
                m,
                s,
                p0=[a0, b0, 0.0, p0],
                sigma=sigma,
                bounds=([-1.0, -2.0, -2.0, 1e-6], [2.0, 2.0, 2.0, 1.0]),
                maxfev=20000,
            )
    except RuntimeError as exc:
        residual = float(np.sum((rb_model(m, a0, b0, 0.0, p0) - s) ** 2))
        raise FitError(f"decay fit diverged (initial residual {residual:.3e}): {exc}") from exc
    a, b, c, p = popt
    dp = float(np.sqrt(pcov[3, 3])) if np.isfinite(pcov[3, 3]) else float("inf")
    return RbFit(p=float(p), a=float(a), b=float(b), c=float(c), dp=dp)


def clifford_fidelity(p: float, d: int) -> float:
    """Average fidelity 1 - (d-1)/d (1-p) of a depolarizing channel."""
    if d not in (2, 4):
        raise ValueError(f"d must be 2 or 4, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return 1.0 - (d - 1) / d * (1.0 - p)


def interleaved_error(p_gate: float, p_ref: float, d: int) -> float:
    """Gate error (d-1)/d (1 - p_gate/p_ref) from interleaved decay parameters.

    A negative value (p_gate > p_ref, statistically possible) is returned
    as-is with a warning.
    """
    if p_ref <= 0:
        raise ValueError(f"p_ref must be positive, got {p_ref}")
    err = (d - 1) / d * (1.0 - p_gate / p_ref)
    if err < 0:
        warnings.warn("interleaved decay faster than reference: negative gate error", stacklevel=2)
    return float(err)


def rb_error_bar(p_n: float, dp_n: float, p_0: float, dp_0: float, d: int) -> float:
    """Propagated 1-sigma uncertainty of the interleaved fidelity estimate."""
    if p_0 <= 0:
        raise ValueError(f"p_0 must be positive, got {p_0}")
    return float((d - 1) / d * math.hypot(dp_n / p_0, p_n * dp_0 / (p_0 * p_0)))


@dataclass(frozen=True)
class ReadoutCal:
    """Per-qubit assignment parameters and excitation-swap cross-talk.

    ``a_*`` is the probability of correctly reading |0>, ``b_*`` of correctly
    reading |1>; ``swap_b``/``swap_c`` mix the 10 and 01 populations.
    """

    a_a: float
    b_a: float
    a_b: float
    b_b: float
    swap_b: float = 0.0
    swap_c: float = 0.0

    def __post_init__(self):
        for name in ("a_a", "b_a", "a_b", "b_b", "swap_b", "swap_c"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")


class CorrectedPopulations(NamedTuple):
    populations: np.ndarray
    clamped: bool


def readout_matrix(cal: ReadoutCal) -> np.ndarray:
    """Composite correction matrix in the (00, 01, 10, 11) population basis:
    swap matrix applied after the per-qubit confusion tensor product."""
    c_a = np.array([[cal.a_a, 1.0 - cal.b_a], [1.0 - cal.a_a, cal.b_a]])
    c_b = np.array([[cal.a_b, 1.0 - cal.b_b], [1.0 - cal.a_b, cal.b_b]])
    b, c = cal.swap_b, cal.swap_c
    # in (00, 01, 10, 11) order the excitation swap mixes the middle entries:
    # p01' = (1-c) p01 + b p10 ; p10' = c p01 + (1-b) p10
    swap = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0 - c, b, 0.0],
            [0.0, c, 1.0 - b, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return swap @ np.kron(c_a, c_b)


def readout_correct(p_raw, cal: ReadoutCal) -> CorrectedPopulations:
    """Apply the readout correction to a population 4-vector (00, 01, 10, 11).

    The corrected vector is renormalized to unit sum; negative entries are
    clamped to zero first and reported through the ``clamped`` flag.
    """
    p = np.asarray(p_raw, dtype=float)
    if p.shape != (4,):
        raise ValueError("p_raw must be a 4-vector")
    if abs(p.sum() - 1.0) > 1e-6:
        raise ValueError(f"populations must sum to 1 (got {p.sum():.8f})")
    mat = readout_matrix(cal)
    det = np.linalg.det(mat)
    if abs(det) < 1e-6:
        raise CalibrationError(f"correction matrix is singular: |det| = {abs(det):.2e}")
    out = mat @ p
    clamped = bool(np.any(out < 0))
    if clamped:
        out = np.clip(out, 0.0, None)
    total = out.sum()
    if total <= 0:
        raise CalibrationError("corrected populations sum to zero after clamping")
    return CorrectedPopulations(out / total, clamped)


def rate_evolve(p1_0: float, gamma_up: float, gamma_down: float, t) -> float | np.ndarray:
    """Excited-state probability under constant up/down rates (1/ms, t in ms),
    relaxing exponentially toward gamma_up / (gamma_up + gamma_down)."""
    if gamma_up < 0 or gamma_down < 0:
        raise ValueError("rates must be non-negative")
    total = gamma_up + gamma_down
    t = np.asarray(t, dtype=float)
    if total == 0.0:
        out = np.broadcast_to(np.asarray(p1_0, dtype=float), t.shape).copy()
    else:
        p_inf = gamma_up / total
        out = p_inf + (p1_0 - p_inf) * np.exp(-total * t)
    return float(out) if out.ndim == 0 else out


def fit_rates(t, p1) -> tuple[float, float, float]:
    """Fit (gamma_up, gamma_down, p1_0) of the rate-equation solution to a
    measured excited-population trace (t in ms, rates in 1/ms)."""
    t = np.asarray(t, dtype=float)
    p = np.asarray(p1, dtype=float)
    if t.size < 4:
        raise FitError("need at least 4 samples to fit rates")
    p_inf0 = float(p[-1])
    total0 = 1.0 / max(t[-1] / 3.0, 1e-9)
    try:
        popt, _ = curve_fit(
            lambda tt, gu, gd, p0: rate_evolve(p0, gu, gd, tt),
            t,
            p,
            p0=[max(p_inf0 * total0, 1e-6), max((1 - p_inf0) * total0, 1e-6), float(p[0])],
            bounds=([0.0, 0.0, 0.0], [np.inf, np.inf, 1.0]),
            maxfev=20000,
        )
    except RuntimeError as exc:
        raise FitError(f"rate fit diverged: {exc}") from exc
    return float(popt[0]), float(popt[1]), float(popt[2])


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI_LABELS = tuple(f"{i}{j}" for i in "IXYZ" for j in "IXYZ")


def two_qubit_paulis() -> np.ndarray:
    """The 16 two-qubit Pauli products, {I,X,Y,Z} x {I,X,Y,Z} row-major, (16,4,4)."""
    return np.stack([np.kron(_PAULI_1Q[l[0]], _PAULI_1Q[l[1]]) for l in PAULI_LABELS])


def chi_from_unitary(u: np.ndarray) -> np.ndarray:
    """Process matrix chi = alpha alpha^dag of a 4x4 unitary in the Pauli basis,
    with alpha_i = Tr(P_i^dag u) / 4; trace one, positive semidefinite, rank 1."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("u must be 4x4")
    if np.abs(u.conj().T @ u - np.eye(4)).max() > 1e-9:
        raise ValueError("input is not unitary to 1e-9")
    paulis = two_qubit_paulis()
    alpha = np.array([np.trace(p.conj().T @ u) for p in paulis]) / 4.0
    return np.outer(alpha, alpha.conj())


def process_fidelity(chi_a: np.ndarray, chi_b: np.ndarray) -> float:
    """Tr(chi_a chi_b), real part (exact for rank-1 process matrices)."""
    return float(np.trace(np.asarray(chi_a) @ np.asarray(chi_b)).real)


def synth_rb_curve(
    p: float,
    a: float,
    b: float,
    c: float,
    m_values,
    noise_sigma: float = 0.0,
    seed: int = 0,
    n_interleaved: int = 0,
) -> RbCurve:
    """Synthetic decay curve: model values plus seeded Gaussian noise, clamped to [0, 1]."""
    m = np.asarray(m_values, dtype=float)
    values = rb_model(m, a, b, c, p)
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, size=m.shape)
    values = np.clip(values, 0.0, 1.0)
    std = np.full(m.shape, noise_sigma) if noise_sigma > 0 else None
    return RbCurve(m_values=m, survival=values, std=std, n_interleaved=n_interleaved)


def rb_curve_from_csv(path) -> list[RbCurve]:
    """Read decay curves from CSV with columns m, survival, std, n_interleaved;
    rows sharing n_interleaved form one curve."""
    groups: dict[int, list[tuple[float, float, float]]] = {}
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    header = [h.strip() for h in rows[0]]
    expected = ["m", "survival", "std", "n_interleaved"]
    if header != expected:
        raise ValueError(f"expected columns {expected}, got {header}")
    for row in rows[1:]:
        m, s, sd, n = float(row[0]), float(row[1]), float(row[2]), int(row[3])
        groups.setdefault(n, []).append((m, s, sd))
    curves = []
    for n in sorted(groups):
        data = np.array(groups[n])
        std = data[:, 2] if np.any(data[:, 2] > 0) else None
        curves.append(RbCurve(data[:, 0], data[:, 1], std, n_interleaved=n))
    return curves


def rb_curve_to_csv(curves, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["m", "survival", "std", "n_interleaved"])
        for curve in curves if isinstance(curves, (list, tuple)) else [curves]:
            std = curve.std if curve.std is not None else np.zeros_like(curve.survival)
            for m, s, sd in zip(curve.m_values, curve.survival, std):
                writer.writerow([repr(float(m)), repr(float(s)), repr(float(sd)),
                                 curve.n_interleaved])


def chi_to_csv(chi: np.ndarray, path) -> None:
    """Write a process matrix as CSV rows (row label, column label, re, im)."""
    chi = np.asarray(chi)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pauli_row", "pauli_col", "re", "im"])
        for i, li in enumerate(PAULI_LABELS):
            for j, lj in enumerate(PAULI_LABELS):
                writer.writerow([li, lj, repr(float(chi[i, j].real)), repr(float(chi[i, j].imag))])
