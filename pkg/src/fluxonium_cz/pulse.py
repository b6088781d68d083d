"""Gaussian flat-top drive envelope and the time-dependent drive operator."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .device import JointSystem

__all__ = ["PulseSpec", "envelope", "edge_area", "drive_matrix", "drive_operator"]

_EXP_EDGE = math.exp(-math.pi)  # raw edge value at t = 0 before normalization


@dataclass(frozen=True)
class PulseSpec:
    """Drive amplitudes (GHz), frequency (GHz) and flat-top timing (ns).

    The envelope rises over ``t_width``, stays at 1 for ``t_plateau`` and
    falls symmetrically, so the total gate time is ``2 t_width + t_plateau``.
    """

    eps_a: float
    eps_b: float
    f_d: float
    t_width: float
    t_plateau: float

    def __post_init__(self):
        if not self.t_width > 0:
            raise ValueError(f"t_width must be positive, got {self.t_width}")
        if self.t_plateau < 0:
            raise ValueError(f"t_plateau must be non-negative, got {self.t_plateau}")

    @property
    def t_gate(self) -> float:
        return 2.0 * self.t_width + self.t_plateau

    @property
    def amp_ratio(self) -> float:
        """Recorded drive-amplitude ratio eps_a / eps_b."""
        return self.eps_a / self.eps_b

    def scaled(self, amp_scale: float) -> "PulseSpec":
        return PulseSpec(self.eps_a * amp_scale, self.eps_b * amp_scale,
                         self.f_d, self.t_width, self.t_plateau)


def _edge(x, t_width):
    # rising edge on [0, t_width], normalized to reach exactly 1; the Gaussian
    # width sigma = t_width / sqrt(2 pi) makes the raw edge offset exp(-pi)
    sigma2 = t_width * t_width / (2.0 * math.pi)
    raw = np.exp(-((x - t_width) ** 2) / (2.0 * sigma2))
    return (raw - _EXP_EDGE) / (1.0 - _EXP_EDGE)


def envelope(t, spec: PulseSpec):
    """Envelope value in [0, 1] at time ``t`` (ns); accepts scalars or arrays.

    Zero at t = 0 and t = t_gate, exactly 1 on the plateau; times outside
    [0, t_gate] raise ``ValueError``.
    """
    t_arr = np.asarray(t, dtype=float)
    tg = spec.t_gate
    if np.any(t_arr < 0) or np.any(t_arr > tg):
        raise ValueError(f"time outside pulse window [0, {tg}]")
    tw = spec.t_width
    out = np.where(
        t_arr <= tw,
        _edge(np.minimum(t_arr, tw), tw),
        np.where(t_arr >= tg - tw, _edge(np.minimum(tg - t_arr, tw), tw), 1.0),
    )
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def edge_area() -> float:
    """Integral of one normalized edge in units of t_width."""
    # int_0^tw edge dt = [sigma sqrt(pi/2) erf(sqrt(pi)) - tw exp(-pi)] / (1 - exp(-pi))
    erf_term = 0.5 * math.erf(math.sqrt(math.pi))
    return (erf_term - _EXP_EDGE) / (1.0 - _EXP_EDGE)


def drive_matrix(joint: JointSystem, spec: PulseSpec) -> np.ndarray:
    """Static drive operator eps_a * n_A + eps_b * n_B in the dressed basis."""
    return spec.eps_a * joint.charge_a + spec.eps_b * joint.charge_b


def drive_operator(joint: JointSystem, spec: PulseSpec, t: float) -> np.ndarray:
    """Full drive term at time ``t``: envelope(t) cos(2 pi f_d t) (eps_a n_A + eps_b n_B)."""
    return envelope(t, spec) * math.cos(2.0 * math.pi * spec.f_d * t) * drive_matrix(joint, spec)
