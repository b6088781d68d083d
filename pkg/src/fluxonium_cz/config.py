"""Device configuration: a strict JSON schema with explicit units in key names."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .device import FluxoniumParams, JointSystem, SingleMode, build_fluxonium, build_joint
from .errors import ConfigError
from .open_system import CoherenceSet

__all__ = [
    "TransitionCoherence",
    "Numerics",
    "DeviceConfig",
    "load_config",
    "paper_config_path",
    "load_paper_config",
    "build_system",
]

_COHERENCE_ROWS = ("00-10", "00-01", "10-20", "11-21")


@dataclass(frozen=True)
class TransitionCoherence:
    t1_us: float
    t2r_us: float
    t2e_us: float

    def __post_init__(self):
        for name in ("t1_us", "t2r_us", "t2e_us"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Numerics:
    n_basis: int = 60
    n_keep: int = 6
    m_trunc: int = 20
    tol: float = 1e-10

    def __post_init__(self):
        if self.n_basis < 20:
            raise ValueError("n_basis must be at least 20")
        if not 1 <= self.n_keep <= self.n_basis:
            raise ValueError("n_keep must lie in [1, n_basis]")
        if self.m_trunc < 9:
            raise ValueError("m_trunc must be at least 9")
        if not 1e-12 <= self.tol <= 1e-6:
            raise ValueError("tol must lie in [1e-12, 1e-6]")


@dataclass(frozen=True)
class DeviceConfig:
    qubit_a: FluxoniumParams
    qubit_b: FluxoniumParams
    j_c: float
    drive_eps_ratio: float
    coherence: dict[str, TransitionCoherence]
    numerics: Numerics

    def coherence_set(self) -> CoherenceSet:
        c1020, c1121 = self.coherence["10-20"], self.coherence["11-21"]
        return CoherenceSet(
            t1_10_20=c1020.t1_us,
            t2r_10_20=c1020.t2r_us,
            t1_11_21=c1121.t1_us,
            t2r_11_21=c1121.t2r_us,
        )


def _take(mapping: dict, context: str, keys: dict):
    """Extract typed values from a dict, rejecting unknown or missing keys."""
    unknown = set(mapping) - set(keys)
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {', '.join(sorted(unknown))}")
    out = {}
    for key, caster in keys.items():
        if key not in mapping:
            raise ConfigError(f"missing key in {context}: {key}")
        try:
            out[key] = caster(mapping[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {context}.{key}: {exc}") from exc
    return out


def _float(x):
    val = float(x)
    if math.isnan(val):
        raise ValueError("NaN not allowed")
    return val


def _parse_qubit(node, name) -> FluxoniumParams:
    vals = _take(node, name, {"e_c_ghz": _float, "e_l_ghz": _float,
                              "e_j_ghz": _float, "phi_ext_rad": _float})
    try:
        return FluxoniumParams(vals["e_c_ghz"], vals["e_l_ghz"], vals["e_j_ghz"],
                               vals["phi_ext_rad"])
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def load_config(path) -> DeviceConfig:
    """Load and validate a device file; unknown keys are rejected outright."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    top = _take(
        raw,
        "config",
        {
            "qubit_a": dict,
            "qubit_b": dict,
            "j_c_ghz": _float,
            "drive_eps_ratio": _float,
            "coherence_us": dict,
            "numerics": dict,
        },
    )
    coh_node = top["coherence_us"]
    unknown = set(coh_node) - set(_COHERENCE_ROWS)
    if unknown:
        raise ConfigError(f"unknown transition(s) in coherence_us: {', '.join(sorted(unknown))}")
    coherence = {}
    for row in _COHERENCE_ROWS:
        if row not in coh_node:
            raise ConfigError(f"missing transition in coherence_us: {row}")
        vals = _take(coh_node[row], f"coherence_us.{row}",
                     {"t1_us": _float, "t2r_us": _float, "t2e_us": _float})
        try:
            coherence[row] = TransitionCoherence(**vals)
        except ValueError as exc:
            raise ConfigError(f"coherence_us.{row}: {exc}") from exc
    num_vals = _take(top["numerics"], "numerics",
                     {"n_basis": int, "n_keep": int, "m_trunc": int, "tol": _float})
    try:
        numerics = Numerics(**num_vals)
    except ValueError as exc:
        raise ConfigError(f"numerics: {exc}") from exc
    if not top["drive_eps_ratio"] > 0:
        raise ConfigError("drive_eps_ratio must be positive")
    cfg = DeviceConfig(
        qubit_a=_parse_qubit(top["qubit_a"], "qubit_a"),
        qubit_b=_parse_qubit(top["qubit_b"], "qubit_b"),
        j_c=top["j_c_ghz"],
        drive_eps_ratio=top["drive_eps_ratio"],
        coherence=coherence,
        numerics=numerics,
    )
    try:
        cfg.coherence_set()
    except ValueError as exc:
        raise ConfigError(f"coherence_us: {exc}") from exc
    return cfg


def paper_config_path() -> Path:
    """Path of the bundled reference device file."""
    return Path(resources.files("fluxonium_cz").joinpath("data/device_paper.json"))


def load_paper_config() -> DeviceConfig:
    return load_config(paper_config_path())


def build_system(config: DeviceConfig) -> tuple[SingleMode, SingleMode, JointSystem]:
    """Diagonalize both qubits and the coupled system per the config numerics."""
    num = config.numerics
    mode_a = build_fluxonium(config.qubit_a, num.n_basis, num.n_keep, check_convergence=False)
    mode_b = build_fluxonium(config.qubit_b, num.n_basis, num.n_keep, check_convergence=False)
    joint = build_joint(mode_a, mode_b, config.j_c, num.m_trunc)
    return mode_a, mode_b, joint
