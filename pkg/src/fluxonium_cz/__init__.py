"""Pulse-level simulator and calibration toolkit for a microwave-activated
controlled-Z gate between two capacitively coupled fluxonium qubits."""

from .cmaes import CmaEs, OptResult, OptTrace, optimize
from .config import DeviceConfig, build_system, load_config, load_paper_config, paper_config_path
from .design import (
    SyncSolution,
    design_pulse,
    error_landscape,
    fit_rabi_frequency,
    geometric_phases,
    measure_rabi_ratio,
    rabi_frequency_ratio,
    rabi_map,
    scan_gate_error_vs_duration,
    sync_parameters,
)
from .device import (
    FluxoniumParams,
    JointSystem,
    SingleMode,
    SpectrumSummary,
    build_fluxonium,
    build_joint,
    flux_sweep,
    spectrum_summary,
)
from .dynamics import (
    CZ,
    GateResult,
    avg_gate_fidelity,
    evolve_states,
    leakage,
    project_and_fix,
    propagate,
)
from .metrology import (
    RbCurve,
    RbFit,
    ReadoutCal,
    chi_from_unitary,
    clifford_fidelity,
    fit_rb,
    interleaved_error,
    process_fidelity,
    rate_evolve,
    rb_error_bar,
    readout_correct,
    synth_rb_curve,
)
from .open_system import (
    CoherenceSet,
    analytic_gate_error,
    analytic_state_error,
    lindblad_gate_error,
)
from .orbit import GateParams, initial_gate_params, optimize_gate, orbit_cost
from .pulse import PulseSpec, drive_operator, envelope

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
