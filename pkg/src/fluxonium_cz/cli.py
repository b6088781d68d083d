"""Command-line interface: config-driven simulation runs with CSV/JSON output.

Every output file starts with a reproducibility block (command, config hash,
seed); CSV files then carry a single header row. All commands are
deterministic for a fixed (config, flags, seed), so reruns are byte-identical
on the same platform.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import design as design_mod
from . import metrology, orbit
from .config import build_system, load_config, paper_config_path
from .device import flux_sweep, spectrum_summary
from .dynamics import project_and_fix, propagate
from .errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    FitError,
    FluxoniumCzError,
    InfeasibleGateError,
    IntegrationError,
    LabelingError,
    NumericalError,
    OptimizationError,
    PhaseUndefinedError,
)
from .open_system import analytic_gate_error, lindblad_gate_error
from .pulse import PulseSpec

_EXIT_CODES = [
    (ConfigError, 2),
    (LabelingError, 4),
    (IntegrationError, 5),
    (ConvergenceError, 3),
    (PhaseUndefinedError, 3),
    (NumericalError, 3),
    (FitError, 6),
    (InfeasibleGateError, 7),
    (CalibrationError, 8),
    (OptimizationError, 9),
    (FluxoniumCzError, 1),
]


def _fmt(value):
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def _meta(args, config_path):
    digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
    return {
        "command": args.command,
        "config": str(config_path),
        "config_sha256": digest,
        "seed": getattr(args, "seed", 0),
    }


def _write_csv(path, meta, columns, rows):
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key} = {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, meta, payload):
    with open(path, "w") as fh:
        json.dump({"meta": meta, "result": payload}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _summary_dict(summary):
    return {
        "f_a_ghz": summary.f_a,
        "f_b_ghz": summary.f_b,
        "delta_ghz": summary.delta,
        "delta_sign": summary.delta_sign,
        "xi_zz_ghz": summary.xi_zz,
        "f_10_20_ghz": summary.f_10_20,
        "f_11_21_ghz": summary.f_11_21,
        "n01_a": summary.n01_a,
        "n12_a": summary.n12_a,
        "n01_b": summary.n01_b,
        "n12_b": summary.n12_b,
    }


def _parse_phase(text: str) -> float:
    if text.strip().lower() in ("pi", "+pi"):
        return math.pi
    if text.strip().lower() == "-pi":
        return -math.pi
    return float(text)


def _grid(spec: str) -> np.ndarray:
    """Parse 'start:stop:num' (inclusive linspace) or a comma list."""
    if ":" in spec:
        start, stop, num = spec.split(":")
        return np.linspace(float(start), float(stop), int(num))
    return np.array([float(x) for x in spec.split(",")])


def cmd_spectrum(args, config):
    _, _, joint = build_system(config)
    summary = spectrum_summary(joint)
    payload = _summary_dict(summary)
    payload["energies_ghz"] = {
        f"{i}{j}": joint.energy((i, j)) for (i, j) in sorted(joint.label_map)
    }
    _write_json(Path(args.out) / "spectrum.json", _meta(args, args.config), payload)
    return 0


def cmd_flux_sweep(args, config):
    rows = flux_sweep(
        config.qubit_a,
        config.qubit_b,
        config.j_c,
        _grid(args.flux),
        flux_offset=args.offset,
        n_basis=config.numerics.n_basis,
        n_keep=config.numerics.n_keep,
        m_trunc=config.numerics.m_trunc,
    )
    out_rows = []
    for row in rows:
        if row.ok:
            s = row.summary
            out_rows.append((row.phi_ext_a, row.phi_ext_b, 1, s.f_a, s.f_b, s.f_10_20,
                             s.f_11_21, s.delta, s.xi_zz, ""))
        else:
            out_rows.append((row.phi_ext_a, row.phi_ext_b, 0, "", "", "", "", "", "", row.error))
    _write_csv(
        Path(args.out) / "flux_sweep.csv",
        _meta(args, args.config),
        ["phi_ext_a_rad", "phi_ext_b_rad", "ok", "f_a_ghz", "f_b_ghz", "f_10_20_ghz",
         "f_11_21_ghz", "delta_ghz", "xi_zz_ghz", "error"],
        out_rows,
    )
    return 0


def cmd_rabi_map(args, config):
    _, _, joint = build_system(config)
    summary = spectrum_summary(joint)
    if args.f_grid is not None:
        grid = _grid(args.f_grid)
    else:
        span = 0.03
        grid = np.linspace(summary.f_10_20 - span / 3, summary.f_11_21 + span / 3, args.num_f)
    rmap = design_mod.rabi_map(
        joint,
        eps_b=args.amplitude,
        f_d_grid=grid,
        duration=args.duration,
        eps_ratio=config.drive_eps_ratio,
        n_times=args.num_t,
        tol=config.numerics.tol * 100,
    )
    rows = []
    for i, f_d in enumerate(rmap.f_d):
        for j, t in enumerate(rmap.times):
            rows.append((f_d, t, rmap.p_exc_10[i, j], rmap.p_exc_11[i, j]))
    _write_csv(
        Path(args.out) / "rabi_map.csv",
        _meta(args, args.config),
        ["f_d_ghz", "t_ns", "p_exc_from_10", "p_exc_from_11"],
        rows,
    )
    return 0


def cmd_design(args, config):
    _, _, joint = build_system(config)
    summary = spectrum_summary(joint)
    target = _parse_phase(args.target_phase)
    delta = args.delta if args.delta is not None else summary.delta
    r = args.r if args.r is not None else design_mod.rabi_frequency_ratio(
        joint, config.drive_eps_ratio
    )
    sol = design_mod.sync_parameters(delta, r, target, summary.f_11_21)
    theta_10, theta_11, delta_phi = design_mod.geometric_phases(sol, delta)
    spec, _ = design_mod.design_pulse(
        joint, config.drive_eps_ratio, target, t_width=args.t_width, r=r
    )
    payload = {
        "delta_ghz": delta,
        "r": r,
        "delta_over_delta_split": sol.delta_detuning / delta,
        "detuning_ghz": sol.delta_detuning,
        "omega_ghz": sol.omega,
        "omega_11_21_ghz": sol.omega_11_21,
        "omega_10_20_ghz": sol.omega_10_20,
        "f_d_ghz": sol.f_d,
        "t_gate_ideal_ns": sol.t_gate_ideal,
        "target_phase_rad": sol.target_phase,
        "theta_10_rad": theta_10,
        "theta_11_rad": theta_11,
        "delta_phi_rad": delta_phi,
        "pulse": {
            "eps_a_ghz": spec.eps_a,
            "eps_b_ghz": spec.eps_b,
            "f_d_ghz": spec.f_d,
            "t_width_ns": spec.t_width,
            "t_plateau_ns": spec.t_plateau,
            "t_gate_ns": spec.t_gate,
        },
    }
    _write_json(Path(args.out) / "design.json", _meta(args, args.config), payload)
    return 0


def cmd_gate_error_vs_duration(args, config):
    _, _, joint = build_system(config)
    rows = design_mod.scan_gate_error_vs_duration(
        joint,
        durations=_grid(args.durations),
        eps_ratio=config.drive_eps_ratio,
        t_width=args.t_width,
        tol=args.tol,
        maxfev=args.maxfev,
    )
    _write_csv(
        Path(args.out) / "gate_error_vs_duration.csv",
        _meta(args, args.config),
        ["t_gate_ns", "t_plateau_ns", "eps_b_ghz", "f_d_ghz", "p_leak", "gate_error",
         "delta_phi_rad", "n_evals"],
        [(r.t_gate, r.t_plateau, r.eps_b, r.f_d, r.p_leak, r.gate_error, r.delta_phi, r.n_evals)
         for r in rows],
    )
    return 0


def cmd_error_landscape(args, config):
    _, _, joint = build_system(config)
    summary = spectrum_summary(joint)
    r = design_mod.rabi_frequency_ratio(joint, config.drive_eps_ratio)
    sol = design_mod.sync_parameters(summary.delta, r, math.pi, summary.f_11_21)
    spec0, _ = design_mod.design_pulse(joint, config.drive_eps_ratio, t_width=args.t_width)
    t_gate = args.t_gate if args.t_gate is not None else spec0.t_gate
    detunings = sol.delta_detuning + np.linspace(-args.delta_span, args.delta_span, args.num_delta)
    amps = np.linspace(1.0 - args.amp_span, 1.0 + args.amp_span, args.num_amp)
    rows = design_mod.error_landscape(
        joint, t_gate, detunings, amps,
        eps_ratio=config.drive_eps_ratio, t_width=args.t_width, tol=args.tol,
    )
    _write_csv(
        Path(args.out) / "error_landscape.csv",
        _meta(args, args.config),
        ["detuning_ghz", "amp_scale", "p_leak", "gate_error", "delta_phi_rad"],
        [(r_.delta_detuning, r_.amp_scale, r_.p_leak, r_.gate_error, r_.delta_phi) for r_ in rows],
    )
    return 0


def cmd_lindblad_error(args, config):
    _, _, joint = build_system(config)
    summary = spectrum_summary(joint)
    delta = args.delta if args.delta is not None else summary.delta
    r = args.r if args.r is not None else design_mod.rabi_frequency_ratio(
        joint, config.drive_eps_ratio
    )
    sol = design_mod.sync_parameters(delta, r, math.pi, summary.f_11_21)
    t_gate = args.t_gate if args.t_gate is not None else sol.t_gate_ideal
    coherence = config.coherence_set().scaled(args.rate_scale)
    err = lindblad_gate_error(
        delta, sol.delta_detuning, sol.omega_10_20, sol.omega_11_21, coherence, t_gate,
        pure_dephasing=args.pure_dephasing,
    )
    payload = {
        "delta_ghz": delta,
        "r": r,
        "detuning_ghz": sol.delta_detuning,
        "omega_10_20_ghz": sol.omega_10_20,
        "omega_11_21_ghz": sol.omega_11_21,
        "t_gate_ns": t_gate,
        "rate_scale": args.rate_scale,
        "pure_dephasing": args.pure_dephasing,
        "lindblad_error": err,
        "analytic_error": analytic_gate_error(coherence, t_gate),
        "analytic_error_exact": analytic_gate_error(coherence, t_gate, exact=True),
    }
    _write_json(Path(args.out) / "lindblad_error.json", _meta(args, args.config), payload)
    return 0


def cmd_optimize(args, config):
    _, _, joint = build_system(config)
    base_pulse, _ = design_mod.design_pulse(
        joint, config.drive_eps_ratio, t_width=args.t_width
    )
    coherence = config.coherence_set() if args.mode == "lindblad" else None
    best, result = orbit.optimize_gate(
        joint,
        base_pulse,
        coherence=coherence,
        mode=args.mode,
        popsize=args.popsize,
        seed=args.seed,
        max_evals=args.max_evals,
        tol=args.tol,
    )
    xs, costs, bests = result.trace.as_arrays()
    rows = []
    for i in range(len(costs)):
        rows.append((i, costs[i], bests[i], *xs[i]))
    meta = _meta(args, args.config)
    _write_csv(
        Path(args.out) / "optimize_trace.csv",
        meta,
        ["eval", "cost", "best_cost", "amp_scale", "t_plateau_ns", "t_width_ns",
         "f_d_ghz", "z_a_rad", "z_b_rad"],
        rows,
    )
    _write_json(
        Path(args.out) / "optimize_best.json",
        meta,
        {
            "best_cost": result.cost,
            "termination": result.trace.termination,
            "n_evals": result.trace.n_evals,
            "params": {
                "amp_scale": best.amp_scale,
                "t_plateau_ns": best.t_plateau,
                "t_width_ns": best.t_width,
                "f_d_ghz": best.f_d,
                "z_a_rad": best.z_a,
                "z_b_rad": best.z_b,
                "t_gate_ns": best.t_gate,
            },
        },
    )
    return 0


def cmd_rb_fit(args, config):
    curves = metrology.rb_curve_from_csv(args.input)
    fits = {}
    for curve in curves:
        fit = metrology.fit_rb(curve)
        fits[curve.n_interleaved] = fit
    payload = {"curves": {}}
    for n, fit in sorted(fits.items()):
        payload["curves"][str(n)] = {
            "p": fit.p, "dp": fit.dp, "a": fit.a, "b": fit.b, "c": fit.c,
            "clifford_fidelity_d4": metrology.clifford_fidelity(fit.p, 4),
        }
    if 0 in fits and len(fits) > 1:
        ref = fits[0]
        gate_errors = {}
        for n, fit in sorted(fits.items()):
            if n == 0:
                continue
            gate_errors[str(n)] = {
                "error": metrology.interleaved_error(fit.p, ref.p, 4),
                "error_bar": metrology.rb_error_bar(fit.p, fit.dp, ref.p, ref.dp, 4),
            }
        payload["interleaved"] = gate_errors
    _write_json(Path(args.out) / "rb_fit.json", _meta(args, args.config), payload)
    return 0


def cmd_readout_correct(args, config):
    with open(args.cal) as fh:
        cal_raw = json.load(fh)
    allowed = {"a_a", "b_a", "a_b", "b_b", "swap_b", "swap_c"}
    unknown = set(cal_raw) - allowed
    if unknown:
        raise ConfigError(f"unknown calibration key(s): {', '.join(sorted(unknown))}")
    cal = metrology.ReadoutCal(**cal_raw)
    p_raw = np.array([float(x) for x in args.p_raw.split(",")])
    corrected = metrology.readout_correct(p_raw, cal)
    payload = {
        "p_raw": list(map(float, p_raw)),
        "p_corrected": list(map(float, corrected.populations)),
        "clamped": corrected.clamped,
        "ordering": ["00", "01", "10", "11"],
    }
    _write_json(Path(args.out) / "readout_correct.json", _meta(args, args.config), payload)
    return 0


def cmd_rate_fit(args, config):
    data = np.genfromtxt(args.input, delimiter=",", names=True, comments="#")
    if data.dtype.names is None or set(data.dtype.names) != {"t_ms", "p1"}:
        raise ConfigError("rate-fit input must have columns t_ms, p1")
    gamma_up, gamma_down, p1_0 = metrology.fit_rates(data["t_ms"], data["p1"])
    payload = {
        "gamma_up_per_ms": gamma_up,
        "gamma_down_per_ms": gamma_down,
        "p1_initial": p1_0,
        "p1_steady_state": gamma_up / (gamma_up + gamma_down),
    }
    _write_json(Path(args.out) / "rate_fit.json", _meta(args, args.config), payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxonium-cz",
        description="Two-fluxonium CZ gate simulator. CSV outputs: '#'-prefixed "
        "reproducibility block, one header row, comma separators, '.' decimals, LF endings.",
    )
    parser.add_argument("--config", default=None, help="device JSON (default: bundled device)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for stochastic commands")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("spectrum", help="static spectrum summary (JSON)")

    p = sub.add_parser("flux-sweep", help="transition frequencies vs external flux (CSV)")
    p.add_argument("--flux", default="2.8274333882308138:3.455751918948773:41",
                   help="'start:stop:num' in radians, or comma list")
    p.add_argument("--offset", type=float, default=0.0, help="qubit-B flux offset (rad)")

    p = sub.add_parser("rabi-map", help="chevron map near the gate transitions (CSV)")
    p.add_argument("--amplitude", type=float, default=0.02, help="eps_b (GHz)")
    p.add_argument("--duration", type=float, default=330.0, help="pulse duration (ns)")
    p.add_argument("--f-grid", default=None, help="'start:stop:num' (GHz); default spans both transitions")
    p.add_argument("--num-f", type=int, default=41)
    p.add_argument("--num-t", type=int, default=111)

    p = sub.add_parser("design", help="synchronized-gate parameters (JSON)")
    p.add_argument("--target-phase", default="pi", help="conditional phase (rad, or 'pi')")
    p.add_argument("--r", type=float, default=None, help="Rabi ratio override")
    p.add_argument("--delta", type=float, default=None, help="splitting override (GHz)")
    p.add_argument("--t-width", type=float, default=15.0)

    p = sub.add_parser("gate-error-vs-duration", help="coherent error scan (CSV)")
    p.add_argument("--durations", default="49:67:10", help="'start:stop:num' in ns, or comma list")
    p.add_argument("--t-width", type=float, default=15.0)
    p.add_argument("--maxfev", type=int, default=60)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("error-landscape", help="error vs detuning x amplitude (CSV)")
    p.add_argument("--t-gate", type=float, default=None, help="total duration (ns); default: design optimum")
    p.add_argument("--t-width", type=float, default=15.0)
    p.add_argument("--delta-span", type=float, default=2e-3, help="detuning half-span (GHz)")
    p.add_argument("--amp-span", type=float, default=0.05, help="amplitude half-span (relative)")
    p.add_argument("--num-delta", type=int, default=9)
    p.add_argument("--num-amp", type=int, default=9)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("lindblad-error", help="incoherent error of the six-level model (JSON)")
    p.add_argument("--t-gate", type=float, default=None, help="square-pulse duration (ns); default 1/omega")
    p.add_argument("--delta", type=float, default=None, help="splitting override (GHz)")
    p.add_argument("--r", type=float, default=None, help="Rabi ratio override")
    p.add_argument("--rate-scale", type=float, default=1.0)
    p.add_argument("--pure-dephasing", action="store_true",
                   help="subtract the relaxation half-rate from the dephasing collapse rate")

    p = sub.add_parser("optimize", help="six-parameter stochastic tune-up (CSV trace + JSON)")
    p.add_argument("--mode", choices=["coherent", "lindblad"], default="coherent")
    p.add_argument("--max-evals", type=int, default=600)
    p.add_argument("--popsize", type=int, default=12)
    p.add_argument("--t-width", type=float, default=15.0)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("rb-fit", help="fit decay curves from CSV (JSON)")
    p.add_argument("--input", required=True, help="CSV with columns m, survival, std, n_interleaved")

    p = sub.add_parser("readout-correct", help="apply readout correction to populations (JSON)")
    p.add_argument("--p-raw", required=True, help="comma list p00,p01,p10,p11")
    p.add_argument("--cal", required=True, help="JSON with a_a, b_a, a_b, b_b, swap_b, swap_c")

    p = sub.add_parser("rate-fit", help="fit initialization rates from a trace (JSON)")
    p.add_argument("--input", required=True, help="CSV with columns t_ms, p1")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        args.config = str(paper_config_path())
    handlers = {
        "spectrum": cmd_spectrum,
        "flux-sweep": cmd_flux_sweep,
        "rabi-map": cmd_rabi_map,
        "design": cmd_design,
        "gate-error-vs-duration": cmd_gate_error_vs_duration,
        "error-landscape": cmd_error_landscape,
        "lindblad-error": cmd_lindblad_error,
        "optimize": cmd_optimize,
        "rb-fit": cmd_rb_fit,
        "readout-correct": cmd_readout_correct,
        "rate-fit": cmd_rate_fit,
    }
    try:
        config = load_config(args.config)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return handlers[args.command](args, config)
    except FluxoniumCzError as exc:
        for klass, code in _EXIT_CODES:
            if isinstance(exc, klass):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
