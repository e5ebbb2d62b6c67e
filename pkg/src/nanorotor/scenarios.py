"""Scenario registry: frozen experiment protocols and their outputs.

Each scenario runs one standard experiment (a single trajectory, a
Monte-Carlo ensemble, a parameter sweep, or a spectral run) and writes
RFC-4180 CSV files plus a JSON manifest into out/<scenario>/<timestamp>/.
The manifest records the fully resolved configuration, seeds, derived
quantities, and a sha256 checksum per output file, so a run can be
reproduced bit-for-bit.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import math
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .config import RunConfig, build_experiment
from .ensemble import (
    ExperimentConfig,
    ensemble_stats,
    run_experiment,
    run_one,
    shifted_energy_kelvin_series,
    staged_chi_run,
    theta_sweep,
    validate_initial_ensemble,
)
from .errors import NanorotorError, UnknownScenario, ValidationError
from .fastsim import STATUS_OK, make_kernel_spec
from .feedback import FeedbackConfig, STAGED_CHI_SCHEDULE
from .modes import (
    axial_displacement_ratio,
    coupling_frequency,
    normal_modes_elliptical,
    normal_modes_linear,
)
from .spectral import estimate_psd, find_peaks, p45_series
from .thermal import sample_state, trajectory_rng

THETA_DEEP = 4.0 * math.pi / 32.0


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = np.column_stack(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".12g") for v in row])


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def derived_quantities(cfg: ExperimentConfig) -> dict[str, float]:
    p, t = cfg.particle, cfg.trap
    omega_c_thermal = coupling_frequency(p, math.sqrt(300.0 * 1.380649e-23 / p.inertia_z))
    return {
        "field_amp_V_per_m": t.field_amp,
        "omega_rad_s": t.omega,
        "omega_xi_rad_s": math.sqrt(t.omega_xi2),
        "omega_eta_rad_s": math.sqrt(t.omega_eta2),
        "inertia_x_kg_m2": p.inertia_x,
        "inertia_z_kg_m2": p.inertia_z,
        "alpha_x_C_m2_per_V": p.alpha_x,
        "alpha_z_C_m2_per_V": p.alpha_z,
        "inertia_ratio": p.inertia_ratio,
        "coupling_freq_thermal_rms_rad_s": omega_c_thermal,
        "axial_displacement_ratio": axial_displacement_ratio(p, t),
    }


def _config_dict(run_cfg: RunConfig) -> dict[str, Any]:
    return run_cfg.as_dict()


class ScenarioRun:
    """Accumulates outputs and finalizes the manifest."""

    def __init__(self, name: str, out_root: str, run_cfg: RunConfig):
        stamp = _dt.datetime.now().strftime("%Y%m%dT%H%M%S.%f")
        self.name = name
        self.dir = Path(out_root) / name / stamp
        self.dir.mkdir(parents=True, exist_ok=True)
        self.run_cfg = run_cfg
        self.outputs: list[str] = []
        self.extra: dict[str, Any] = {}
        self.t0 = time.monotonic()

    def csv(self, stem: str, header: list[str], columns: list[np.ndarray]) -> Path:
        path = self.dir / f"{stem}.csv"
        _write_csv(path, header, columns)
        self.outputs.append(path.name)
        return path

    def finalize(self, cfg: ExperimentConfig) -> Path:
        manifest = {
            "scenario": self.name,
            "code_version": __version__,
            "created": _dt.datetime.now().isoformat(),
            "wall_clock_s": time.monotonic() - self.t0,
            "config": _config_dict(self.run_cfg),
            "master_seed": self.run_cfg.get("ensemble", "seed"),
            "derived": derived_quantities(cfg),
            "outputs": {name: _sha256(self.dir / name) for name in self.outputs},
        }
        manifest.update(self.extra)
        path = self.dir / "manifest.json"
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _single_trajectory(cfg: ExperimentConfig, t_out: np.ndarray, index: int = 0):
    spec = make_kernel_spec(
        cfg.particle, cfg.trap, cfg.feedback, cfg.noise, cfg.integ, cfg.method
    )
    out, status = run_one(index, cfg, spec, t_out)
    if status != STATUS_OK:
        raise NanorotorError(f"trajectory terminated with status {status}")
    return out


def _emit_trajectory(run: ScenarioRun, cfg: ExperimentConfig, out: np.ndarray,
                     t_out: np.ndarray, stem: str) -> None:
    alpha, beta = out[:, 0], out[:, 1]
    energy = shifted_energy_kelvin_series(out, cfg.particle, cfg.trap)
    run.csv(
        stem,
        ["t_s", "alpha_rad", "beta_rad", "gamma_rad", "alpha_dot_rad_s",
         "beta_dot_rad_s", "omega3_rad_s", "energy_K", "tip_z_over_2R",
         "tip_y_over_2R"],
        [t_out, out[:, 0], out[:, 1], out[:, 2], out[:, 3], out[:, 4],
         out[:, 5], energy, np.cos(beta), np.sin(beta) * np.sin(alpha)],
    )


def _emit_psd(run: ScenarioRun, stem: str, series: np.ndarray, dt: float,
              label: str, segment_length: int | None = None) -> list[dict[str, float]]:
    psd = estimate_psd(series, dt, segment_length=segment_length)
    run.csv(stem, ["f_Hz", "omega_rad_s", "psd"], [psd.frequencies, psd.omega, psd.power])
    peaks = []
    for n in (6, 4, 2, 1):
        try:
            peaks = find_peaks(psd, n=n)
            break
        except NanorotorError:
            continue
    entries = [
        {"f_Hz": f, "omega_rad_s": 2.0 * math.pi * f, "height": h, "width_Hz": w}
        for f, h, w in peaks
    ]
    run.extra.setdefault("psd_peaks", {})[label] = entries
    return entries


def _scenario_tip(run: ScenarioRun, cfg: ExperimentConfig, theta: float) -> None:
    cfg = dataclasses.replace(
        cfg, trap=cfg.trap.with_theta(theta), feedback=None, noise=None
    )
    dt = 1e-7
    t_out = np.arange(0.0, 4e-3 + dt / 2, dt)
    out = _single_trajectory(cfg, t_out)
    _emit_trajectory(run, cfg, out, t_out, "trajectory")
    _emit_psd(run, "psd", p45_series(out[:, 0], out[:, 1]), dt, "thermal",
              segment_length=16384)
    run.finalize(cfg)


def _scenario_fig2a(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    _scenario_tip(run, cfg, 0.0)


def _scenario_fig2b(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    _scenario_tip(run, cfg, THETA_DEEP)


def _emit_histogram(run: ScenarioRun, stem: str, stats) -> None:
    centers = 0.5 * (stats.bin_edges[:-1] + stats.bin_edges[1:])
    run.csv(stem, ["energy_K", "density_per_K"], [centers, stats.density])
    run.extra[f"{stem}_fit"] = {
        "n_dof": stats.fit_n_dof,
        "temperature_K": stats.fit_temperature,
        "residual": stats.fit_residual,
        "mean_K": stats.mean,
        "sem_K": stats.sem,
        "n_failed": stats.n_failed,
    }


def _scenario_fig3b(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    """Initial thermal energy distribution (no cooling)."""
    from .ensemble import EnsembleStats, fit_maxwell_boltzmann

    cfg = dataclasses.replace(cfg, feedback=None, noise=None,
                              t_final=1e-6, n_samples=2)
    res = run_experiment(cfg)
    validate_initial_ensemble(res, cfg.thermal.temperature)
    e0 = res.initial_energies
    density, edges = np.histogram(e0, bins=40, density=True)
    _, temp, residual = fit_maxwell_boltzmann(e0, 1)
    stats = EnsembleStats(
        final_energies=e0,
        mean=float(e0.mean()),
        sem=float(e0.std(ddof=1) / math.sqrt(e0.size)),
        bin_edges=edges,
        density=density,
        fit_n_dof=1.0,
        fit_temperature=temp,
        fit_residual=residual,
        n_failed=int(res.statuses.size - res.n_ok),
    )
    _emit_histogram(run, "histogram", stats)
    run.finalize(cfg)


def _cooling_histogram(run: ScenarioRun, cfg: ExperimentConfig, theta: float,
                       n_dof: float) -> None:
    cfg = dataclasses.replace(cfg, trap=cfg.trap.with_theta(theta))
    if cfg.feedback is None:
        cfg = dataclasses.replace(cfg, feedback=FeedbackConfig(signal_choice="sum"))
    res = run_experiment(cfg)
    validate_initial_ensemble(res, cfg.thermal.temperature)
    stats = ensemble_stats(res, n_dof=n_dof)
    _emit_histogram(run, "histogram", stats)
    run.csv("mean_energy", ["t_s", "mean_energy_K"], [res.times, res.mean_energy()])
    run.finalize(cfg)


def _scenario_fig3c(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    _cooling_histogram(run, cfg, 0.0, n_dof=0)


def _scenario_fig3d(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    _cooling_histogram(run, cfg, THETA_DEEP, n_dof=0)


def _scenario_fig4a(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    feedback = FeedbackConfig(signal_choice="sum", chi=1e7,
                              schedule=STAGED_CHI_SCHEDULE)
    cfg = dataclasses.replace(
        cfg, trap=cfg.trap.with_theta(THETA_DEEP), feedback=feedback,
        noise=None, t_final=9e-3, n_samples=9001,
    )
    times, energy, status = staged_chi_run(cfg)
    if status != STATUS_OK:
        raise NanorotorError(f"staged run terminated with status {status}")
    run.csv("energy_trace", ["t_s", "energy_K"], [times, energy])
    run.extra["schedule"] = [[t, c] for t, c in STAGED_CHI_SCHEDULE]
    run.extra["final_energy_K"] = float(energy[-1])
    run.finalize(cfg)


def _scenario_fig4b(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    thetas = np.linspace(0.0, THETA_DEEP, 8)
    if cfg.feedback is None:
        cfg = dataclasses.replace(cfg, feedback=FeedbackConfig(signal_choice="sum"))
    points = theta_sweep(thetas, cfg)
    run.csv(
        "theta_sweep",
        ["theta_rad", "mean_energy_K", "sem_K", "n_ok"],
        [np.array([p.theta for p in points]),
         np.array([p.mean_energy for p in points]),
         np.array([p.sem for p in points]),
         np.array([float(p.n_ok) for p in points])],
    )
    run.finalize(cfg)


def _scenario_psd_pair(run: ScenarioRun, cfg: ExperimentConfig, theta: float) -> None:
    cfg = dataclasses.replace(cfg, trap=cfg.trap.with_theta(theta), noise=None)
    if cfg.feedback is None:
        cfg = dataclasses.replace(cfg, feedback=FeedbackConfig(signal_choice="sum"))
    dt = 1e-7
    t_hot = np.arange(0.0, 10e-3 + dt / 2, dt)
    hot_cfg = dataclasses.replace(cfg, feedback=None)
    out_hot = _single_trajectory(hot_cfg, t_hot)
    _emit_psd(run, "psd_before", p45_series(out_hot[:, 0], out_hot[:, 1]), dt, "before")

    # cool for t_final, then record a dense tail window with feedback held on
    t_cool = cfg.t_final
    t_out = np.concatenate([
        np.linspace(0.0, t_cool - 10.5e-3, 50),
        np.arange(t_cool - 10e-3, t_cool + dt / 2, dt),
    ])
    out = _single_trajectory(cfg, t_out)
    tail = out[50:]
    _emit_psd(run, "psd_after", p45_series(tail[:, 0], tail[:, 1]), dt, "after")
    wc = coupling_frequency(cfg.particle, float(np.mean(tail[:, 5])))
    if theta == 0.0:
        wp, wm, _ = normal_modes_linear(cfg.trap.omega, wc)
    else:
        md = normal_modes_elliptical(cfg.trap.omega_xi2, cfg.trap.omega_eta2, wc)
        wp, wm = md.omega_plus, md.omega_minus
    run.extra["mode_frequencies_rad_s"] = {"plus": wp, "minus": wm}
    run.finalize(cfg)


def _scenario_fig5a(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    _scenario_psd_pair(run, cfg, 0.0)


def _scenario_fig5b(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    _scenario_psd_pair(run, cfg, THETA_DEEP)


def _scenario_validate(run: ScenarioRun, cfg: ExperimentConfig) -> None:
    """Fast invariant suite: conservation, initial ensemble, mode formulas."""
    from scipy.constants import k as kB

    from .rigidbody import potential_gradients, potential_energy, EulerState

    checks: dict[str, dict[str, Any]] = {}

    # 1. conservation without feedback or noise
    base = dataclasses.replace(
        cfg, feedback=None, noise=None, t_final=0.1e-3, n_samples=101,
        integ=dataclasses.replace(cfg.integ, rel_tol=1e-12, abs_tol=1e-14,
                                  dt_max=1e-7),
        method="dopri5",
    )
    t_out = base.sample_times()
    out = _single_trajectory(base, t_out)
    e = shifted_energy_kelvin_series(out, base.particle, base.trap)
    drift = float((e.max() - e.min()) / max(e[0], 1e-300))
    w3_drift = float(np.max(np.abs(out[:, 5] - out[0, 5])) /
                     max(abs(out[0, 5]), 1e-300))
    checks["energy_conservation"] = {"relative_drift": drift, "pass": drift < 1e-7}
    checks["spin_conservation"] = {"relative_drift": w3_drift, "pass": w3_drift == 0.0}

    # 2. gradient consistency (finite difference vs analytic)
    rng = trajectory_rng(cfg.thermal.seed, 999)
    s = sample_state(rng, cfg.trap, cfg.particle, cfg.thermal)
    ga, gb = potential_gradients(s.alpha, s.beta, cfg.trap, cfg.particle)
    h = 1e-7
    def _u(da: float, db: float) -> float:
        return potential_energy(
            EulerState(s.alpha + da, s.beta + db, s.gamma, 0.0, 0.0, 0.0),
            cfg.trap, cfg.particle,
        )
    fa = (_u(h, 0.0) - _u(-h, 0.0)) / (2.0 * h)
    fb = (_u(0.0, h) - _u(0.0, -h)) / (2.0 * h)
    scale = abs(fa) + abs(fb) + kB
    gerr = (abs(fa - ga) + abs(fb - gb)) / scale
    checks["potential_gradients"] = {"relative_error": gerr, "pass": gerr < 1e-6}

    # 3. initial ensemble statistics
    tcfg = dataclasses.replace(cfg, feedback=None, noise=None,
                               n_trajectories=max(cfg.n_trajectories, 200),
                               t_final=1e-6, n_samples=2)
    res = run_experiment(tcfg)
    try:
        validate_initial_ensemble(res, cfg.thermal.temperature)
        checks["initial_ensemble"] = {
            "mean_K": float(res.initial_energies.mean()), "pass": True,
        }
    except ValidationError as exc:
        checks["initial_ensemble"] = {"error": str(exc), "pass": False}

    run.extra["checks"] = checks
    run.extra["all_pass"] = all(c["pass"] for c in checks.values())
    run.finalize(cfg)
    if not run.extra["all_pass"]:
        raise ValidationError("validate scenario: one or more checks failed")


SCENARIOS: dict[str, Callable[[ScenarioRun, ExperimentConfig], None]] = {
    "fig2a": _scenario_fig2a,
    "fig2b": _scenario_fig2b,
    "fig3b": _scenario_fig3b,
    "fig3c": _scenario_fig3c,
    "fig3d": _scenario_fig3d,
    "fig4a": _scenario_fig4a,
    "fig4b": _scenario_fig4b,
    "fig5a": _scenario_fig5a,
    "fig5b": _scenario_fig5b,
    "validate": _scenario_validate,
}


def run_scenario(name: str, run_cfg: RunConfig, out_root: str = "out") -> Path:
    """Execute a registered scenario; returns the output directory."""
    if name not in SCENARIOS:
        raise UnknownScenario(
            f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}"
        )
    cfg = build_experiment(run_cfg)
    run = ScenarioRun(name, out_root, run_cfg)
    SCENARIOS[name](run, cfg)
    return run.dir
