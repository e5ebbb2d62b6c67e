"""Renderers: one matplotlib figure per scenario family.

Every renderer consumes a verified :class:`~nanorotor_figs.io.RunData`
and returns a fully drawn Figure.  Analytic overlays (mode frequencies,
Maxwell-Boltzmann curves, schedule boundaries) take their parameters
from the run manifest; nothing is refit or resimulated.
"""
from __future__ import annotations

import math
from typing import Callable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import RenderError, RunData

# One fixed style for every figure so identical inputs give identical
# bytes regardless of the caller's matplotlib configuration.
_STYLE = {
    "figure.figsize": (8.0, 4.5),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
    "svg.hashsalt": "nanorotor-figs",
    "path.simplify": False,
}


def _maxwell_boltzmann(energy: np.ndarray, n_dof: float, temp: float) -> np.ndarray:
    """Normalized density ~ e^n exp(-e/T); parameters come from the manifest."""
    e = np.clip(energy, 0.0, None)
    return e ** n_dof * np.exp(-e / temp) / (temp ** (n_dof + 1.0) * math.gamma(n_dof + 1.0))


def _fit_params(run: RunData) -> tuple[float, float, float]:
    fit = run.manifest.get("histogram_fit")
    if not isinstance(fit, dict):
        raise RenderError(f"{run.directory}: manifest lacks histogram_fit")
    return float(fit["n_dof"]), float(fit["temperature_K"]), float(fit["mean_K"])


def _mark_modes(ax, run: RunData) -> None:
    modes = run.manifest.get("mode_frequencies_rad_s")
    if not isinstance(modes, dict):
        raise RenderError(f"{run.directory}: manifest lacks mode_frequencies_rad_s")
    for key, color in (("plus", "tab:red"), ("minus", "tab:green")):
        ax.axvline(float(modes[key]), color=color, linestyle="--",
                   linewidth=0.8, label=f"$\\omega_{'+' if key == 'plus' else '-'}$")


def render_tip(run: RunData) -> plt.Figure:
    """Tip trajectory in the polarization plane plus its p45 spectrum."""
    traj = run.table("trajectory")
    psd = run.table("psd")
    fig, (ax1, ax2) = plt.subplots(1, 2)

    # a short slice keeps the precessing orbit legible instead of a
    # filled disk
    window = traj["t_s"] <= traj["t_s"][0] + 3e-4
    ax1.plot(traj["tip_z_over_2R"][window], traj["tip_y_over_2R"][window],
             linewidth=0.4, color="tab:blue")
    ax1.set_xlabel("tip z / 2R")
    ax1.set_ylabel("tip y / 2R")
    ax1.set_title(f"{run.scenario}: thermal tip trajectory")
    ax1.set_aspect("equal", adjustable="datalim")

    ax2.semilogy(psd["omega_rad_s"], psd["psd"], color="tab:blue",
                 linewidth=0.6)
    peaks = run.manifest.get("psd_peaks", {}).get("thermal", [])
    for pk in peaks[:2]:
        ax2.axvline(float(pk["omega_rad_s"]), color="tab:red",
                    linestyle="--", linewidth=0.8)
    omega_trap = float(run.manifest["derived"]["omega_rad_s"])
    ax2.set_xlim(0.0, 1.6 * omega_trap)
    ax2.set_xlabel("$\\omega$ (rad/s)")
    ax2.set_ylabel("PSD of $p_{45}$ signal")
    ax2.set_title("spectrum with detected peaks")
    fig.tight_layout()
    return fig


def render_histogram(run: RunData) -> plt.Figure:
    """Energy histogram with the fitted Maxwell-Boltzmann curve overlaid."""
    hist = run.table("histogram")
    n_dof, temp, mean = _fit_params(run)
    centers = hist["energy_K"]
    width = float(np.median(np.diff(centers))) if centers.size > 1 else 1.0

    has_trace = "mean_energy" in run.tables
    fig, axes = plt.subplots(1, 2 if has_trace else 1, squeeze=False)
    ax = axes[0, 0]
    ax.bar(centers, hist["density_per_K"], width=0.9 * width,
           color="tab:orange", label="simulated")
    grid = np.linspace(0.0, float(centers[-1] + width), 400)
    label = f"MB fit: n={n_dof:g}, T={temp:.0f} K"
    ax.plot(grid, _maxwell_boltzmann(grid, n_dof, temp), color="tab:blue",
            label=label)
    ax.axvline(mean, color="k", linestyle=":", linewidth=0.8,
               label=f"mean {mean:.0f} K")
    ax.set_xlabel("energy (K)")
    ax.set_ylabel("probability density (1/K)")
    ax.set_title(f"{run.scenario}: energy distribution")
    ax.legend()

    if has_trace:
        trace = run.table("mean_energy")
        ax2 = axes[0, 1]
        ax2.plot(trace["t_s"] * 1e3, trace["mean_energy_K"], color="tab:blue")
        ax2.set_xlabel("t (ms)")
        ax2.set_ylabel("ensemble mean energy (K)")
        ax2.set_title("cooling transient")
    fig.tight_layout()
    return fig


def render_staged(run: RunData) -> plt.Figure:
    """Single-trajectory energy under the staged gain schedule."""
    trace = run.table("energy_trace")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.semilogy(trace["t_s"] * 1e3, trace["energy_K"], color="tab:blue")
    schedule = run.manifest.get("schedule", [])
    for t_start, chi in schedule:
        ax.axvline(float(t_start) * 1e3, color="tab:red", linestyle="--",
                   linewidth=0.8)
        ax.annotate(f"$\\chi$={chi:.0e}", (float(t_start) * 1e3, 1.0),
                    rotation=90, fontsize=7, ha="right", va="bottom")
    final = run.manifest.get("final_energy_K")
    title = f"{run.scenario}: staged-gain cooling"
    if final is not None:
        title += f" (final {final:.2e} K)"
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("energy (K)")
    ax.set_title(title)
    fig.tight_layout()
    return fig


def render_sweep(run: RunData) -> plt.Figure:
    """Final mean energy versus trap ellipticity angle."""
    sweep = run.table("theta_sweep")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.errorbar(sweep["theta_rad"], sweep["mean_energy_K"],
                yerr=sweep["sem_K"], fmt="o-", color="tab:blue",
                capsize=3)
    ax.set_yscale("log")
    ax.set_xlabel("$\\theta$ (rad)")
    ax.set_ylabel("final mean energy (K)")
    ax.set_title(f"{run.scenario}: cooling floor vs ellipticity")
    fig.tight_layout()
    return fig


def render_psd_pair(run: RunData) -> plt.Figure:
    """p45 spectra before and after cooling with mode-frequency markers."""
    before = run.table("psd_before")
    after = run.table("psd_after")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogy(before["omega_rad_s"], before["psd"], color="tab:blue",
                linewidth=0.6, label="before cooling")
    ax.semilogy(after["omega_rad_s"], after["psd"], color="tab:orange",
                linewidth=0.6, label="after cooling")
    _mark_modes(ax, run)
    omega_trap = float(run.manifest["derived"]["omega_rad_s"])
    ax.set_xlim(0.0, 1.6 * omega_trap)
    ax.set_xlabel("$\\omega$ (rad/s)")
    ax.set_ylabel("PSD of $p_{45}$ signal")
    ax.set_title(f"{run.scenario}: spectrum before/after cooling")
    ax.legend()
    fig.tight_layout()
    return fig


RENDERERS: dict[str, Callable[[RunData], plt.Figure]] = {
    "fig2a": render_tip,
    "fig2b": render_tip,
    "fig3b": render_histogram,
    "fig3c": render_histogram,
    "fig3d": render_histogram,
    "fig4a": render_staged,
    "fig4b": render_sweep,
    "fig5a": render_psd_pair,
    "fig5b": render_psd_pair,
}


def render_run(run: RunData) -> list[str]:
    """Draw the figure for one verified run; writes PNG and SVG beside
    the manifest.  Returns the written file names."""
    if run.scenario not in RENDERERS:
        raise RenderError(
            f"{run.directory}: no renderer for scenario {run.scenario!r}"
        )
    with plt.rc_context(_STYLE):
        fig = RENDERERS[run.scenario](run)
        written = []
        try:
            for ext in ("png", "svg"):
                path = run.directory / f"{run.scenario}.{ext}"
                fig.savefig(path, metadata={"Date": None} if ext == "svg" else None)
                written.append(path.name)
        finally:
            plt.close(fig)
    return written
