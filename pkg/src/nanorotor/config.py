"""Declarative run configuration: INI files with dotted-key overrides.

Every key has a physically sensible default (the standard silica
nanodumbbell in a 1550 nm tweezer); an empty file is a valid config.
Unknown sections or keys are rejected rather than ignored.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Any

from .ensemble import ENSEMBLE_TOLERANCES, ExperimentConfig
from .errors import ParseError, ValidationError
from .feedback import FeedbackConfig, STAGED_CHI_SCHEDULE
from .integrator import IntegratorConfig
from .noise import NoiseConfig
from .params import OMEGA_CALIBRATION, ParticleParams, TrapParams
from .thermal import ThermalConfig

# (section, key) -> (default, type). Types: float, int, str, bool.
SCHEMA: dict[tuple[str, str], tuple[Any, type]] = {
    ("particle", "radius"): (85e-9, float),
    ("particle", "mass"): (1.029e-17, float),  # total dumbbell mass, kg
    ("particle", "refractive_index"): (1.458, float),
    ("particle", "density"): (2000.0, float),
    ("trap", "wavelength"): (1550e-9, float),
    ("trap", "power"): (0.5, float),
    ("trap", "numerical_aperture"): (0.45, float),
    ("trap", "theta"): (0.0, float),
    ("trap", "omega_target"): (OMEGA_CALIBRATION, float),
    ("feedback", "signal_choice"): ("sum", str),
    ("feedback", "chi"): (1e7, float),
    ("feedback", "staged_schedule"): (False, bool),
    ("noise", "pressure"): (0.0, float),
    ("noise", "gas_temperature"): (300.0, float),
    ("noise", "shot_rate"): (0.0, float),
    ("noise", "shot_kick_rms"): (0.0, float),
    ("integrator", "rel_tol"): (ENSEMBLE_TOLERANCES.rel_tol, float),
    ("integrator", "abs_tol"): (ENSEMBLE_TOLERANCES.abs_tol, float),
    ("integrator", "dt_max"): (ENSEMBLE_TOLERANCES.dt_max, float),
    ("integrator", "method"): ("dopri5", str),
    ("ensemble", "n"): (500, int),
    ("ensemble", "t_final"): (80e-3, float),
    ("ensemble", "n_samples"): (801, int),
    ("ensemble", "seed"): (12345, int),
    ("ensemble", "temperature"): (300.0, float),
    ("output", "sample_dt"): (0.0, float),  # 0 => derive from n_samples
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(section: str, key: str, raw: str) -> Any:
    _, typ = SCHEMA[(section, key)]
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ParseError(f"[{section}] {key} = {raw!r}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Flat, validated key-value view of one run's settings."""

    values: tuple[tuple[tuple[str, str], Any], ...]

    def get(self, section: str, key: str) -> Any:
        for (s, k), v in self.values:
            if s == section and k == key:
                return v
        raise KeyError((section, key))

    def as_dict(self) -> dict[str, dict[str, Any]]:
        out: dict[str, dict[str, Any]] = {}
        for (s, k), v in self.values:
            out.setdefault(s, {})[k] = v
        return out


def default_values() -> dict[tuple[str, str], Any]:
    return {sk: default for sk, (default, _) in SCHEMA.items()}


def parse_config(path: str | None = None) -> RunConfig:
    """Read an INI file (or nothing) onto the defaults; reject unknown keys."""
    values = default_values()
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except FileNotFoundError:
            raise ParseError(f"config file not found: {path}")
        except configparser.Error as exc:
            raise ParseError(f"{path}: {exc}") from exc
        for section in parser.sections():
            for key in parser[section]:
                if (section, key) not in SCHEMA:
                    raise ParseError(f"unknown config key [{section}] {key}")
                values[(section, key)] = _coerce(section, key, parser[section][key])
    return RunConfig(values=tuple(values.items()))


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply dotted-key overrides of the form section.key=value."""
    values = dict(cfg.values)
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override must be section.key=value: {item!r}")
        dotted, raw = item.split("=", 1)
        if "." not in dotted:
            raise ParseError(f"override key needs a section prefix: {dotted!r}")
        section, key = dotted.strip().split(".", 1)
        if (section, key) not in SCHEMA:
            raise ParseError(f"unknown config key [{section}] {key}")
        values[(section, key)] = _coerce(section, key, raw)
    return RunConfig(values=tuple(values.items()))


def build_experiment(cfg: RunConfig) -> ExperimentConfig:
    """Materialize physics objects from a validated RunConfig."""
    g = cfg.get
    radius = g("particle", "radius")
    base = ParticleParams.from_geometry(
        radius=radius,
        refractive_index=g("particle", "refractive_index"),
        density=g("particle", "density"),
    )
    # honor an explicit total mass (the density key only sets a default mass)
    sphere_mass = g("particle", "mass") / 2.0
    particle = ParticleParams(
        radius=radius,
        sphere_mass=sphere_mass,
        refractive_index=base.refractive_index,
        density=g("particle", "density"),
        inertia_x=(14.0 / 5.0) * sphere_mass * radius**2,
        inertia_z=(4.0 / 5.0) * sphere_mass * radius**2,
        alpha_x=base.alpha_x,
        alpha_z=base.alpha_z,
    )
    theta = g("trap", "theta")
    if not 0.0 <= theta < math.pi / 4.0:
        raise ValidationError(
            f"trap.theta = {theta} outside [0, pi/4): the soft-axis "
            "restoring frequency would not be real"
        )
    trap = TrapParams.from_beam(
        particle,
        wavelength=g("trap", "wavelength"),
        power=g("trap", "power"),
        numerical_aperture=g("trap", "numerical_aperture"),
        theta=theta,
        omega_target=g("trap", "omega_target"),
    )
    signal = g("feedback", "signal_choice")
    if signal == "off":
        feedback = None
    elif g("feedback", "staged_schedule"):
        feedback = FeedbackConfig(
            signal_choice=signal, chi=g("feedback", "chi"),
            schedule=STAGED_CHI_SCHEDULE,
        )
    else:
        feedback = FeedbackConfig(signal_choice=signal, chi=g("feedback", "chi"))
    noise = NoiseConfig(
        pressure=g("noise", "pressure"),
        gas_temperature=g("noise", "gas_temperature"),
        shot_rate=g("noise", "shot_rate"),
        shot_kick_rms=g("noise", "shot_kick_rms"),
    )
    integ = IntegratorConfig(
        rel_tol=g("integrator", "rel_tol"),
        abs_tol=g("integrator", "abs_tol"),
        dt_max=g("integrator", "dt_max"),
    )
    t_final = g("ensemble", "t_final")
    sample_dt = g("output", "sample_dt")
    if sample_dt > 0.0:
        n_samples = int(round(t_final / sample_dt)) + 1
    else:
        n_samples = g("ensemble", "n_samples")
    return ExperimentConfig(
        particle=particle,
        trap=trap,
        thermal=ThermalConfig(
            temperature=g("ensemble", "temperature"), seed=g("ensemble", "seed")
        ),
        feedback=feedback,
        noise=noise,
        integ=integ,
        method=g("integrator", "method"),
        n_trajectories=g("ensemble", "n"),
        t_final=t_final,
        n_samples=n_samples,
    )
