"""Adaptive RK4 integration with step-doubling error control.

The integrator drives an arbitrary RHS callable; feedback modulation and
stochastic kicks enter as hooks invoked between accepted steps (operator
splitting, with the feedback signal held constant over one step).  Output
is sampled on a uniform grid decoupled from the internal step size via
cubic Hermite interpolation (locally fourth order).

For the large Monte-Carlo ensembles use the compiled kernels in
`nanorotor.fastsim`; this module is the reference implementation and the
one exercised by the conservation oracles.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import StepUnderflow, SingularityGuard, ValidationError

SAFETY = 0.9
GROW_LIMIT = 5.0
SHRINK_LIMIT = 0.1


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12     # rad / rad/s scale floor
    dt_init: float = 1e-9
    dt_min: float = 1e-16
    dt_max: float = 1e-7
    max_steps: int = 500_000_000

    def __post_init__(self) -> None:
        if not (self.dt_min < self.dt_init < self.dt_max):
            raise ValidationError("require dt_min < dt_init < dt_max")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValidationError("tolerances must be positive")


def rk4_step(y: np.ndarray, t: float, dt: float, rhs: Callable) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_adaptive(
    y: np.ndarray,
    t: float,
    rhs: Callable,
    cfg: IntegratorConfig,
    dt: float,
) -> tuple[np.ndarray, float, float, float]:
    """One accepted RK4 step with step-doubling error control.

    Compares a full step against two half steps; accepts when the
    Richardson error estimate (discrepancy / 15) is below tolerance and
    adjusts dt by the standard 1/5-power rule.  Returns
    (y_new, dt_used, dt_next, error_ratio).
    """
    dt = min(max(dt, cfg.dt_min), cfg.dt_max)
    while True:
        y_full = rk4_step(y, t, dt, rhs)
        y_half = rk4_step(y, t, 0.5 * dt, rhs)
        y_two = rk4_step(y_half, t + 0.5 * dt, 0.5 * dt, rhs)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_two))
        err = float(np.max(np.abs(y_two - y_full) / scale)) / 15.0
        if err <= 1.0:
            if err > 0.0:
                factor = min(GROW_LIMIT, SAFETY * err ** (-0.2))
            else:
                factor = GROW_LIMIT
            dt_next = min(max(dt * factor, cfg.dt_min), cfg.dt_max)
            return y_two, dt, dt_next, err
        factor = max(SHRINK_LIMIT, SAFETY * err ** (-0.2))
        dt_new = dt * factor
        if dt_new < cfg.dt_min:
            raise StepUnderflow(
                f"required dt = {dt_new:.3e} s below dt_min at t = {t:.6e} s"
            )
        dt = dt_new


@dataclass
class TrajectoryRecord:
    """Uniformly sampled trajectory with conserved-quantity monitors."""

    t: np.ndarray                      # sample times, s
    states: np.ndarray                 # (n, k) sampled state vectors
    omega3: np.ndarray                 # spin rate at each sample, rad/s
    energy_kelvin: np.ndarray          # shifted energy, K
    monitors: dict[str, np.ndarray] = field(default_factory=dict)
    termination: str = "completed"
    state_columns: tuple[str, ...] = ("alpha", "beta", "gamma", "alpha_dot", "beta_dot")

    def __post_init__(self) -> None:
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0.0):
            raise ValidationError("sample times must be strictly increasing")

    @property
    def final_energy_kelvin(self) -> float:
        return float(self.energy_kelvin[-1])

    def to_csv(self, path_or_buf) -> None:
        """RFC-4180 CSV: t, state columns, omega3, eps_K, monitor columns."""
        cols = ["t", *self.state_columns, "omega3", "eps_K", *sorted(self.monitors)]
        data = np.column_stack(
            [self.t, self.states, self.omega3, self.energy_kelvin]
            + [self.monitors[k] for k in sorted(self.monitors)]
        )
        header = ",".join(cols)
        if isinstance(path_or_buf, (str,)):
            with open(path_or_buf, "w", newline="") as fh:
                self._write(fh, header, data)
        else:
            self._write(path_or_buf, header, data)

    @staticmethod
    def _write(fh: io.TextIOBase, header: str, data: np.ndarray) -> None:
        fh.write(header + "\r\n")
        for row in data:
            fh.write(",".join(repr(v) for v in row) + "\r\n")

    def to_npz(self, path: str) -> None:
        np.savez_compressed(
            path,
            t=self.t,
            states=self.states,
            omega3=self.omega3,
            energy_kelvin=self.energy_kelvin,
            termination=np.array(self.termination),
            **{f"monitor_{k}": v for k, v in self.monitors.items()},
        )

    @classmethod
    def from_npz(cls, path: str) -> "TrajectoryRecord":
        with np.load(path) as data:
            monitors = {
                k[len("monitor_"):]: data[k] for k in data.files if k.startswith("monitor_")
            }
            return cls(
                t=data["t"],
                states=data["states"],
                omega3=data["omega3"],
                energy_kelvin=data["energy_kelvin"],
                monitors=monitors,
                termination=str(data["termination"]),
            )


def hermite_interp(
    t0: float, y0: np.ndarray, f0: np.ndarray,
    t1: float, y1: np.ndarray, f1: np.ndarray,
    t: float,
) -> np.ndarray:
    """Cubic Hermite interpolant between accepted steps (O(dt^4) accurate)."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass
class System:
    """RHS plus optional per-step hooks and per-sample monitors.

    rhs(t, y, aux) -> dy/dt, where aux is the mutable auxiliary state
    (e.g. omega3) owned by the hooks.  pre_step computes quantities held
    constant over the step (feedback modulation); post_step applies
    stochastic updates over the accepted dt and may modify y and aux.
    monitors maps names to functions (t, y, aux) -> float.
    """

    rhs: Callable
    pre_step: Callable | None = None
    post_step: Callable | None = None
    monitors: dict[str, Callable] = field(default_factory=dict)
    energy: Callable | None = None   # (t, y, aux) -> shifted energy in K
    aux: dict = field(default_factory=dict)


def integrate(
    y0: np.ndarray,
    system: System,
    t0: float,
    t_end: float,
    cfg: IntegratorConfig,
    dt_out: float,
) -> TrajectoryRecord:
    """Drive step_adaptive from t0 to t_end with uniform output sampling."""
    if t_end < t0:
        raise ValidationError("t_end must be >= t0")
    n_out = int(np.floor((t_end - t0) / dt_out + 1e-9)) + 1 if t_end > t0 else 1
    t_out = t0 + dt_out * np.arange(n_out)
    y = np.array(y0, dtype=float)
    aux = system.aux

    states = np.empty((n_out, y.size))
    omega3_out = np.empty(n_out)
    energy_out = np.empty(n_out)
    monitor_out = {k: np.empty(n_out) for k in system.monitors}

    def record(idx: int, t: float, yv: np.ndarray) -> None:
        states[idx] = yv
        omega3_out[idx] = aux.get("omega3", 0.0)
        energy_out[idx] = system.energy(t, yv, aux) if system.energy else np.nan
        for k, fn in system.monitors.items():
            monitor_out[k][idx] = fn(t, yv, aux)

    record(0, t0, y)
    idx = 1
    termination = "completed"
    t = t0
    dt = cfg.dt_init
    steps = 0
    try:
        while idx < n_out and steps < cfg.max_steps:
            if system.pre_step is not None:
                system.pre_step(t, y, aux)

            def rhs(tt, yy):
                return system.rhs(tt, yy, aux)

            f0 = rhs(t, y)
            target = t_out[-1]
            dt = min(dt, target - t)
            y_new, dt_used, dt, _ = step_adaptive(y, t, rhs, cfg, dt)
            t_new = t + dt_used
            f1 = rhs(t_new, y_new)
            while idx < n_out and t_out[idx] <= t_new + 1e-15 * max(1.0, abs(t_new)):
                ts = min(t_out[idx], t_new)
                record(idx, ts, hermite_interp(t, y, f0, t_new, y_new, f1, ts))
                idx += 1
            if system.post_step is not None:
                system.post_step(t_new, y_new, dt_used, aux)
            y, t = y_new, t_new
            steps += 1
        if idx < n_out:
            termination = "max_steps"
    except (SingularityGuard, StepUnderflow) as exc:
        termination = f"{type(exc).__name__}: {exc}"
    n = idx
    return TrajectoryRecord(
        t=t_out[:n],
        states=states[:n],
        omega3=omega3_out[:n],
        energy_kelvin=energy_out[:n],
        monitors={k: v[:n] for k, v in monitor_out.items()},
        termination=termination,
    )
