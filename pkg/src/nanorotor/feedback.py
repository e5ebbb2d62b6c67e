"""Parametric feedback: measured signal q*qdot, modulation and schedules.

The trap power is modulated by the factor 1 + chi R^2 q qdot, where q is
the fed-back coordinate.  Measurements are idealized (exact state-derived
signals, zero latency); q is the folded tip coordinate so particles
trapped near alpha = pi are cooled identically to those near alpha = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .params import ParticleParams, TrapParams
from .rigidbody import EulerState, fold_alpha

SIGNAL_CHOICES = ("off", "xi", "eta", "sum", "pypydot")

# Fig. 4(a) staging: chi = 1e7 from t = 0, then x10 every 1 ms starting at
# t = 3 ms, ending at 1e12.
STAGED_CHI_SCHEDULE = tuple((3e-3 + 1e-3 * k, 10.0 ** (8 + k)) for k in range(5))


@dataclass(frozen=True)
class FeedbackConfig:
    signal_choice: str = "sum"
    chi: float = 1e7                     # cooling strength, s/m^2
    schedule: tuple[tuple[float, float], ...] = ()  # (t_start, absolute chi)
    measurement_noise_rms: float = 0.0   # additive noise on q qdot, 1/s

    def __post_init__(self) -> None:
        if self.signal_choice not in SIGNAL_CHOICES:
            raise ValidationError(f"unknown signal_choice {self.signal_choice!r}")
        if self.chi < 0.0:
            raise ValidationError("chi must be >= 0")
        times = [t for t, _ in self.schedule]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValidationError("schedule times must be strictly increasing")
        if any(c < 0.0 for _, c in self.schedule):
            raise ValidationError("scheduled chi values must be >= 0")


def staged_chi_config(signal_choice: str = "sum") -> FeedbackConfig:
    """The staged cooling-strength protocol (1e7 -> 1e12, x10 per ms)."""
    return FeedbackConfig(signal_choice=signal_choice, chi=1e7, schedule=STAGED_CHI_SCHEDULE)


def chi_at(t: float, cfg: FeedbackConfig) -> float:
    """Piecewise-constant cooling strength at time t."""
    chi = cfg.chi
    for t_start, value in cfg.schedule:
        if t >= t_start:
            chi = value
        else:
            break
    return chi


def feedback_signal(
    s: EulerState,
    trap: TrapParams,
    particle: ParticleParams,
    choice: str,
) -> float:
    """The fed-back product q*qdot, 1/s.

    'xi'/'eta'/'sum' use the exact folded tip coordinates and their time
    derivatives; 'pypydot' uses the detector observable p_y pdot_y rescaled
    by ((alpha_z - alpha_x) E0)^-2 so that it is dimensionally identical to
    xi*xidot (p_y is proportional to xi at small angles).
    """
    if choice == "off":
        return 0.0
    xi = fold_alpha(s.alpha)
    eta = math.pi / 2.0 - s.beta
    xi_dot = s.alpha_dot
    eta_dot = -s.beta_dot
    if choice == "xi":
        return xi * xi_dot
    if choice == "eta":
        return eta * eta_dot
    if choice == "sum":
        return xi * xi_dot + eta * eta_dot
    if choice == "pypydot":
        # p_y / (dalpha E0) = sin^2(beta) cos(alpha) sin(alpha)
        sb, cb = math.sin(s.beta), math.cos(s.beta)
        sa, ca = math.sin(s.alpha), math.cos(s.alpha)
        p = sb * sb * ca * sa
        p_dot = (
            2.0 * sb * cb * s.beta_dot * ca * sa
            + sb * sb * math.cos(2.0 * s.alpha) * s.alpha_dot
        )
        return p * p_dot
    raise ValidationError(f"unknown signal_choice {choice!r}")


def modulation(qqdot: float, chi: float, radius: float) -> float:
    """Trap modulation factor 1 + chi R^2 q qdot (dimensionless)."""
    return 1.0 + chi * radius * radius * qqdot


def feedback_modulation(
    s: EulerState,
    trap: TrapParams,
    particle: ParticleParams,
    cfg: FeedbackConfig,
    rng=None,
) -> float:
    """Modulation factor at the current state and time."""
    qqdot = feedback_signal(s, trap, particle, cfg.signal_choice)
    if cfg.measurement_noise_rms > 0.0 and rng is not None:
        qqdot += cfg.measurement_noise_rms * rng.standard_normal()
    return modulation(qqdot, chi_at(s.t, cfg), particle.radius)
