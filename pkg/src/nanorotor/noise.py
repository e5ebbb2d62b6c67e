"""Gas-collision damping/diffusion and photon shot-noise kicks.

Gas collisions act as Langevin (Ornstein-Uhlenbeck) friction with
fluctuations fixed by the fluctuation-dissipation relation at the gas
temperature, applied between accepted integrator steps with the exact OU
propagator (stable for any Gamma dt).  Shot noise is a generic Poisson
kick model with configurable rate and strength.  Defaults: everything off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import k as BOLTZMANN

from .errors import ValidationError
from .params import ParticleParams
from .rigidbody import EulerState

TORR_TO_PA = 133.322
AIR_MOLECULE_MASS = 4.8e-26  # kg, mean for N2/O2 mixture


@dataclass(frozen=True)
class NoiseConfig:
    pressure: float = 0.0            # Torr; 0 disables gas damping
    gas_temperature: float = 300.0   # K
    gamma_alpha_beta: float | None = None  # 1/s; overrides pressure estimate
    gamma_gamma: float | None = None       # 1/s; spin channel
    shot_rate: float = 0.0           # kicks/s
    shot_kick_rms: float = 0.0       # rad/s per kick, per channel

    def __post_init__(self) -> None:
        if self.pressure < 0.0 or self.shot_rate < 0.0 or self.shot_kick_rms < 0.0:
            raise ValidationError("noise rates must be >= 0")
        if self.gas_temperature <= 0.0:
            raise ValidationError("gas temperature must be positive")

    def resolved_gammas(self, particle: ParticleParams) -> tuple[float, float]:
        g_ab, g_g = damping_from_pressure(self.pressure, particle)
        if self.gamma_alpha_beta is not None:
            g_ab = self.gamma_alpha_beta
        if self.gamma_gamma is not None:
            g_g = self.gamma_gamma
        return g_ab, g_g

    @property
    def any_enabled(self) -> bool:
        return (
            self.pressure > 0.0
            or bool(self.gamma_alpha_beta)
            or bool(self.gamma_gamma)
            or (self.shot_rate > 0.0 and self.shot_kick_rms > 0.0)
        )


def damping_from_pressure(
    pressure_torr: float, particle: ParticleParams
) -> tuple[float, float]:
    """Free-molecular rotational damping rates (Gamma_alphabeta, Gamma_gamma), 1/s.

    Kinetic estimate Gamma ~ rho_gas v_mean R^4 / I: linear in pressure,
    ~3e5 /s at 760 Torr for the default dumbbell (thermalization dominates)
    and ~0.4 /s at 1e-3 Torr (Gamma * 80 ms ~ 0.03, a small perturbation).
    """
    if pressure_torr < 0.0:
        raise ValidationError("pressure must be >= 0")
    if pressure_torr == 0.0:
        return (0.0, 0.0)
    t_gas = 300.0
    rho = pressure_torr * TORR_TO_PA * AIR_MOLECULE_MASS / (BOLTZMANN * t_gas)
    v_mean = math.sqrt(8.0 * BOLTZMANN * t_gas / (math.pi * AIR_MOLECULE_MASS))
    g_transverse = rho * v_mean * particle.radius**4 / particle.inertia_x
    g_spin = rho * v_mean * particle.radius**4 / particle.inertia_z
    return (g_transverse, g_spin)


def ou_update(value: float, gamma: float, sigma_eq: float, dt: float, noise: float) -> float:
    """Exact OU propagator: v e^(-G dt) + sigma sqrt(1 - e^(-2 G dt)) N."""
    if gamma <= 0.0:
        return value
    decay = math.exp(-gamma * dt)
    return value * decay + sigma_eq * math.sqrt(1.0 - decay * decay) * noise


def langevin_update(
    s: EulerState,
    cfg: NoiseConfig,
    particle: ParticleParams,
    dt: float,
    rng: np.random.Generator,
) -> EulerState:
    """OU step for the generalized rates (alpha_dot, beta_dot, omega3) over dt.

    Equipartition targets follow the curvilinear kinetic metric: the
    alpha_dot channel has effective inertia I_x sin^2(beta), beta_dot has
    I_x, and the spin channel I_z.  This is the only operation that
    changes omega3.
    """
    if dt <= 0.0:
        raise ValidationError("dt must be positive")
    g_ab, g_g = cfg.resolved_gammas(particle)
    if g_ab == 0.0 and g_g == 0.0:
        return s
    kt = BOLTZMANN * cfg.gas_temperature
    sb = math.sin(s.beta)
    sig_alpha = math.sqrt(kt / (particle.inertia_x * sb * sb)) if sb != 0.0 else 0.0
    sig_beta = math.sqrt(kt / particle.inertia_x)
    sig_spin = math.sqrt(kt / particle.inertia_z)
    n1, n2, n3 = rng.standard_normal(3)
    return EulerState(
        alpha=s.alpha,
        beta=s.beta,
        gamma=s.gamma,
        alpha_dot=ou_update(s.alpha_dot, g_ab, sig_alpha, dt, n1),
        beta_dot=ou_update(s.beta_dot, g_ab, sig_beta, dt, n2),
        omega3=ou_update(s.omega3, g_g, sig_spin, dt, n3),
        t=s.t,
    )


def shot_noise_update(
    s: EulerState,
    cfg: NoiseConfig,
    dt: float,
    rng: np.random.Generator,
) -> EulerState:
    """Poisson-distributed momentum kicks on (alpha_dot, beta_dot, omega3)."""
    if dt <= 0.0:
        raise ValidationError("dt must be positive")
    if cfg.shot_rate <= 0.0 or cfg.shot_kick_rms <= 0.0:
        return s
    n_kicks = rng.poisson(cfg.shot_rate * dt)
    if n_kicks == 0:
        return s
    scale = cfg.shot_kick_rms * math.sqrt(n_kicks)
    k1, k2, k3 = rng.standard_normal(3) * scale
    return EulerState(
        alpha=s.alpha,
        beta=s.beta,
        gamma=s.gamma,
        alpha_dot=s.alpha_dot + k1,
        beta_dot=s.beta_dot + k2,
        omega3=s.omega3 + k3,
        t=s.t,
    )
