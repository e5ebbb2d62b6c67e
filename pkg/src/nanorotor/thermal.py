"""Thermal (Boltzmann) initial conditions at temperature T.

Body-frame angular rates are Gaussian with variance k_B T / I_j per
component; the orientation (alpha, beta) is rejection-sampled from the
Boltzmann weight of the trapping potential (with the sin(beta) sphere
measure, see ThermalConfig.literal_boltzmann), and gamma is uniform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import k as BOLTZMANN

from .errors import RejectionCapExceeded, ValidationError
from .params import ParticleParams, TrapParams
from .rigidbody import EulerState

# Proposal windows are truncated at this many thermal widths around the two
# potential minima; the excluded tail mass is below exp(-WINDOW_SIGMAS^2/2).
WINDOW_SIGMAS = 8.0


@dataclass(frozen=True)
class ThermalConfig:
    temperature: float = 300.0   # K
    seed: int = 0
    rejection_cap: int = 100_000  # proposals per accepted sample
    # When True, sample exactly exp(-(U - U_min)/kT) over (alpha, beta)
    # without the sin(beta) Jacobian (the literal flat-measure reading).
    literal_boltzmann: bool = False
    # When True, propose uniformly over the full (alpha, beta) domain
    # instead of thermally sized windows around the minima.
    full_domain_proposal: bool = False

    def __post_init__(self) -> None:
        if self.temperature <= 0.0:
            raise ValidationError("temperature must be positive")


def sample_angular_velocities(
    rng: np.random.Generator, particle: ParticleParams, temperature: float, n: int = 1
) -> np.ndarray:
    """Thermal body-frame rates, shape (n, 3); omega_i = sqrt(kT/I_j) dW."""
    kt = BOLTZMANN * temperature
    sig = np.array(
        [
            math.sqrt(kt / particle.inertia_x),
            math.sqrt(kt / particle.inertia_x),
            math.sqrt(kt / particle.inertia_z),
        ]
    )
    return rng.standard_normal((n, 3)) * sig


def _boltzmann_weight(
    alpha: np.ndarray,
    beta: np.ndarray,
    trap: TrapParams,
    particle: ParticleParams,
    temperature: float,
) -> np.ndarray:
    """exp(-(U - U_min)/kT), vectorized over orientation arrays."""
    dalpha = particle.alpha_z - particle.alpha_x
    e2q = trap.field_amp**2 / 4.0
    ct2 = math.cos(trap.theta) ** 2
    c2t = math.cos(2.0 * trap.theta)
    du = e2q * dalpha * (
        ct2 * np.cos(beta) ** 2 + c2t * np.sin(beta) ** 2 * np.sin(alpha) ** 2
    )
    return np.exp(-du / (BOLTZMANN * temperature))


def _proposal_half_width(
    trap: TrapParams, particle: ParticleParams, temperature: float
) -> float:
    """Thermal window half-width around each minimum, capped at pi/2."""
    sigma = math.sqrt(
        BOLTZMANN * temperature / (particle.inertia_x * trap.omega_xi2)
    )
    return min(math.pi / 2.0, WINDOW_SIGMAS * sigma)


def sample_orientation(
    rng: np.random.Generator,
    trap: TrapParams,
    particle: ParticleParams,
    cfg: ThermalConfig,
    n: int = 1,
) -> tuple[np.ndarray, float]:
    """Rejection-sample n orientations (alpha, beta, gamma).

    Returns (samples (n, 3), acceptance_rate).  The density over
    (alpha, beta) is sin(beta) exp(-(U - U_min)/kT) (Jacobian dropped when
    cfg.literal_boltzmann); gamma is uniform on [0, 2 pi).
    """
    if cfg.full_domain_proposal:
        half = math.pi / 2.0
    else:
        half = _proposal_half_width(trap, particle, cfg.temperature)
    out = np.empty((n, 3))
    filled = 0
    proposed = 0
    budget = cfg.rejection_cap * n
    while filled < n:
        batch = max(1024, 4 * (n - filled))
        if proposed > budget:
            raise RejectionCapExceeded(
                f"acceptance rate {filled / max(proposed, 1):.2e} too low after "
                f"{proposed} proposals"
            )
        proposed += batch
        # alpha near 0 or pi with equal probability, beta near pi/2
        center = rng.integers(0, 2, size=batch) * math.pi
        alpha = center + rng.uniform(-half, half, size=batch)
        beta = math.pi / 2.0 + rng.uniform(-half, half, size=batch)
        w = _boltzmann_weight(alpha, beta, trap, particle, cfg.temperature)
        if not cfg.literal_boltzmann:
            w = w * np.sin(beta)
        keep = rng.uniform(0.0, 1.0, size=batch) < w
        accepted = np.count_nonzero(keep)
        take = min(accepted, n - filled)
        out[filled : filled + take, 0] = np.mod(alpha[keep][:take], 2.0 * math.pi)
        out[filled : filled + take, 1] = beta[keep][:take]
        filled += take
    out[:, 2] = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return out, filled / proposed


def sample_state(
    rng: np.random.Generator,
    trap: TrapParams,
    particle: ParticleParams,
    cfg: ThermalConfig,
) -> EulerState:
    """Draw one thermal EulerState (orientation + rates)."""
    (orient,), _ = sample_orientation(rng, trap, particle, cfg, n=1)
    alpha, beta, gamma = orient
    (w,) = sample_angular_velocities(rng, particle, cfg.temperature, n=1)
    return _assemble_state(alpha, beta, gamma, w)


def _assemble_state(
    alpha: float, beta: float, gamma: float, w_body: np.ndarray
) -> EulerState:
    """Convert body-frame rates to (alpha_dot, beta_dot, omega3) at an orientation."""
    w1, w2, w3 = w_body
    sg, cg = math.sin(gamma), math.cos(gamma)
    sb = math.sin(beta)
    beta_dot = w1 * sg + w2 * cg
    alpha_dot = (w2 * sg - w1 * cg) / sb
    return EulerState(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        alpha_dot=alpha_dot,
        beta_dot=beta_dot,
        omega3=float(w3),
    )


def sample_ensemble(
    trap: TrapParams,
    particle: ParticleParams,
    cfg: ThermalConfig,
    n: int,
) -> list[EulerState]:
    """n independent thermal states; stream i derives from (seed, i)."""
    return [
        sample_state(trajectory_rng(cfg.seed, i), trap, particle, cfg)
        for i in range(n)
    ]


def trajectory_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Per-trajectory RNG, order-independent and reproducible."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, index, stream)))


def trajectory_noise_seed(master_seed: int, index: int) -> int:
    """32-bit seed for the compiled kernel's in-loop noise stream."""
    return int(
        np.random.SeedSequence((master_seed, index, 1)).generate_state(1, np.uint32)[0]
    )
