"""Monte-Carlo ensembles of feedback-cooled trajectories.

An experiment draws N thermal initial conditions (independent,
reproducible per-index streams), integrates each with the compiled
kernel, and reduces the sampled states to rotational energies and
distribution fits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import k as BOLTZMANN
from scipy.special import gammaln

from .errors import FitDegenerate, InsufficientData
from .fastsim import KernelSpec, integrate_fast, make_kernel_spec, STATUS_OK
from .feedback import FeedbackConfig
from .integrator import IntegratorConfig
from .noise import NoiseConfig
from .params import ParticleParams, TrapParams, default_setup
from .thermal import (
    ThermalConfig,
    sample_state,
    trajectory_noise_seed,
    trajectory_rng,
)

# Ensemble-grade integrator tolerances: much looser than the defaults used
# for conservation audits, chosen so that energy drift without feedback
# stays far below the thermal spread over 80 ms.
ENSEMBLE_TOLERANCES = IntegratorConfig(rel_tol=1e-7, abs_tol=1e-9, dt_max=5e-7)


def shifted_energy_kelvin_series(
    samples: np.ndarray, particle: ParticleParams, trap: TrapParams
) -> np.ndarray:
    """Rotational energy above the potential floor, in kelvin, vectorized.

    samples[..., :] = (alpha, beta, gamma, alpha_dot, beta_dot, omega3).
    The spin energy about the symmetry axis is excluded: it is a free
    rotation, not part of the librational energy budget.
    """
    a = samples[..., 0]
    b = samples[..., 1]
    ad = samples[..., 3]
    bd = samples[..., 4]
    sb = np.sin(b)
    cb = np.cos(b)
    sa2 = np.sin(a) ** 2
    kin = 0.5 * particle.inertia_x * (bd**2 + ad**2 * sb**2)
    uq = trap.field_amp**2 / 4.0 * (particle.alpha_z - particle.alpha_x)
    ct2 = math.cos(trap.theta) ** 2
    c2t = math.cos(2.0 * trap.theta)
    pot = uq * (ct2 * cb**2 + c2t * sb**2 * sa2)
    return (kin + pot) / BOLTZMANN


@dataclass(frozen=True)
class ExperimentConfig:
    particle: ParticleParams
    trap: TrapParams
    thermal: ThermalConfig
    feedback: FeedbackConfig | None = None
    noise: NoiseConfig | None = None
    integ: IntegratorConfig = ENSEMBLE_TOLERANCES
    method: str = "dopri5"
    n_trajectories: int = 100
    t_final: float = 80e-3
    n_samples: int = 801

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_samples)


@dataclass
class EnsembleResult:
    times: np.ndarray                 # (n_out,)
    energies: np.ndarray              # (n_traj, n_out) in kelvin
    statuses: np.ndarray              # (n_traj,) kernel status codes
    states: np.ndarray | None = None  # (n_traj, n_out, 6) if collected
    initial_energies: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n_ok(self) -> int:
        return int(np.count_nonzero(self.statuses == STATUS_OK))

    def mean_energy(self) -> np.ndarray:
        """Ensemble-mean energy trace over completed trajectories."""
        ok = self.statuses == STATUS_OK
        return self.energies[ok].mean(axis=0)

    def final_energies(self) -> np.ndarray:
        ok = self.statuses == STATUS_OK
        return self.energies[ok, -1]

    def final_mean_sem(self) -> tuple[float, float]:
        e = self.final_energies()
        return float(e.mean()), float(e.std(ddof=1) / math.sqrt(e.size))


def run_one(
    index: int,
    cfg: ExperimentConfig,
    spec: KernelSpec,
    t_out: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Integrate trajectory `index` of the experiment."""
    rng = trajectory_rng(cfg.thermal.seed, index)
    s0 = sample_state(rng, cfg.trap, cfg.particle, cfg.thermal)
    seed = trajectory_noise_seed(cfg.thermal.seed, index) if spec.noise_on else 0
    out, status, _ = integrate_fast(s0.as_vector(), s0.omega3, 0.0, t_out, spec, seed)
    if out.shape[0] < t_out.size:
        pad = np.full((t_out.size - out.shape[0], 6), np.nan)
        out = np.vstack([out, pad])
    return out, status


def run_experiment(
    cfg: ExperimentConfig,
    sample_times: np.ndarray | None = None,
    collect_states: bool = False,
    progress: bool = False,
) -> EnsembleResult:
    """Run the full ensemble sequentially (single-core friendly)."""
    t_out = cfg.sample_times() if sample_times is None else np.asarray(sample_times)
    spec = make_kernel_spec(
        cfg.particle, cfg.trap, cfg.feedback, cfg.noise, cfg.integ, cfg.method
    )
    n = cfg.n_trajectories
    energies = np.full((n, t_out.size), np.nan)
    statuses = np.empty(n, dtype=np.int64)
    states = np.full((n, t_out.size, 6), np.nan) if collect_states else None
    for i in range(n):
        out, status = run_one(i, cfg, spec, t_out)
        statuses[i] = status
        energies[i] = shifted_energy_kelvin_series(out, cfg.particle, cfg.trap)
        if states is not None:
            states[i] = out
        if progress and (i + 1) % max(1, n // 20) == 0:
            print(f"  trajectory {i + 1}/{n}", flush=True)
    return EnsembleResult(
        times=t_out,
        energies=energies,
        statuses=statuses,
        states=states,
        initial_energies=energies[:, 0].copy(),
    )


@dataclass(frozen=True)
class DistributionFit:
    """Fit of p(E) = E^n exp(-E/T) / (Gamma(n+1) T^(n+1)) to an energy sample."""

    n_dof: float          # the fixed shape exponent n
    temperature: float    # kelvin, maximum-likelihood scale
    residual: float       # rms histogram mismatch, relative to the peak density
    log_likelihood: float


def fit_energy_distribution(
    energies: np.ndarray, n_dof: float, bins: int = 40
) -> DistributionFit:
    """Maximum-likelihood scale fit with a fixed shape exponent.

    For p(E) ~ E^n exp(-E/T) the ML estimate is T = mean(E) / (n + 1).
    The residual compares a density histogram against the model curve so
    that competing shape exponents can be ranked on the same sample.
    """
    e = np.asarray(energies, dtype=float)
    e = e[np.isfinite(e)]
    if e.size < 10:
        raise InsufficientData("need at least 10 energies for a distribution fit")
    if np.any(e < 0.0):
        raise FitDegenerate("negative energies in distribution fit")
    mean = float(e.mean())
    if mean <= 0.0:
        raise FitDegenerate("energy sample has non-positive mean")
    temp = mean / (n_dof + 1.0)
    with np.errstate(divide="ignore"):
        log_e = np.where(e > 0.0, np.log(np.maximum(e, 1e-300)), -690.0)
    loglik = float(
        np.sum(n_dof * log_e - e / temp)
        - e.size * (gammaln(n_dof + 1.0) + (n_dof + 1.0) * math.log(temp))
    )
    hist, edges = np.histogram(e, bins=bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    model = np.exp(
        n_dof * np.log(np.maximum(centers, 1e-300))
        - centers / temp
        - gammaln(n_dof + 1.0)
        - (n_dof + 1.0) * math.log(temp)
    )
    scale = max(model.max(), hist.max())
    residual = float(np.sqrt(np.mean((hist - model) ** 2)) / scale)
    return DistributionFit(
        n_dof=n_dof, temperature=temp, residual=residual, log_likelihood=loglik
    )


def fit_maxwell_boltzmann(
    energies: np.ndarray, n_dof: float | str = 0, bins: int = 40
) -> tuple[float, float, float]:
    """Fit D(E) = A E^n exp(-E/T); returns (A, T, residual).

    n_dof may be a fixed exponent or "free", in which case n is found by
    maximizing the likelihood over n >= 0 (T profiled out in closed form).
    """
    e = np.asarray(energies, dtype=float)
    e = e[np.isfinite(e)]
    if e.size >= 2 and float(e.std()) < 1e-12 * max(abs(float(e.mean())), 1e-300):
        raise FitDegenerate("energy sample has near-zero variance")
    if n_dof == "free":
        from scipy.optimize import minimize_scalar

        def neg_loglik(n: float) -> float:
            return -fit_energy_distribution(e, max(n, 0.0), bins).log_likelihood

        opt = minimize_scalar(neg_loglik, bounds=(0.0, 10.0), method="bounded")
        n_best = float(max(opt.x, 0.0))
        fit = fit_energy_distribution(e, n_best, bins)
    else:
        fit = fit_energy_distribution(e, float(n_dof), bins)
    amp = math.exp(-gammaln(fit.n_dof + 1.0)) / fit.temperature ** (fit.n_dof + 1.0)
    return amp, fit.temperature, fit.residual


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregate statistics of an ensemble's final energies."""

    final_energies: np.ndarray
    mean: float
    sem: float
    bin_edges: np.ndarray
    density: np.ndarray       # normalized so the integral over E is 1
    fit_n_dof: float
    fit_temperature: float
    fit_residual: float
    n_failed: int

    def density_normalization(self) -> float:
        return float(np.sum(self.density * np.diff(self.bin_edges)))


def ensemble_stats(
    result: EnsembleResult, n_dof: float | str = 0, bins: int = 40
) -> EnsembleStats:
    e = result.final_energies()
    mean, sem = result.final_mean_sem()
    density, edges = np.histogram(e, bins=bins, density=True)
    _, temp, residual = fit_maxwell_boltzmann(e, n_dof, bins)
    n = _free_exponent(e, bins) if n_dof == "free" else float(n_dof)
    return EnsembleStats(
        final_energies=e,
        mean=mean,
        sem=sem,
        bin_edges=edges,
        density=density,
        fit_n_dof=float(n),
        fit_temperature=temp,
        fit_residual=residual,
        n_failed=int(result.statuses.size - result.n_ok),
    )


def _free_exponent(e: np.ndarray, bins: int) -> float:
    from scipy.optimize import minimize_scalar

    opt = minimize_scalar(
        lambda n: -fit_energy_distribution(e, max(n, 0.0), bins).log_likelihood,
        bounds=(0.0, 10.0),
        method="bounded",
    )
    return float(max(opt.x, 0.0))


def validate_initial_ensemble(
    result: EnsembleResult,
    bath_temperature: float,
    mean_tol: float = 0.05,
    residual_tol: float = 0.15,
) -> None:
    """Check the t=0 sample against the expected thermal distribution.

    With two librational position DOF and two velocity DOF, the mean
    shifted energy is 2 k_B T_bath, and the energies follow E exp(-E/T).
    The mean check allows the larger of ``mean_tol`` and four standard
    errors, so small ensembles are not failed on ordinary sampling noise.
    Raises ValidationError if the draw is inconsistent.
    """
    from .errors import ValidationError

    e0 = result.initial_energies
    e0 = e0[np.isfinite(e0)]
    mean = float(e0.mean())
    target = 2.0 * bath_temperature
    sem = float(e0.std(ddof=1) / math.sqrt(e0.size))
    tol = max(mean_tol * target, 4.0 * sem)
    if abs(mean - target) > tol:
        raise ValidationError(
            f"initial ensemble mean {mean:.4g} K outside {tol:.3g} K "
            f"of {target:.4g} K"
        )
    fit = fit_energy_distribution(e0, 1.0)
    if fit.residual > residual_tol:
        raise ValidationError(
            f"initial ensemble poorly described by an n=1 thermal "
            f"distribution (residual {fit.residual:.3f})"
        )


def staged_chi_run(
    cfg: ExperimentConfig,
    index: int = 0,
    sample_times: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Single-trajectory run intended for a staged cooling-strength schedule.

    Returns (times, energies_kelvin, status).
    """
    t_out = cfg.sample_times() if sample_times is None else np.asarray(sample_times)
    spec = make_kernel_spec(
        cfg.particle, cfg.trap, cfg.feedback, cfg.noise, cfg.integ, cfg.method
    )
    out, status = run_one(index, cfg, spec, t_out)
    return t_out, shifted_energy_kelvin_series(out, cfg.particle, cfg.trap), status


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    mean_energy: float
    sem: float
    n_ok: int


def theta_sweep(
    thetas: np.ndarray,
    base: ExperimentConfig,
    progress: bool = False,
) -> list[SweepPoint]:
    """Repeat an experiment across ellipticity angles.

    Each angle reuses the same master seed, so point-to-point scatter
    reflects the physics rather than fresh sampling noise.
    """
    points = []
    for theta in np.asarray(thetas, dtype=float):
        cfg = ExperimentConfig(
            particle=base.particle,
            trap=base.trap.with_theta(theta),
            thermal=base.thermal,
            feedback=base.feedback,
            noise=base.noise,
            integ=base.integ,
            method=base.method,
            n_trajectories=base.n_trajectories,
            t_final=base.t_final,
            n_samples=base.n_samples,
        )
        res = run_experiment(cfg, progress=False)
        mean, sem = res.final_mean_sem()
        points.append(SweepPoint(float(theta), mean, sem, res.n_ok))
        if progress:
            print(f"  theta={theta:.5f}: {mean:.3g} K +- {sem:.2g} K", flush=True)
    return points


def default_experiment(
    theta: float = 0.0,
    n_trajectories: int = 100,
    seed: int = 12345,
    signal_choice: str = "sum",
    chi: float = 1e7,
    t_final: float = 80e-3,
) -> ExperimentConfig:
    """Convenience constructor for the standard cooling experiment."""
    particle, trap = default_setup(theta)
    return ExperimentConfig(
        particle=particle,
        trap=trap,
        thermal=ThermalConfig(seed=seed),
        feedback=FeedbackConfig(signal_choice=signal_choice, chi=chi)
        if signal_choice != "off"
        else None,
        n_trajectories=n_trajectories,
        t_final=t_final,
    )
