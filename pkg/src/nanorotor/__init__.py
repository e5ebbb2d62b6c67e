"""Rigid-body dynamics of an optically trapped nanodumbbell with
parametric feedback cooling of the librational modes."""

from .errors import (
    FitDegenerate,
    InsufficientData,
    InvalidMaterial,
    NanorotorError,
    ParameterOrderViolation,
    ParseError,
    PeaksNotFound,
    RejectionCapExceeded,
    SingularityGuard,
    StepUnderflow,
    UnknownScenario,
    ValidationError,
)
from .params import (
    ParticleParams,
    TrapParams,
    default_setup,
    ellipsoid_polarizabilities,
    field_amplitude,
    prolate_depolarization_factors,
)
from .rigidbody import (
    EulerState,
    SmallAngleState,
    eom_rhs,
    euler_to_small_angle,
    fold_alpha,
    kinetic_energy,
    potential_above_minimum,
    potential_energy,
    potential_gradients,
    shifted_energy_kelvin,
    small_angle_to_euler,
)
from .integrator import IntegratorConfig, System, TrajectoryRecord, integrate
from .modes import (
    ModeDecomposition,
    axial_displacement_ratio,
    conserved_precession_quantity,
    cooling_coefficients,
    cooling_power_elliptical,
    cooling_power_linear,
    coupling_frequency,
    fit_modes,
    normal_modes_elliptical,
    normal_modes_linear,
    radiation_force,
    small_angle_energy,
    small_angle_rhs,
)
from .thermal import ThermalConfig, sample_ensemble, sample_orientation, sample_state
from .feedback import FeedbackConfig, chi_at, feedback_modulation, staged_chi_config
from .noise import NoiseConfig, damping_from_pressure
from .spectral import PsdResult, estimate_psd, find_peaks, p45_series, split_series
from .fastsim import KernelSpec, integrate_fast, make_kernel_spec
from .ensemble import (
    DistributionFit,
    EnsembleResult,
    ExperimentConfig,
    default_experiment,
    fit_energy_distribution,
    run_experiment,
    shifted_energy_kelvin_series,
    theta_sweep,
)

__version__ = "0.1.0"
