"""Particle and trap parameter containers.

All quantities are SI. The default particle is the amorphous silica
nanodumbbell used throughout: two touching spheres of radius 85 nm,
total mass 1.029e-17 kg, n = 1.458, trapped by a 1550 nm, 500 mW beam
focused with NA = 0.45.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import epsilon_0

from .errors import InvalidMaterial, ValidationError

# Calibration target for the librational frequency, rad/s.  The quoted
# occupation-number temperature hbar*w/kB = 16.7 uK pins this value as an
# angular frequency.
OMEGA_CALIBRATION = 2.19e6

DUMBBELL_ASPECT_RATIO = 2.0


def prolate_depolarization_factors(aspect_ratio: float) -> tuple[float, float]:
    """Depolarization factors (L_transverse, L_long) of a prolate spheroid.

    aspect_ratio is the long/short semi-axis ratio (> 1).  The factors obey
    L_x + L_y + L_z = 1 with L_x = L_y = L_transverse.
    """
    if aspect_ratio <= 1.0:
        return (1.0 / 3.0, 1.0 / 3.0)
    e = math.sqrt(1.0 - 1.0 / aspect_ratio**2)
    l_long = (1.0 - e * e) / e**2 * (math.atanh(e) / e - 1.0)
    l_trans = 0.5 * (1.0 - l_long)
    return (l_trans, l_long)


def ellipsoid_polarizabilities(
    radius: float,
    refractive_index: float,
    aspect_ratio: float = DUMBBELL_ASPECT_RATIO,
) -> tuple[float, float]:
    """Transverse and long-axis polarizabilities (alpha_x, alpha_z), C*m^2/V.

    The dumbbell is approximated by a prolate spheroid of the same volume
    (two spheres of the given radius) and aspect ratio 2.  Callers that have
    measured or tabulated values should pass them to ParticleParams directly.
    """
    if refractive_index <= 1.0:
        raise InvalidMaterial(f"refractive index must exceed 1, got {refractive_index}")
    if radius <= 0.0:
        raise InvalidMaterial(f"radius must be positive, got {radius}")
    eps_r = refractive_index**2
    volume = 2.0 * (4.0 / 3.0) * math.pi * radius**3
    l_trans, l_long = prolate_depolarization_factors(aspect_ratio)

    def alpha(l_j: float) -> float:
        return (
            4.0 * math.pi * epsilon_0 * volume * (eps_r - 1.0)
            / (3.0 * (1.0 + l_j * (eps_r - 1.0)))
        )

    return (alpha(l_trans), alpha(l_long))


@dataclass(frozen=True)
class ParticleParams:
    """Geometry, inertia and polarizability of the nanodumbbell."""

    radius: float            # sphere radius, m
    sphere_mass: float       # mass of one sphere, kg
    refractive_index: float
    density: float           # kg/m^3
    inertia_x: float         # kg*m^2, transverse principal moment (= I_y)
    inertia_z: float         # kg*m^2, moment about the symmetry axis
    alpha_x: float           # transverse polarizability, C*m^2/V
    alpha_z: float           # long-axis polarizability, C*m^2/V
    alpha_bar: float = 0.59  # dimensionless isotropic polarizability

    def __post_init__(self) -> None:
        if not (self.inertia_x > self.inertia_z > 0.0):
            raise ValidationError("require I_x > I_z > 0")
        if not (self.alpha_z > self.alpha_x > 0.0):
            raise ValidationError("require alpha_z > alpha_x > 0")

    @classmethod
    def from_geometry(
        cls,
        radius: float = 85e-9,
        density: float = 2000.0,
        refractive_index: float = 1.458,
        alpha_bar: float = 0.59,
        alpha_x: float | None = None,
        alpha_z: float | None = None,
    ) -> "ParticleParams":
        """Build from sphere geometry; I_x = (14/5) M_s R^2, I_z = (4/5) M_s R^2.

        alpha_x / alpha_z override the spheroid approximation when both given.
        """
        sphere_mass = density * (4.0 / 3.0) * math.pi * radius**3
        if alpha_x is None or alpha_z is None:
            alpha_x, alpha_z = ellipsoid_polarizabilities(radius, refractive_index)
        return cls(
            radius=radius,
            sphere_mass=sphere_mass,
            refractive_index=refractive_index,
            density=density,
            inertia_x=(14.0 / 5.0) * sphere_mass * radius**2,
            inertia_z=(4.0 / 5.0) * sphere_mass * radius**2,
            alpha_x=alpha_x,
            alpha_z=alpha_z,
            alpha_bar=alpha_bar,
        )

    @property
    def total_mass(self) -> float:
        return 2.0 * self.sphere_mass

    @property
    def inertia_ratio(self) -> float:
        """I_z / I_x; exactly 2/7 for the geometric dumbbell."""
        return self.inertia_z / self.inertia_x


def field_amplitude(power: float, wavelength: float, numerical_aperture: float) -> float:
    """Focal field amplitude E0 = sqrt(4 P / (pi w0^2 c eps0)), V/m.

    Uses the paraxial waist w0 = lambda / (pi NA).  Focal-field conventions
    vary by a factor of a few; calibrated construction (fixing the
    librational frequency) is preferred for quantitative work.
    """
    if power <= 0.0:
        raise ValidationError(f"power must be positive, got {power}")
    if not (0.0 < numerical_aperture < 1.0):
        raise ValidationError(f"NA must be in (0, 1), got {numerical_aperture}")
    waist = wavelength / (math.pi * numerical_aperture)
    return math.sqrt(4.0 * power / (math.pi * waist**2 * SPEED_OF_LIGHT * epsilon_0))


@dataclass(frozen=True)
class TrapParams:
    """Laser/trap parameters with the derived librational frequencies.

    theta is the polarization ellipticity angle; theta = 0 is linear
    polarization.  omega2 = (alpha_z - alpha_x) E0^2 / (2 I_x) is the squared
    librational frequency at theta = 0, and
    omega_xi^2 = omega^2 cos(2 theta), omega_eta^2 = omega^2 cos^2(theta).
    """

    wavelength: float        # m
    power: float             # W
    numerical_aperture: float
    theta: float             # rad, ellipticity angle
    field_amp: float         # V/m
    omega2: float            # rad^2/s^2

    def __post_init__(self) -> None:
        if not (0.0 <= self.theta < math.pi / 4.0):
            raise ValidationError(
                f"theta must satisfy 0 <= theta < pi/4 (omega_xi^2 > 0), got {self.theta}"
            )
        if self.omega2 <= 0.0:
            raise ValidationError("omega^2 must be positive")

    @classmethod
    def from_beam(
        cls,
        particle: ParticleParams,
        wavelength: float = 1550e-9,
        power: float = 0.5,
        numerical_aperture: float = 0.45,
        theta: float = 0.0,
        field_amp: float | None = None,
        omega_target: float | None = None,
        omega_is_cyclic: bool = False,
    ) -> "TrapParams":
        """Construct the trap, deriving E0 from one of three routes.

        Priority: explicit field_amp; else omega_target (calibrated mode,
        rad/s unless omega_is_cyclic, in which case Hz); else the focal-field
        formula from beam power and NA.
        """
        dalpha = particle.alpha_z - particle.alpha_x
        if field_amp is None:
            if omega_target is not None:
                w = 2.0 * math.pi * omega_target if omega_is_cyclic else omega_target
                field_amp = math.sqrt(2.0 * particle.inertia_x * w * w / dalpha)
            else:
                field_amp = field_amplitude(power, wavelength, numerical_aperture)
        omega2 = dalpha * field_amp**2 / (2.0 * particle.inertia_x)
        return cls(
            wavelength=wavelength,
            power=power,
            numerical_aperture=numerical_aperture,
            theta=theta,
            field_amp=field_amp,
            omega2=omega2,
        )

    @property
    def omega(self) -> float:
        """Librational angular frequency at theta = 0, rad/s."""
        return math.sqrt(self.omega2)

    @property
    def omega_xi2(self) -> float:
        return self.omega2 * math.cos(2.0 * self.theta)

    @property
    def omega_eta2(self) -> float:
        return self.omega2 * math.cos(self.theta) ** 2

    def with_theta(self, theta: float) -> "TrapParams":
        return replace(self, theta=theta)


def default_setup(theta: float = 0.0) -> tuple[ParticleParams, TrapParams]:
    """Default particle and calibrated trap (omega = 2.19e6 rad/s)."""
    particle = ParticleParams.from_geometry()
    trap = TrapParams.from_beam(particle, theta=theta, omega_target=OMEGA_CALIBRATION)
    return particle, trap
