"""Exact rigid-body physics of the trapped nanodumbbell.

Euler angles follow the z-y'-z'' convention: alpha about the lab z axis,
beta about the intermediate y' axis, gamma about the body z'' axis.  The
spin rate omega3 about the symmetry axis is a constant of the motion for a
symmetric top, so the dynamical state is (alpha, beta, gamma, alpha_dot,
beta_dot) with omega3 carried as a parameter and gamma_dot reconstructed
from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import k as BOLTZMANN

from .errors import SingularityGuard
from .params import ParticleParams, TrapParams

# Distance from the beta = 0, pi poles below which the csc(beta) terms in
# the equations of motion are no longer trusted.  Trapped motion stays near
# beta = pi/2; reaching the guard means the particle is escaping.
BETA_GUARD = 1e-6

SMALL_ANGLE_THRESHOLD = 0.3  # rad, validity limit of the linearized model


@dataclass
class EulerState:
    """Orientation, rates and conserved spin of the dumbbell."""

    alpha: float
    beta: float
    gamma: float
    alpha_dot: float
    beta_dot: float
    omega3: float
    t: float = 0.0

    @property
    def gamma_dot(self) -> float:
        return self.omega3 - self.alpha_dot * math.cos(self.beta)

    def as_vector(self) -> np.ndarray:
        """State vector (alpha, beta, gamma, alpha_dot, beta_dot)."""
        return np.array(
            [self.alpha, self.beta, self.gamma, self.alpha_dot, self.beta_dot]
        )

    def with_vector(self, y: np.ndarray, t: float | None = None) -> "EulerState":
        return replace(
            self,
            alpha=float(y[0]),
            beta=float(y[1]),
            gamma=float(y[2]),
            alpha_dot=float(y[3]),
            beta_dot=float(y[4]),
            t=self.t if t is None else t,
        )


@dataclass
class SmallAngleState:
    """Tip coordinates (xi, eta) of the linearized model.

    xi is the deviation of the long axis from the polarization axis in the
    x-y plane, eta in the x-z plane.  Valid while both stay below the
    small-angle threshold.
    """

    xi: float
    eta: float
    xi_dot: float
    eta_dot: float
    t: float = 0.0

    def as_vector(self) -> np.ndarray:
        return np.array([self.xi, self.eta, self.xi_dot, self.eta_dot])


def fold_alpha(alpha: float) -> float:
    """Deviation of alpha from the nearer potential minimum (0 or pi).

    The cos^2(alpha) potential has minima at both 0 and pi; feedback and
    tip coordinates use the folded deviation so particles trapped near
    alpha = pi are handled identically.
    """
    return (alpha + math.pi / 2.0) % math.pi - math.pi / 2.0


def euler_to_small_angle(s: EulerState) -> SmallAngleState:
    return SmallAngleState(
        xi=fold_alpha(s.alpha),
        eta=math.pi / 2.0 - s.beta,
        xi_dot=s.alpha_dot,
        eta_dot=-s.beta_dot,
        t=s.t,
    )


def small_angle_to_euler(s: SmallAngleState, omega3: float = 0.0) -> EulerState:
    return EulerState(
        alpha=s.xi,
        beta=math.pi / 2.0 - s.eta,
        gamma=0.0,
        alpha_dot=s.xi_dot,
        beta_dot=-s.eta_dot,
        omega3=omega3,
        t=s.t,
    )


def rotation_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Lab-to-body rotation matrix R = R_z''(gamma) R_y'(beta) R_z(alpha)."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    cg, sg = math.cos(gamma), math.sin(gamma)
    r_z = np.array([[ca, sa, 0.0], [-sa, ca, 0.0], [0.0, 0.0, 1.0]])
    r_y = np.array([[cb, 0.0, -sb], [0.0, 1.0, 0.0], [sb, 0.0, cb]])
    r_zpp = np.array([[cg, sg, 0.0], [-sg, cg, 0.0], [0.0, 0.0, 1.0]])
    return r_zpp @ r_y @ r_z


def long_axis_lab(alpha: float, beta: float) -> np.ndarray:
    """Unit vector of the z''' symmetry axis in the lab frame.

    Components (sin(beta)cos(alpha), sin(beta)sin(alpha), cos(beta)); the
    y and z components are the tip projections Y/2R and Z/2R.
    """
    sb = math.sin(beta)
    return np.array([sb * math.cos(alpha), sb * math.sin(alpha), math.cos(beta)])


def body_angular_velocity(s: EulerState) -> tuple[float, float, float]:
    """Body-frame angular velocity components (omega1, omega2, omega3)."""
    sb, cb = math.sin(s.beta), math.cos(s.beta)
    sg, cg = math.sin(s.gamma), math.cos(s.gamma)
    w1 = s.beta_dot * sg - s.alpha_dot * sb * cg
    w2 = s.beta_dot * cg + s.alpha_dot * sb * sg
    return (w1, w2, s.omega3)


def kinetic_energy(s: EulerState, particle: ParticleParams) -> float:
    """K = (1/2) I_x (w1^2 + w2^2) + (1/2) I_z w3^2, J."""
    # w1^2 + w2^2 is gamma-free: beta_dot^2 + alpha_dot^2 sin^2(beta)
    sb = math.sin(s.beta)
    transverse = s.beta_dot**2 + (s.alpha_dot * sb) ** 2
    return 0.5 * particle.inertia_x * transverse + 0.5 * particle.inertia_z * s.omega3**2


def potential_energy(s: EulerState, trap: TrapParams, particle: ParticleParams) -> float:
    """Orientation potential U(alpha, beta; theta) including its constant term, J.

    U = -(E0^2/4) [alpha_x + (alpha_z - alpha_x) sin^2(beta)
                   (cos^2(theta) cos^2(alpha) + sin^2(theta) sin^2(alpha))]
    """
    dalpha = particle.alpha_z - particle.alpha_x
    ct2 = math.cos(trap.theta) ** 2
    st2 = math.sin(trap.theta) ** 2
    sa2 = math.sin(s.alpha) ** 2
    sb2 = math.sin(s.beta) ** 2
    e2q = trap.field_amp**2 / 4.0
    return -e2q * (particle.alpha_x + dalpha * sb2 * (ct2 * (1.0 - sa2) + st2 * sa2))


def potential_minimum(trap: TrapParams, particle: ParticleParams) -> float:
    """U at the global minimum (alpha = 0, beta = pi/2), J."""
    dalpha = particle.alpha_z - particle.alpha_x
    e2q = trap.field_amp**2 / 4.0
    return -e2q * (particle.alpha_x + dalpha * math.cos(trap.theta) ** 2)


def potential_above_minimum(
    s: EulerState, trap: TrapParams, particle: ParticleParams
) -> float:
    """U - U_min evaluated in a cancellation-free form, J.

    U - U_min = (E0^2/4)(alpha_z - alpha_x)
                [cos^2(theta) cos^2(beta) + cos(2 theta) sin^2(beta) sin^2(alpha)]
    which is exact and manifestly >= 0 for theta < pi/4.
    """
    dalpha = particle.alpha_z - particle.alpha_x
    e2q = trap.field_amp**2 / 4.0
    cb2 = math.cos(s.beta) ** 2
    sb2 = math.sin(s.beta) ** 2
    sa2 = math.sin(s.alpha) ** 2
    ct2 = math.cos(trap.theta) ** 2
    c2t = math.cos(2.0 * trap.theta)
    return e2q * dalpha * (ct2 * cb2 + c2t * sb2 * sa2)


def shifted_energy_kelvin(
    s: EulerState, trap: TrapParams, particle: ParticleParams
) -> float:
    """Shifted energy eps = (E - E_min - I_z w3^2 / 2) / k_B, K.

    The spin energy about the symmetry axis is excluded because parametric
    feedback cannot touch it; eps is the energy of the four coolable DOF,
    zero at the potential minimum at rest.
    """
    sb = math.sin(s.beta)
    transverse = 0.5 * particle.inertia_x * (s.beta_dot**2 + (s.alpha_dot * sb) ** 2)
    return (transverse + potential_above_minimum(s, trap, particle)) / BOLTZMANN


def polarization_vector(
    s: EulerState, trap: TrapParams, particle: ParticleParams
) -> np.ndarray:
    """Induced dipole (p_x, p_y, p_z) in the lab frame, C*m.

    Linear-polarization form with the constant isotropic part of p_x
    omitted:
      p_x = dalpha E0 cos^2(alpha) sin^2(beta)
      p_y = dalpha E0 sin^2(beta) cos(alpha) sin(alpha)
      p_z = dalpha E0 cos(beta) sin(beta) cos(alpha)
    """
    dalpha = particle.alpha_z - particle.alpha_x
    e0 = trap.field_amp
    ca, sa = math.cos(s.alpha), math.sin(s.alpha)
    cb, sb = math.cos(s.beta), math.sin(s.beta)
    return np.array(
        [
            dalpha * e0 * ca * ca * sb * sb,
            dalpha * e0 * sb * sb * ca * sa,
            dalpha * e0 * cb * sb * ca,
        ]
    )


def potential_gradients(
    alpha: float, beta: float, trap: TrapParams, particle: ParticleParams
) -> tuple[float, float]:
    """Analytic (dU/dalpha, dU/dbeta) of the orientation potential, J/rad."""
    dalpha_p = particle.alpha_z - particle.alpha_x
    e2q = trap.field_amp**2 / 4.0
    ct2 = math.cos(trap.theta) ** 2
    st2 = math.sin(trap.theta) ** 2
    c2t = ct2 - st2
    sa2 = math.sin(alpha) ** 2
    s2a = math.sin(2.0 * alpha)
    sb2 = math.sin(beta) ** 2
    s2b = math.sin(2.0 * beta)
    du_da = e2q * dalpha_p * sb2 * s2a * c2t
    du_db = -e2q * dalpha_p * s2b * (ct2 * (1.0 - sa2) + st2 * sa2)
    return (du_da, du_db)


def eom_rhs(
    s: EulerState,
    trap: TrapParams,
    particle: ParticleParams,
    modulation: float = 1.0,
) -> np.ndarray:
    """Time derivatives (alpha_dot, beta_dot, gamma_dot, alpha_ddot, beta_ddot).

    Full symmetric-top equations of motion; the potential gradients are
    multiplied by `modulation` (the parametric feedback factor
    1 + chi R^2 q qdot; 1 when feedback is off).  Raises SingularityGuard
    within BETA_GUARD of the coordinate poles.
    """
    sb, cb = math.sin(s.beta), math.cos(s.beta)
    if abs(sb) <= BETA_GUARD:
        raise SingularityGuard(f"|sin(beta)| = {abs(sb):.2e} at t = {s.t:.3e} s")
    ix = particle.inertia_x
    wc = particle.inertia_ratio * s.omega3
    du_da, du_db = potential_gradients(s.alpha, s.beta, trap, particle)
    alpha_ddot = (
        -2.0 * s.alpha_dot * s.beta_dot * cb / sb
        + s.beta_dot * wc / sb
        - modulation * du_da / (ix * sb * sb)
    )
    beta_ddot = sb * (s.alpha_dot**2 * cb - s.alpha_dot * wc) - modulation * du_db / ix
    gamma_dot = s.omega3 - s.alpha_dot * cb
    return np.array([s.alpha_dot, s.beta_dot, gamma_dot, alpha_ddot, beta_ddot])
