"""Closed-form small-angle results: normal modes and cooling rates.

The linearized tip coordinates (xi, eta) obey

    xi''  = -omega_xi^2 (1 + chi R^2 q qdot) xi  - omega_c eta'
    eta'' = -omega_eta^2 (1 + chi R^2 q qdot) eta + omega_c xi'

with omega_c = (I_z/I_x) omega3 the spin-induced coupling.  Without
feedback the motion is a superposition of two circular modes

    xi(t)  = A+ cos(w+ t + d+) + A- cos(w- t + d-)
    eta(t) = A+ k+ sin(w+ t + d+) - A- k- sin(w- t + d-)

where k+ >= 1 >= k- > 0 are the ellipticity factors of the two modes,
both equal to 1 for linear polarization.  These expressions are the
oracle layer for everything the nonlinear simulator produces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitDegenerate, ParameterOrderViolation
from .params import ParticleParams, TrapParams
from .rigidbody import SmallAngleState


def coupling_frequency(particle: ParticleParams, omega3: float) -> float:
    """Pseudo-cyclotron coupling frequency omega_c = (I_z/I_x) omega3."""
    return particle.inertia_ratio * omega3


def normal_modes_linear(omega: float, omega_c: float) -> tuple[float, float, float]:
    """(w+, w-, Omega) for linear polarization.

    Omega = sqrt(4 w^2 + wc^2), w+- = (Omega +- wc)/2; the splitting is
    exactly wc and the product w+ w- is exactly w^2.
    """
    big_omega = math.sqrt(4.0 * omega * omega + omega_c * omega_c)
    return (0.5 * (big_omega + omega_c), 0.5 * (big_omega - omega_c), big_omega)


@dataclass(frozen=True)
class ModeDecomposition:
    """Normal-mode frequencies, ellipticity factors and (optionally) amplitudes."""

    omega_plus: float
    omega_minus: float
    kappa_plus: float        # eta/xi amplitude ratio of the (+) mode, >= 1
    kappa_minus: float       # eta/xi amplitude ratio of the (-) mode, <= 1
    q_split: float           # the discriminant Q, rad^2/s^2
    amp_plus: float = 0.0    # rad
    amp_minus: float = 0.0   # rad
    phase_plus: float = 0.0  # rad
    phase_minus: float = 0.0 # rad
    residual_rms: float = 0.0

    @property
    def amplitude_ratio(self) -> float:
        """min/max of the two mode amplitudes (0 when one mode is gone)."""
        hi = max(self.amp_plus, self.amp_minus)
        if hi == 0.0:
            return 0.0
        return min(self.amp_plus, self.amp_minus) / hi


def normal_modes_elliptical(
    omega_xi2: float, omega_eta2: float, omega_c: float
) -> ModeDecomposition:
    """Normal modes of the elliptically polarized trap.

    w+-^2 = [(wxi^2 + weta^2 + wc^2) +- Q] / 2 with
    Q = sqrt(4 weta^2 wc^2 + (wc^2 + wxi^2 - weta^2)^2).  The ellipticity
    factors come from the eigenvectors:
      k+ = 2 w+ wc / (Q + wc^2 + wxi^2 - weta^2)
      k- = 2 w- wc / (Q - wc^2 - wxi^2 + weta^2)
    (k+ belongs to the higher-frequency mode; k+^2 >= 1 >= k-^2.)  Both
    reduce to 1 as theta -> 0.
    """
    if omega_xi2 <= 0.0 or omega_eta2 < omega_xi2:
        raise ParameterOrderViolation(
            f"require omega_eta^2 >= omega_xi^2 > 0, got ({omega_xi2}, {omega_eta2})"
        )
    wc2 = omega_c * omega_c
    q = math.sqrt(4.0 * omega_eta2 * wc2 + (wc2 + omega_xi2 - omega_eta2) ** 2)
    s = omega_xi2 + omega_eta2 + wc2
    w_plus = math.sqrt(0.5 * (s + q))
    w_minus = math.sqrt(0.5 * (s - q))
    if omega_c == 0.0:
        # degenerate limit: modes decouple into the pure xi / eta oscillators
        k_plus, k_minus = 1.0, 1.0
    else:
        k_plus = 2.0 * w_plus * omega_c / (q + wc2 + omega_xi2 - omega_eta2)
        k_minus = 2.0 * w_minus * omega_c / (q - wc2 - omega_xi2 + omega_eta2)
    return ModeDecomposition(
        omega_plus=w_plus,
        omega_minus=w_minus,
        kappa_plus=k_plus,
        kappa_minus=k_minus,
        q_split=q,
    )


def mode_signal(
    modes: ModeDecomposition, t: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate (xi, eta, xi_dot, eta_dot) of a ModeDecomposition on a grid."""
    pp = modes.omega_plus * t + modes.phase_plus
    pm = modes.omega_minus * t + modes.phase_minus
    ap, am = modes.amp_plus, modes.amp_minus
    kp, km = modes.kappa_plus, modes.kappa_minus
    xi = ap * np.cos(pp) + am * np.cos(pm)
    eta = ap * kp * np.sin(pp) - am * km * np.sin(pm)
    xi_dot = -ap * modes.omega_plus * np.sin(pp) - am * modes.omega_minus * np.sin(pm)
    eta_dot = ap * kp * modes.omega_plus * np.cos(pp) - am * km * modes.omega_minus * np.cos(pm)
    return xi, eta, xi_dot, eta_dot


def fit_modes(
    t: np.ndarray,
    xi: np.ndarray,
    eta: np.ndarray,
    xi_dot: np.ndarray,
    eta_dot: np.ndarray,
    modes: ModeDecomposition,
    max_residual: float = 0.10,
) -> ModeDecomposition:
    """Least-squares mode amplitudes/phases with frequencies held fixed.

    Frequencies (and kappas) are supplied analytically from the conserved
    omega3 and trap parameters; fitting them jointly degenerates when
    w+ ~ w-.  The model is linear in (A cos d, A sin d), so this is a
    plain linear least-squares solve.  Raises FitDegenerate when the
    window is too short (< 10 cycles of w-) or the residual exceeds
    max_residual of the signal RMS.
    """
    t = np.asarray(t, dtype=float)
    span = t[-1] - t[0]
    if span * modes.omega_minus < 10.0 * 2.0 * math.pi:
        raise FitDegenerate("window shorter than 10 cycles of omega_minus")
    tt = t - t[0]
    wp, wm = modes.omega_plus, modes.omega_minus
    kp, km = modes.kappa_plus, modes.kappa_minus
    cp, sp = np.cos(wp * tt), np.sin(wp * tt)
    cm, sm = np.cos(wm * tt), np.sin(wm * tt)
    # unknowns: u = (c+, s+, c-, s-) with
    # A+ cos(wp t + d+) = c+ cos(wp t) + s+ sin(wp t), etc.
    design = []
    target = []
    scale = max(wp, 1.0)
    for sig, rows in (
        (xi, [cp, sp, cm, sm]),
        (eta, [kp * sp, -kp * cp, -km * sm, km * cm]),
        (xi_dot / scale, [-wp * sp / scale, wp * cp / scale, -wm * sm / scale, wm * cm / scale]),
        (eta_dot / scale, [kp * wp * cp / scale, kp * wp * sp / scale,
                           -km * wm * cm / scale, -km * wm * sm / scale]),
    ):
        design.append(np.column_stack(rows))
        target.append(np.asarray(sig, dtype=float))
    a = np.vstack(design)
    b = np.concatenate(target)
    u, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = a @ u - b
    sig_rms = float(np.sqrt(np.mean(b * b)))
    res_rms = float(np.sqrt(np.mean(resid * resid)))
    if sig_rms > 0.0 and res_rms > max_residual * sig_rms:
        raise FitDegenerate(
            f"fit residual {res_rms:.3e} exceeds {max_residual:.0%} of signal RMS {sig_rms:.3e}"
        )
    cp_u, sp_u, cm_u, sm_u = u
    amp_p = math.hypot(cp_u, sp_u)
    amp_m = math.hypot(cm_u, sm_u)
    # A cos(w t + d) = c cos - (A sin d) sin => s = -A sin d
    phase_p = math.atan2(-sp_u, cp_u) - wp * t[0]
    phase_m = math.atan2(-sm_u, cm_u) - wm * t[0]
    return ModeDecomposition(
        omega_plus=wp,
        omega_minus=wm,
        kappa_plus=kp,
        kappa_minus=km,
        q_split=modes.q_split,
        amp_plus=amp_p,
        amp_minus=amp_m,
        phase_plus=math.remainder(phase_p, 2.0 * math.pi),
        phase_minus=math.remainder(phase_m, 2.0 * math.pi),
        residual_rms=res_rms,
    )


def cooling_power_linear(
    amp_plus: float,
    amp_minus: float,
    omega: float,
    omega_c: float,
    chi: float,
    radius: float,
    inertia_x: float,
) -> float:
    """Cycle-averaged <dE/dt> for xi*xi_dot feedback, linear polarization, W.

    -1/4 I_x w^2 chi R^2 Omega^2 (A+ A-)^2: always <= 0 and zero as soon
    as either mode is empty, so cooling stalls at pure precession.
    """
    _, _, big_omega = normal_modes_linear(omega, omega_c)
    return (
        -0.25 * inertia_x * omega * omega * chi * radius * radius
        * big_omega * big_omega * (amp_plus * amp_minus) ** 2
    )


def cooling_coefficients(
    omega_xi2: float,
    omega_eta2: float,
    omega_c: float,
    chi: float,
    radius: float,
    inertia_x: float,
) -> dict[str, float]:
    """Coefficients y_i, z_i of the elliptical cycle-averaged cooling rates.

    <P>_{xi xidot}  = +A+^4 y1 - A-^4 y2 - (A+ A-)^2 y3
    <P>_{eta etadot}= -A+^4 z1 + A-^4 z2 - (A+ A-)^2 z3
    <P>_sum = -A+^4 (z1-y1) - A-^4 (y2-z2) - (A+ A-)^2 (y3+z3)

    Derived by inserting the normal modes into
    dE/dt = -I_x chi R^2 (q qdot)(wxi^2 xi xidot + weta^2 eta etadot) and
    averaging the sinusoids over a cycle with slowly varying amplitudes:

      y1 = g w+^2/8 (weta^2 k+^2 - wxi^2)         z1 = k+^2 y1
      y2 = g w-^2/8 (wxi^2 - weta^2 k-^2)         z2 = k-^2 y2
      y3 = g [wxi^2 (w+^2 + w-^2)/4 + weta^2 k+ k- w+ w- / 2]
      z3 = g [weta^2 k+^2 k-^2 (w+^2 + w-^2)/4 + wxi^2 k+ k- w+ w- / 2]

    with g = I_x chi R^2.  All are >= 0 for weta >= wxi > wc, and all
    three single-signal expressions collapse to the linear-polarization
    rate at theta = 0.
    """
    modes = normal_modes_elliptical(omega_xi2, omega_eta2, omega_c)
    wp2 = modes.omega_plus**2
    wm2 = modes.omega_minus**2
    kp, km = modes.kappa_plus, modes.kappa_minus
    g = inertia_x * chi * radius * radius
    y1 = g * wp2 / 8.0 * (omega_eta2 * kp * kp - omega_xi2)
    y2 = g * wm2 / 8.0 * (omega_xi2 - omega_eta2 * km * km)
    cross = kp * km * modes.omega_plus * modes.omega_minus / 2.0
    y3 = g * (omega_xi2 * (wp2 + wm2) / 4.0 + omega_eta2 * cross)
    z1 = kp * kp * y1
    z2 = km * km * y2
    z3 = g * (omega_eta2 * kp * kp * km * km * (wp2 + wm2) / 4.0 + omega_xi2 * cross)
    return {"y1": y1, "y2": y2, "y3": y3, "z1": z1, "z2": z2, "z3": z3}


def cooling_power_elliptical(
    amp_plus: float,
    amp_minus: float,
    omega_xi2: float,
    omega_eta2: float,
    omega_c: float,
    chi: float,
    radius: float,
    inertia_x: float,
    signal_choice: str = "sum",
) -> float:
    """Cycle-averaged <dE/dt> under elliptical polarization, W.

    signal_choice selects the fed-back product: 'xi' (xi xidot), 'eta'
    (eta etadot) or 'sum'.  The sum rate is <= 0 whenever
    omega_eta >= omega_xi > omega_c >= 0; single-coordinate signals mix
    heating and cooling of the two modes.
    """
    c = cooling_coefficients(omega_xi2, omega_eta2, omega_c, chi, radius, inertia_x)
    a4p = amp_plus**4
    a4m = amp_minus**4
    a22 = (amp_plus * amp_minus) ** 2
    if signal_choice == "xi":
        return a4p * c["y1"] - a4m * c["y2"] - a22 * c["y3"]
    if signal_choice == "eta":
        return -a4p * c["z1"] + a4m * c["z2"] - a22 * c["z3"]
    if signal_choice == "sum":
        return (
            -a4p * (c["z1"] - c["y1"])
            - a4m * (c["y2"] - c["z2"])
            - a22 * (c["y3"] + c["z3"])
        )
    raise ValueError(f"unknown signal_choice {signal_choice!r}")


def conserved_precession_quantity(s: SmallAngleState, omega_c: float) -> float:
    """xi eta' - eta xi' - (wc/2)(xi^2 + eta^2), rad^2/s.

    Constant along the linear-polarization dynamics even with feedback
    active; it forces d/dt (A-^2 - A+^2) = 0 and hence the single-mode
    cooling floor.
    """
    return (
        s.xi * s.eta_dot
        - s.eta * s.xi_dot
        - 0.5 * omega_c * (s.xi**2 + s.eta**2)
    )


def small_angle_rhs(
    y: np.ndarray,
    omega_xi2: float,
    omega_eta2: float,
    omega_c: float,
    modulation: float = 1.0,
) -> np.ndarray:
    """Linearized RHS for y = (xi, eta, xi_dot, eta_dot)."""
    xi, eta, xi_dot, eta_dot = y
    return np.array(
        [
            xi_dot,
            eta_dot,
            -omega_xi2 * modulation * xi - omega_c * eta_dot,
            -omega_eta2 * modulation * eta + omega_c * xi_dot,
        ]
    )


def small_angle_energy(
    y: np.ndarray, omega_xi2: float, omega_eta2: float, inertia_x: float
) -> float:
    """Quadratic energy (I_x/2)(xi'^2 + eta'^2 + wxi^2 xi^2 + weta^2 eta^2), J."""
    xi, eta, xi_dot, eta_dot = y
    return 0.5 * inertia_x * (
        xi_dot**2 + eta_dot**2 + omega_xi2 * xi**2 + omega_eta2 * eta**2
    )


def radiation_force(particle: ParticleParams, trap: TrapParams) -> float:
    """Axial radiation force (4/3)(P0 NA^2/c)(2 pi R/lambda)^6 abar^2, N."""
    from scipy.constants import c as c_light

    return (
        (4.0 / 3.0)
        * trap.power * trap.numerical_aperture**2 / c_light
        * (2.0 * math.pi * particle.radius / trap.wavelength) ** 6
        * particle.alpha_bar**2
    )


def axial_displacement_ratio(particle: ParticleParams, trap: TrapParams) -> float:
    """Equilibrium axial displacement over the Rayleigh range, z_d/z_R.

    (32 abar / 3)(pi R / lambda)^3 / NA^2; attenuates homodyne orientation
    signals via the Gouy phase.
    """
    if trap.numerical_aperture <= 0.0:
        raise ValueError("NA must be positive")
    return (
        (32.0 * particle.alpha_bar / 3.0)
        * (math.pi * particle.radius / trap.wavelength) ** 3
        / trap.numerical_aperture**2
    )
