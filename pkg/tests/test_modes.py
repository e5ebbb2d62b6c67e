import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from nanorotor import (
    ParameterOrderViolation,
    cooling_power_elliptical,
    cooling_power_linear,
    conserved_precession_quantity,
    coupling_frequency,
    fit_modes,
    normal_modes_elliptical,
    normal_modes_linear,
    small_angle_energy,
    small_angle_rhs,
)
from nanorotor.errors import FitDegenerate
from nanorotor.modes import ModeDecomposition, mode_signal
from nanorotor.rigidbody import SmallAngleState

W = 2.19e6


def test_linear_mode_frequencies():
    wc = 1.1e5
    wp, wm, big = normal_modes_linear(W, wc)
    assert big == pytest.approx(math.sqrt(4 * W**2 + wc**2), rel=1e-12)
    assert wp - wm == pytest.approx(wc, rel=1e-12)
    assert wp * wm == pytest.approx(W**2, rel=1e-9)


def test_elliptical_reduces_to_linear():
    wc = 7e4
    md = normal_modes_elliptical(W**2, W**2, wc)
    wp, wm, _ = normal_modes_linear(W, wc)
    assert md.omega_plus == pytest.approx(wp, rel=1e-10)
    assert md.omega_minus == pytest.approx(wm, rel=1e-10)
    assert md.kappa_plus == pytest.approx(1.0, rel=1e-10)
    assert md.kappa_minus == pytest.approx(1.0, rel=1e-10)


def test_elliptical_kappa_ordering():
    theta = 4 * math.pi / 32
    wxi2 = W**2 * math.cos(2 * theta)
    weta2 = W**2 * math.cos(theta) ** 2
    md = normal_modes_elliptical(wxi2, weta2, 1.1e5)
    assert md.omega_plus > md.omega_minus > 0.0
    assert md.kappa_plus >= 1.0 >= md.kappa_minus > 0.0


def test_elliptical_requires_ordering():
    # the decomposition assumes omega_eta >= omega_xi (theta in [0, pi/4))
    with pytest.raises(ParameterOrderViolation):
        normal_modes_elliptical(W**2, 0.5 * W**2, 1e5)


def test_modes_solve_the_linearized_equations():
    """omega_pm and kappa_pm must satisfy the coupled ODEs exactly."""
    theta = 0.25
    wxi2 = W**2 * math.cos(2 * theta)
    weta2 = W**2 * math.cos(theta) ** 2
    wc = 2e5
    md = normal_modes_elliptical(wxi2, weta2, wc)
    for w_mode, kappa, sign in (
        (md.omega_plus, md.kappa_plus, +1.0),
        (md.omega_minus, md.kappa_minus, -1.0),
    ):
        # xi = cos(w t), eta = sign * kappa sin(w t)
        # xi'' = -wxi2 xi - wc eta'   => -w^2 = -wxi2 - wc sign kappa w
        r1 = -(w_mode**2) + wxi2 + wc * sign * kappa * w_mode
        # eta'' = -weta2 eta + wc xi' => -w^2 sign kappa = -weta2 sign kappa - wc w
        r2 = -(w_mode**2) * sign * kappa + weta2 * sign * kappa + wc * w_mode
        assert abs(r1) / W**2 < 1e-9
        assert abs(r2) / W**2 < 1e-9


def test_coupling_frequency(setup_linear):
    particle, _ = setup_linear
    assert coupling_frequency(particle, 7e5) == pytest.approx(2e5, rel=1e-12)


def _integrate_small_angle(y0, wxi2, weta2, wc, chi_r2, signal, t_span, rtol=1e-11):
    def rhs(t, y):
        xi, eta, xd, ed = y
        if signal == "xi":
            qq = xi * xd
        elif signal == "eta":
            qq = eta * ed
        elif signal == "sum":
            qq = xi * xd + eta * ed
        else:
            qq = 0.0
        mod = 1.0 + chi_r2 * qq
        return small_angle_rhs(y, wxi2, weta2, wc, mod)

    return solve_ivp(rhs, t_span, y0, rtol=rtol, atol=1e-14,
                     dense_output=True, max_step=1e-7)


def test_fit_modes_recovers_synthetic_amplitudes(rng):
    wc = 1.5e5
    md0 = normal_modes_elliptical(W**2 * 0.9, W**2, wc)
    truth = ModeDecomposition(
        omega_plus=md0.omega_plus, omega_minus=md0.omega_minus,
        kappa_plus=md0.kappa_plus, kappa_minus=md0.kappa_minus,
        q_split=md0.q_split, amp_plus=0.05, amp_minus=0.02,
        phase_plus=0.7, phase_minus=-1.1, residual_rms=0.0,
    )
    t = np.linspace(0.0, 60e-6, 2000)
    xi, eta, xd, ed = mode_signal(truth, t)
    fit = fit_modes(t, xi, eta, xd, ed, md0)
    assert fit.amp_plus == pytest.approx(0.05, rel=1e-6)
    assert fit.amp_minus == pytest.approx(0.02, rel=1e-6)
    assert math.remainder(fit.phase_plus - 0.7, 2 * math.pi) == pytest.approx(0.0, abs=1e-6)
    assert fit.amplitude_ratio == pytest.approx(0.4, rel=1e-5)


def test_fit_modes_rejects_short_window():
    md = normal_modes_elliptical(W**2 * 0.9, W**2, 1e5)
    t = np.linspace(0.0, 1e-6, 50)  # far below 10 cycles
    z = np.zeros_like(t)
    with pytest.raises(FitDegenerate):
        fit_modes(t, z, z, z, z, md)


def test_conserved_quantity_under_linear_feedback():
    # the precession invariant survives feedback when wxi = weta
    wc = 1.2e5
    chi_r2 = 1e9 * (85e-9) ** 2
    y0 = np.array([0.05, -0.02, 1e4, 3e4])
    sol = _integrate_small_angle(y0, W**2, W**2, wc, chi_r2, "sum",
                                 (0.0, 2e-4))
    t_eval = np.linspace(0.0, 2e-4, 200)
    ys = sol.sol(t_eval)
    c = np.array([
        conserved_precession_quantity(SmallAngleState(*y), wc) for y in ys.T
    ])
    assert np.max(np.abs(c - c[0])) / abs(c[0]) < 1e-7


@pytest.mark.slow
def test_cooling_rate_formulas_match_simulation(setup_linear, rng):
    """6 random parameter draws: windowed dE/dt vs the closed forms, <5%.

    The full 20-draw sweep runs in the acceptance suite.
    """
    from rate_oracle import rate_draw

    particle, _ = setup_linear
    failures = []
    for k in range(6):
        sim, pred = rate_draw(rng, k, particle)
        if abs(sim - pred) > 0.05 * abs(pred):
            failures.append((k, sim, pred))
    assert not failures, f"rate mismatches: {failures}"


def test_linear_rate_is_theta_zero_limit(setup_linear):
    particle, _ = setup_linear
    wc = 1.1e5
    lin = cooling_power_linear(0.03, 0.02, W, wc, 1e7, particle.radius,
                               particle.inertia_x)
    ell = cooling_power_elliptical(0.03, 0.02, W**2, W**2, wc, 1e7,
                                   particle.radius, particle.inertia_x, "sum")
    assert lin == pytest.approx(ell, rel=1e-9)
    assert lin < 0.0


def test_sum_signal_always_cools():
    particle_r = 85e-9
    ix = 5.8e-32
    for theta in (0.0, 0.1, 0.3):
        wxi2 = W**2 * math.cos(2 * theta)
        weta2 = W**2 * math.cos(theta) ** 2
        for wc in (1e4, 1e5, 3e5):
            for ap, am in ((0.05, 0.0), (0.0, 0.05), (0.03, 0.03)):
                p = cooling_power_elliptical(ap, am, wxi2, weta2, wc, 1e7,
                                             particle_r, ix, "sum")
                assert p <= 1e-30


def test_single_coordinate_signal_has_heating_terms():
    # the xi-only signal heats the minus mode when it dominates
    theta = 4 * math.pi / 32
    wxi2 = W**2 * math.cos(2 * theta)
    weta2 = W**2 * math.cos(theta) ** 2
    p = cooling_power_elliptical(0.0, 0.05, wxi2, weta2, 1.1e5, 1e7,
                                 85e-9, 5.8e-32, "xi")
    assert p < 0.0  # -y2 A-^4: xi xidot cools the minus mode...
    q = cooling_power_elliptical(0.05, 0.0, wxi2, weta2, 1.1e5, 1e7,
                                 85e-9, 5.8e-32, "xi")
    assert q > 0.0  # ...while heating the plus mode
