"""Compiled single-trajectory kernel for Monte-Carlo ensembles.

Same physics as `rigidbody.eom_rhs` + `integrator` + `feedback` + `noise`,
fused into one numba kernel so that 80 ms trajectories (tens of thousands
of librational periods) run in under a second.  The pure-Python modules
remain the reference implementation; `tests/test_fastsim.py` cross-checks
the two paths on identical trajectories.

Status codes: 0 completed, 1 singularity guard, 2 step underflow,
3 max_steps exhausted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.constants import k as BOLTZMANN

from .errors import SingularityGuard, StepUnderflow
from .feedback import FeedbackConfig, SIGNAL_CHOICES
from .integrator import IntegratorConfig
from .noise import NoiseConfig
from .params import ParticleParams, TrapParams
from .rigidbody import BETA_GUARD

STATUS_OK = 0
STATUS_SINGULARITY = 1
STATUS_UNDERFLOW = 2
STATUS_MAX_STEPS = 3

METHOD_RK4 = 0
METHOD_DOPRI5 = 1


@njit(cache=True, inline="always")
def _rhs(a, b, ad, bd, w3, ix, iz_ix, uq, ct2, c2t, mod):
    """Full EOM derivatives; returns (gd, add, bdd, ok)."""
    sb = math.sin(b)
    if abs(sb) <= BETA_GUARD:
        return 0.0, 0.0, 0.0, False
    cb = math.cos(b)
    sa = math.sin(a)
    ca = math.cos(a)
    wc = iz_ix * w3
    sa2 = sa * sa
    sb2 = sb * sb
    st2 = ct2 - c2t
    du_da = uq * sb2 * 2.0 * sa * ca * c2t
    du_db = -uq * 2.0 * sb * cb * (ct2 * (1.0 - sa2) + st2 * sa2)
    add = -2.0 * ad * bd * cb / sb + bd * wc / sb - mod * du_da / (ix * sb2)
    bdd = sb * (ad * ad * cb - ad * wc) - mod * du_db / ix
    gd = w3 - ad * cb
    return gd, add, bdd, True


@njit(cache=True, inline="always")
def _eval(y, f, w3, ix, iz_ix, uq, ct2, c2t, mod):
    gd, add, bdd, ok = _rhs(y[0], y[1], y[3], y[4], w3, ix, iz_ix, uq, ct2, c2t, mod)
    f[0] = y[3]
    f[1] = y[4]
    f[2] = gd
    f[3] = add
    f[4] = bdd
    return ok


@njit(cache=True, inline="always")
def _rk4(y, dt, out, w3, ix, iz_ix, uq, ct2, c2t, mod, k1, k2, k3, k4, tmp):
    ok = True
    for i in range(5):
        tmp[i] = y[i] + 0.5 * dt * k1[i]
    ok = ok and _eval(tmp, k2, w3, ix, iz_ix, uq, ct2, c2t, mod)
    for i in range(5):
        tmp[i] = y[i] + 0.5 * dt * k2[i]
    ok = ok and _eval(tmp, k3, w3, ix, iz_ix, uq, ct2, c2t, mod)
    for i in range(5):
        tmp[i] = y[i] + dt * k3[i]
    ok = ok and _eval(tmp, k4, w3, ix, iz_ix, uq, ct2, c2t, mod)
    for i in range(5):
        out[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return ok


@njit(cache=True, inline="always")
def _folded_xi(a):
    return (a + math.pi / 2.0) % math.pi - math.pi / 2.0


@njit(cache=True, inline="always")
def _feedback_qqdot(a, b, ad, bd, sig_code):
    if sig_code == 0:
        return 0.0
    xi = _folded_xi(a)
    eta = math.pi / 2.0 - b
    if sig_code == 1:
        return xi * ad
    if sig_code == 2:
        return -eta * bd
    if sig_code == 3:
        return xi * ad - eta * bd
    # p_y pdot_y rescaled by (dalpha E0)^-2
    sb = math.sin(b)
    cb = math.cos(b)
    sa = math.sin(a)
    ca = math.cos(a)
    p = sb * sb * ca * sa
    pd = 2.0 * sb * cb * bd * ca * sa + sb * sb * math.cos(2.0 * a) * ad
    return p * pd


@njit(cache=True, inline="always")
def _chi_at(t, sched_t, sched_chi):
    chi = sched_chi[0]
    for j in range(1, sched_t.size):
        if t >= sched_t[j]:
            chi = sched_chi[j]
        else:
            break
    return chi


@njit(cache=True)
def run_trajectory(
    y0: np.ndarray,
    omega3_0: float,
    t0: float,
    t_out: np.ndarray,
    # physics
    ix: float,
    iz: float,
    uq: float,           # (E0^2/4)(alpha_z - alpha_x)
    ct2: float,          # cos^2 theta
    c2t: float,          # cos 2 theta
    # feedback
    sig_code: int,
    r2: float,           # radius^2
    sched_t: np.ndarray,     # sched_t[0] must be <= t0
    sched_chi: np.ndarray,
    # noise
    g_ab: float,
    g_g: float,
    kt_gas: float,
    shot_rate: float,
    shot_kick: float,
    noise_on: bool,
    seed: int,
    # integrator
    rel_tol: float,
    abs_tol: float,
    dt_init: float,
    dt_min: float,
    dt_max: float,
    max_steps: int,
    method: int,
):
    """Integrate one trajectory, sampling states at t_out.

    Returns (out, status, n_steps) with out[:, :5] the state vector,
    out[:, 5] = omega3.  Samples are cubic-Hermite interpolated.
    """
    iz_ix = iz / ix
    n_out = t_out.size
    out = np.empty((n_out, 6))
    y = y0.copy()
    w3 = omega3_0
    t = t0
    f0 = np.empty(5)
    f1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    k5 = np.empty(5)
    k6 = np.empty(5)
    tmp = np.empty(5)
    y_full = np.empty(5)
    y_half = np.empty(5)
    y_new = np.empty(5)
    err_v = np.empty(5)

    np.random.seed(seed)

    idx = 0
    while idx < n_out and t_out[idx] <= t:
        for i in range(5):
            out[idx, i] = y[i]
        out[idx, 5] = w3
        idx += 1

    t_end = t_out[n_out - 1]
    dt = dt_init
    steps = 0
    status = STATUS_OK
    mod = 1.0
    if not _eval(y, f0, w3, ix, iz_ix, uq, ct2, c2t, mod):
        return out[:idx], STATUS_SINGULARITY, steps

    while idx < n_out and steps < max_steps:
        # feedback modulation held constant over one accepted step
        if sig_code != 0:
            qq = _feedback_qqdot(y[0], y[1], y[3], y[4], sig_code)
            mod = 1.0 + _chi_at(t, sched_t, sched_chi) * r2 * qq
        # f0 must be consistent with the current modulation
        if not _eval(y, f0, w3, ix, iz_ix, uq, ct2, c2t, mod):
            status = STATUS_SINGULARITY
            break
        if dt > t_end - t:
            dt = t_end - t
        # --- one accepted adaptive step ---
        accepted = False
        dt_next = dt
        while not accepted:
            ok = True
            err = 0.0
            if method == METHOD_RK4:
                ok = ok and _rk4(y, dt, y_full, w3, ix, iz_ix, uq, ct2, c2t, mod,
                                 f0, k2, k3, k4, tmp)
                ok = ok and _rk4(y, 0.5 * dt, y_half, w3, ix, iz_ix, uq, ct2, c2t, mod,
                                 f0, k2, k3, k4, tmp)
                ok = ok and _eval(y_half, k5, w3, ix, iz_ix, uq, ct2, c2t, mod)
                ok = ok and _rk4(y_half, 0.5 * dt, y_new, w3, ix, iz_ix, uq, ct2, c2t,
                                 mod, k5, k2, k3, k4, tmp)
                if ok:
                    err = 0.0
                    for i in range(5):
                        scale = abs_tol + rel_tol * max(abs(y[i]), abs(y_new[i]))
                        e = abs(y_new[i] - y_full[i]) / (15.0 * scale)
                        if e > err:
                            err = e
            else:
                # Dormand-Prince 5(4)
                for i in range(5):
                    tmp[i] = y[i] + dt * (0.2 * f0[i])
                ok = ok and _eval(tmp, k2, w3, ix, iz_ix, uq, ct2, c2t, mod)
                for i in range(5):
                    tmp[i] = y[i] + dt * (3.0 / 40.0 * f0[i] + 9.0 / 40.0 * k2[i])
                ok = ok and _eval(tmp, k3, w3, ix, iz_ix, uq, ct2, c2t, mod)
                for i in range(5):
                    tmp[i] = y[i] + dt * (44.0 / 45.0 * f0[i] - 56.0 / 15.0 * k2[i]
                                          + 32.0 / 9.0 * k3[i])
                ok = ok and _eval(tmp, k4, w3, ix, iz_ix, uq, ct2, c2t, mod)
                for i in range(5):
                    tmp[i] = y[i] + dt * (19372.0 / 6561.0 * f0[i]
                                          - 25360.0 / 2187.0 * k2[i]
                                          + 64448.0 / 6561.0 * k3[i]
                                          - 212.0 / 729.0 * k4[i])
                ok = ok and _eval(tmp, k5, w3, ix, iz_ix, uq, ct2, c2t, mod)
                for i in range(5):
                    tmp[i] = y[i] + dt * (9017.0 / 3168.0 * f0[i]
                                          - 355.0 / 33.0 * k2[i]
                                          + 46732.0 / 5247.0 * k3[i]
                                          + 49.0 / 176.0 * k4[i]
                                          - 5103.0 / 18656.0 * k5[i])
                ok = ok and _eval(tmp, k6, w3, ix, iz_ix, uq, ct2, c2t, mod)
                for i in range(5):
                    y_new[i] = y[i] + dt * (35.0 / 384.0 * f0[i]
                                            + 500.0 / 1113.0 * k3[i]
                                            + 125.0 / 192.0 * k4[i]
                                            - 2187.0 / 6784.0 * k5[i]
                                            + 11.0 / 84.0 * k6[i])
                ok = ok and _eval(y_new, err_v, w3, ix, iz_ix, uq, ct2, c2t, mod)
                if ok:
                    err = 0.0
                    for i in range(5):
                        e_i = dt * (
                            (35.0 / 384.0 - 5179.0 / 57600.0) * f0[i]
                            + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3[i]
                            + (125.0 / 192.0 - 393.0 / 640.0) * k4[i]
                            + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5[i]
                            + (11.0 / 84.0 - 187.0 / 2100.0) * k6[i]
                            - (1.0 / 40.0) * err_v[i]
                        )
                        scale = abs_tol + rel_tol * max(abs(y[i]), abs(y_new[i]))
                        e = abs(e_i) / scale
                        if e > err:
                            err = e
            if not ok:
                status = STATUS_SINGULARITY
                break
            if err <= 1.0:
                accepted = True
                if err > 1e-30:
                    fac = 0.9 * err ** -0.2
                    if fac > 5.0:
                        fac = 5.0
                else:
                    fac = 5.0
                dt_next = dt * fac
            else:
                fac = 0.9 * err ** -0.2
                if fac < 0.1:
                    fac = 0.1
                dt_next = dt * fac
                if dt_next < dt_min:
                    status = STATUS_UNDERFLOW
                    break
                dt = dt_next
        if status != STATUS_OK:
            break
        t_new = t + dt
        # derivative at the new point for Hermite interpolation / FSAL
        if method == METHOD_DOPRI5:
            for i in range(5):
                f1[i] = err_v[i]
        else:
            if not _eval(y_new, f1, w3, ix, iz_ix, uq, ct2, c2t, mod):
                status = STATUS_SINGULARITY
                break
        # dense output on (t, t_new]
        while idx < n_out and t_out[idx] <= t_new + 1e-16 * abs(t_new):
            ts = t_out[idx]
            if ts > t_new:
                ts = t_new
            h = t_new - t
            s = (ts - t) / h if h > 0.0 else 1.0
            h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
            h10 = s * (1.0 - s) ** 2
            h01 = s * s * (3.0 - 2.0 * s)
            h11 = s * s * (s - 1.0)
            for i in range(5):
                out[idx, i] = (h00 * y[i] + h10 * h * f0[i]
                               + h01 * y_new[i] + h11 * h * f1[i])
            out[idx, 5] = w3
            idx += 1
        for i in range(5):
            y[i] = y_new[i]
        t = t_new
        steps += 1
        # --- noise hooks over the accepted dt ---
        if noise_on:
            if g_ab > 0.0 or g_g > 0.0:
                sb = math.sin(y[1])
                if g_ab > 0.0:
                    decay = math.exp(-g_ab * dt)
                    spread = math.sqrt(1.0 - decay * decay)
                    sig_a = math.sqrt(kt_gas / (ix * sb * sb)) if sb != 0.0 else 0.0
                    sig_b = math.sqrt(kt_gas / ix)
                    y[3] = y[3] * decay + sig_a * spread * np.random.standard_normal()
                    y[4] = y[4] * decay + sig_b * spread * np.random.standard_normal()
                if g_g > 0.0:
                    decay = math.exp(-g_g * dt)
                    spread = math.sqrt(1.0 - decay * decay)
                    sig_s = math.sqrt(kt_gas / iz)
                    w3 = w3 * decay + sig_s * spread * np.random.standard_normal()
            if shot_rate > 0.0 and shot_kick > 0.0:
                n_kicks = np.random.poisson(shot_rate * dt)
                if n_kicks > 0:
                    scale = shot_kick * math.sqrt(n_kicks)
                    y[3] = y[3] + scale * np.random.standard_normal()
                    y[4] = y[4] + scale * np.random.standard_normal()
                    w3 = w3 + scale * np.random.standard_normal()
        dt = dt_next
        if dt > dt_max:
            dt = dt_max
        if dt < dt_min:
            dt = dt_min
    if idx < n_out and status == STATUS_OK:
        status = STATUS_MAX_STEPS
    return out[:idx], status, steps


@dataclass(frozen=True)
class KernelSpec:
    """Resolved scalar arguments for run_trajectory."""

    ix: float
    iz: float
    uq: float
    ct2: float
    c2t: float
    sig_code: int
    r2: float
    sched_t: np.ndarray
    sched_chi: np.ndarray
    g_ab: float
    g_g: float
    kt_gas: float
    shot_rate: float
    shot_kick: float
    noise_on: bool
    rel_tol: float
    abs_tol: float
    dt_init: float
    dt_min: float
    dt_max: float
    max_steps: int
    method: int


def make_kernel_spec(
    particle: ParticleParams,
    trap: TrapParams,
    feedback: FeedbackConfig | None = None,
    noise: NoiseConfig | None = None,
    integ: IntegratorConfig | None = None,
    method: str = "rk4",
) -> KernelSpec:
    feedback = feedback or FeedbackConfig(signal_choice="off", chi=0.0)
    noise = noise or NoiseConfig()
    integ = integ or IntegratorConfig()
    sig_code = SIGNAL_CHOICES.index(feedback.signal_choice)
    if feedback.chi == 0.0 and not feedback.schedule:
        sig_code = 0
    sched_t = np.array([0.0] + [t for t, _ in feedback.schedule])
    sched_chi = np.array([feedback.chi] + [c for _, c in feedback.schedule])
    g_ab, g_g = noise.resolved_gammas(particle)
    return KernelSpec(
        ix=particle.inertia_x,
        iz=particle.inertia_z,
        uq=trap.field_amp**2 / 4.0 * (particle.alpha_z - particle.alpha_x),
        ct2=math.cos(trap.theta) ** 2,
        c2t=math.cos(2.0 * trap.theta),
        sig_code=sig_code,
        r2=particle.radius**2,
        sched_t=sched_t,
        sched_chi=sched_chi,
        g_ab=g_ab,
        g_g=g_g,
        kt_gas=BOLTZMANN * noise.gas_temperature,
        shot_rate=noise.shot_rate,
        shot_kick=noise.shot_kick_rms,
        noise_on=noise.any_enabled,
        rel_tol=integ.rel_tol,
        abs_tol=integ.abs_tol,
        dt_init=integ.dt_init,
        dt_min=integ.dt_min,
        dt_max=integ.dt_max,
        max_steps=integ.max_steps,
        method=METHOD_RK4 if method == "rk4" else METHOD_DOPRI5,
    )


def integrate_fast(
    y0: np.ndarray,
    omega3: float,
    t0: float,
    t_out: np.ndarray,
    spec: KernelSpec,
    seed: int = 0,
) -> tuple[np.ndarray, int, int]:
    """Run the kernel; raises on singularity/underflow like the slow path."""
    out, status, steps = run_trajectory(
        np.asarray(y0, dtype=float),
        float(omega3),
        float(t0),
        np.asarray(t_out, dtype=float),
        spec.ix, spec.iz, spec.uq, spec.ct2, spec.c2t,
        spec.sig_code, spec.r2, spec.sched_t, spec.sched_chi,
        spec.g_ab, spec.g_g, spec.kt_gas, spec.shot_rate, spec.shot_kick,
        spec.noise_on, seed,
        spec.rel_tol, spec.abs_tol, spec.dt_init, spec.dt_min, spec.dt_max,
        spec.max_steps, spec.method,
    )
    return out, status, steps


def raise_for_status(status: int) -> None:
    if status == STATUS_SINGULARITY:
        raise SingularityGuard("trajectory reached the beta pole guard")
    if status == STATUS_UNDERFLOW:
        raise StepUnderflow("adaptive step fell below dt_min")
    if status == STATUS_MAX_STEPS:
        raise StepUnderflow("max_steps exhausted before t_end")
