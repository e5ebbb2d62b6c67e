"""End-to-end acceptance suite.

Each test covers one numbered criterion and prints a single
``[PASS]``/``[FAIL]`` line with the measured numbers (run with ``-s`` to
see them).  Heavy ensembles are shared through module-scoped fixtures;
the whole module takes roughly half an hour on one core.
"""
import dataclasses
import hashlib
import math
import time

import numpy as np
import pytest
from scipy.constants import k as BOLTZMANN
from scipy.integrate import solve_ivp

from nanorotor import (
    ExperimentConfig,
    FeedbackConfig,
    IntegratorConfig,
    NoiseConfig,
    ThermalConfig,
    default_experiment,
    default_setup,
    run_experiment,
)
from nanorotor.ensemble import (
    ENSEMBLE_TOLERANCES,
    fit_maxwell_boltzmann,
    run_one,
    shifted_energy_kelvin_series,
    staged_chi_run,
    theta_sweep,
)
from nanorotor.errors import FitDegenerate, PeaksNotFound
from nanorotor.fastsim import STATUS_OK, integrate_fast, make_kernel_spec
from nanorotor.feedback import STAGED_CHI_SCHEDULE
from nanorotor.modes import (
    axial_displacement_ratio,
    conserved_precession_quantity,
    coupling_frequency,
    fit_modes,
    normal_modes_elliptical,
    small_angle_rhs,
)
from nanorotor.params import OMEGA_CALIBRATION
from nanorotor.rigidbody import (
    EulerState,
    SmallAngleState,
    fold_alpha,
    potential_above_minimum,
    potential_gradients,
)
from nanorotor.spectral import estimate_psd, find_peaks, p45_series
from nanorotor.thermal import sample_state, trajectory_rng

from rate_oracle import rate_draw

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

THETA_DEEP = 4.0 * math.pi / 32.0
T_RUN = 80e-3


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# shared heavy runs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def thermal_1000():
    """Criterion 1: N=1000 thermal draw, no dynamics needed beyond t=0."""
    cfg = default_experiment(n_trajectories=1000, signal_choice="off",
                             t_final=1e-6, seed=20260827)
    cfg = dataclasses.replace(cfg, n_samples=2)
    return run_experiment(cfg)


@dataclasses.dataclass
class CooledEnsemble:
    """Criterion 2/3 data: final energies plus per-trajectory mode fits."""

    final_energies: np.ndarray
    statuses: np.ndarray
    ratio: np.ndarray          # final-window min/max mode-amplitude ratio
    drift: np.ndarray          # regression drift of A-^2 - A+^2 over cooldown
    fit_ok: np.ndarray         # fit succeeded (residual within cap)
    sample_trajectory: np.ndarray | None   # (n_t, 6) dense tail of one run
    sample_times_tail: np.ndarray | None
    cfg: ExperimentConfig


@pytest.fixture(scope="module")
def cooled_500():
    """The criterion-2 ensemble: N=500, linear polarization, sum signal.

    Trajectories are processed one at a time so the dense fit windows
    (15 sliding 40 us windows plus a 4 ms final window) never require
    holding all states in memory.
    """
    cfg = default_experiment(theta=0.0, n_trajectories=500, seed=424242,
                             signal_choice="sum", chi=1e7, t_final=T_RUN)
    spec = make_kernel_spec(cfg.particle, cfg.trap, cfg.feedback, cfg.noise,
                            cfg.integ, cfg.method)

    w_len, w_dt = 40e-6, 1e-7
    slide_starts = np.linspace(5e-3, 71e-3, 15)
    slide = [np.arange(s, s + w_len + w_dt / 2, w_dt) for s in slide_starts]
    tail = np.arange(T_RUN - 4e-3, T_RUN + 1e-7, 2e-7)
    coarse = np.linspace(0.0, T_RUN, 161)
    t_out = np.unique(np.concatenate(slide + [tail, coarse]))
    slide_masks = [(t_out >= s - w_dt / 4) & (t_out <= s + w_len + w_dt / 4)
                   for s in slide_starts]
    tail_mask = t_out >= T_RUN - 4e-3

    n = cfg.n_trajectories
    finals = np.full(n, np.nan)
    statuses = np.empty(n, dtype=int)
    ratio = np.full(n, np.nan)
    drift = np.full(n, np.nan)
    fit_ok = np.zeros(n, dtype=bool)
    sample_traj = sample_times = None

    def window_fit(out, mask, modes, max_residual):
        xi = np.vectorize(fold_alpha)(out[mask, 0])
        eta = math.pi / 2.0 - out[mask, 1]
        return fit_modes(t_out[mask], xi, eta, out[mask, 3], -out[mask, 4],
                         modes, max_residual=max_residual)

    for i in range(n):
        out, status = run_one(i, cfg, spec, t_out)
        statuses[i] = status
        e = shifted_energy_kelvin_series(out, cfg.particle, cfg.trap)
        finals[i] = e[-1]
        if status != STATUS_OK:
            continue
        wc = coupling_frequency(cfg.particle, out[0, 5])
        modes = normal_modes_elliptical(cfg.trap.omega_xi2,
                                        cfg.trap.omega_eta2, wc)
        try:
            # Drift comes from short (40 us) windows only: they see a
            # frozen snapshot of the slow dynamics, whereas a long
            # window averages over the cooling decay and would bias
            # the last regression point low.
            d_vals, centers, s0 = [], [], None
            for s, m in zip(slide_starts, slide_masks):
                f = window_fit(out, m, modes, 1.0)
                d_vals.append(f.amp_minus**2 - f.amp_plus**2)
                centers.append(s + w_len / 2.0)
                if s0 is None:
                    s0 = f.amp_plus**2 + f.amp_minus**2
            slope = np.polyfit(centers, d_vals, 1)[0]
            drift[i] = slope * T_RUN / s0
            # The amplitude ratio needs the long window instead: only
            # a span covering many beat periods separates a genuine
            # minority mode from the counter-rotating coordinate
            # artifact of a circular orbit.
            f_tail = window_fit(out, tail_mask, modes, 1.0)
            ratio[i] = f_tail.amplitude_ratio
            fit_ok[i] = True
        except FitDegenerate:
            fit_ok[i] = False
        if sample_traj is None and abs(wc) > 1.2e5:
            sample_traj = out[tail_mask].copy()
            sample_times = t_out[tail_mask].copy()

    return CooledEnsemble(finals, statuses, ratio, drift, fit_ok,
                          sample_traj, sample_times, cfg)


@pytest.fixture(scope="module")
def sweep_points():
    """Criterion 4/6 cooling data: 8 theta points, N=200 each."""
    base = default_experiment(theta=0.0, n_trajectories=200, seed=515151,
                              signal_choice="sum", chi=1e7, t_final=T_RUN)
    thetas = np.linspace(0.0, THETA_DEEP, 8)
    return theta_sweep(thetas, base)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_1_thermal_ensemble(thermal_1000):
    e0 = thermal_1000.initial_energies
    mean = float(e0.mean())
    _, temp, _ = fit_maxwell_boltzmann(e0, n_dof=1)
    ok = abs(mean - 600.0) < 0.05 * 600.0 and abs(temp - 300.0) < 0.05 * 300.0
    report("criterion 1 (thermal ensemble)", ok,
           f"N=1000 mean={mean:.1f} K (target 600 +- 5%), "
           f"n=1 fit T={temp:.1f} K (target 300 +- 5%)")


def test_criterion_2_linear_cooling_floor(cooled_500):
    e = cooled_500.final_energies[cooled_500.statuses == STATUS_OK]
    mean = float(np.nanmean(e))
    _, t0, r0 = fit_maxwell_boltzmann(e, n_dof=0)
    _, t1, r1 = fit_maxwell_boltzmann(e, n_dof=1)
    ok = abs(mean - 300.0) < 0.10 * 300.0 and r0 < r1
    report("criterion 2 (linear-polarization cooling floor)", ok,
           f"N=500 mean={mean:.1f} K (target 300 +- 10%), "
           f"fit residuals n=0: {r0:.3f} < n=1: {r1:.3f}")


def test_criterion_3_single_mode_survival(cooled_500):
    ok_traj = (cooled_500.statuses == STATUS_OK)
    good = (cooled_500.fit_ok
            & (cooled_500.ratio < 1e-3)
            & (np.abs(cooled_500.drift) < 0.01))
    frac = good[ok_traj].mean()
    ok = frac >= 0.95
    n_ratio = int((cooled_500.fit_ok & (cooled_500.ratio >= 1e-3))[ok_traj].sum())
    n_drift = int((cooled_500.fit_ok & (np.abs(cooled_500.drift) >= 0.01))[ok_traj].sum())
    report("criterion 3 (single-mode survival)", ok,
           f"{frac:.1%} of trajectories pass (need >= 95%): "
           f"amplitude ratio < 1e-3 and |d(A-^2-A+^2)| drift < 1% "
           f"[{n_ratio} ratio fails, {n_drift} drift fails, "
           f"{int((~cooled_500.fit_ok)[ok_traj].sum())} fit fails]")


@pytest.fixture(scope="module")
def heating_200():
    cfg = default_experiment(theta=THETA_DEEP, n_trajectories=200, seed=616161,
                             signal_choice="xi", chi=1e7, t_final=T_RUN)
    cfg = dataclasses.replace(
        cfg, integ=dataclasses.replace(cfg.integ, max_steps=2_000_000))
    return run_experiment(cfg)


def test_criterion_4_elliptical_deep_cooling(sweep_points, heating_200):
    deep = sweep_points[-1]
    n_heat = 0
    n = heating_200.statuses.size
    for i in range(n):
        if heating_200.statuses[i] != STATUS_OK:
            # runaway heating exhausts the step budget or hits the pole
            # guard long before 80 ms; truncation is the heating outcome
            n_heat += 1
        else:
            blocks = heating_200.energies[i, 1:].reshape(40, 20).mean(axis=1)
            n_heat += blocks[-1] > blocks[-2]
    frac = n_heat / n
    ok = deep.mean_energy < 10.0 and frac >= 0.80
    report("criterion 4 (elliptical deep cooling / single-coordinate heating)",
           ok,
           f"theta=4pi/32 sum-signal mean={deep.mean_energy:.2f} K (< 10 K); "
           f"xi-only heating by end of run in {frac:.1%} (need >= 80%)")


def test_criterion_5_staged_chi_protocol():
    t_start = time.time()
    particle, trap = default_setup(THETA_DEEP)
    extended = tuple((3e-3 + 1e-3 * k, 10.0 ** (8 + k)) for k in range(9))
    cfg = ExperimentConfig(
        particle=particle,
        trap=trap,
        thermal=ThermalConfig(seed=98765),
        feedback=FeedbackConfig(signal_choice="sum", chi=1e7,
                                schedule=extended),
        integ=IntegratorConfig(rel_tol=1e-9, abs_tol=1e-13, dt_max=5e-7),
        t_final=13e-3,
        n_samples=13001,
    )
    t, e, status = staged_chi_run(cfg)
    wall = time.time() - t_start
    final = float(e[-1])
    # cycle-averaged log-energy slope on both sides of every boundary
    def slope(lo, hi):
        m = (t >= lo) & (t <= hi)
        return np.polyfit(t[m], np.log(e[m]), 1)[0]
    # the standard schedule stops at the 7 ms boundary; beyond it the
    # decade-per-stage pattern makes the log-slope saturate, so the
    # boundary-rate check applies to the standard boundaries only
    boundaries = [t_b for t_b, _ in STAGED_CHI_SCHEDULE]
    increases = [slope(b + 0.1e-3, b + 0.9e-3) < slope(b - 0.9e-3, b - 0.1e-3)
                 for b in boundaries]
    ok = (status == STATUS_OK and final <= 1e-6 and all(increases)
          and wall < 60.0)
    report("criterion 5 (staged cooling-strength protocol)", ok,
           f"final energy {final:.2e} K (<= 1e-6 K), rate increase at "
           f"{sum(increases)}/{len(boundaries)} schedule boundaries, "
           f"wall {wall:.1f} s (< 60 s)")


def test_criterion_6_theta_sweep_shape(sweep_points):
    means = np.array([p.mean_energy for p in sweep_points])
    sems = np.array([p.sem for p in sweep_points])
    near300 = abs(means[0] - 300.0) < max(0.10 * 300.0, 2.0 * sems[0])
    mono = all(
        means[i + 1] <= means[i] + 2.0 * math.hypot(sems[i], sems[i + 1])
        for i in range(len(means) - 1)
    )
    plateau = abs(means[-1] - means[-2]) < max(
        2.0 * math.hypot(sems[-1], sems[-2]), 0.1 * means[-2])
    ok = near300 and mono and plateau
    detail = ", ".join(f"{m:.3g}" for m in means)
    report("criterion 6 (ellipticity sweep shape)", ok,
           f"means [{detail}] K: theta=0 ~300 K ({near300}), monotone within "
           f"2 SEM ({mono}), plateau by 4pi/32 ({plateau})")


def _uncooled_psd_trajectory():
    """A thermal trajectory with a well-split mode pair, run uncooled."""
    particle, trap = default_setup(0.0)
    thermal = ThermalConfig(temperature=300.0, seed=31415)
    rng = trajectory_rng(thermal.seed, 0)
    for _ in range(100):
        s = sample_state(rng, trap, particle, thermal)
        if abs(coupling_frequency(particle, s.omega3)) > 1.5e5:
            break
    spec = make_kernel_spec(particle, trap, integ=ENSEMBLE_TOLERANCES,
                            method="dopri5")
    t_out = np.arange(0.0, 10e-3, 1e-7)
    out, status, _ = integrate_fast(s.as_vector(), s.omega3, 0.0, t_out, spec)
    assert status == STATUS_OK
    return particle, trap, s.omega3, t_out, out


def test_criterion_7_spectral_signatures(cooled_500):
    # (a) uncooled trajectory: both mode peaks at their analytic locations
    particle, trap, w3, t_unc, out_unc = _uncooled_psd_trajectory()
    wc = coupling_frequency(particle, w3)
    modes = normal_modes_elliptical(trap.omega_xi2, trap.omega_eta2, wc)
    psd = estimate_psd(p45_series(out_unc[:, 0], out_unc[:, 1]), 1e-7,
                       segment_length=65536)
    # restrict to the librational band so trap harmonics (2w, 3w) never
    # outrank the weaker of the two mode peaks
    band = (psd.omega > 0.8 * trap.omega) & (psd.omega < 1.2 * trap.omega)
    psd = dataclasses.replace(psd, frequencies=psd.frequencies[band],
                              power=psd.power[band])
    peaks = find_peaks(psd, n=2)
    got = sorted(2.0 * math.pi * p[0] for p in peaks)
    want = sorted([modes.omega_plus, modes.omega_minus])
    errs = [abs(g - w) / w for g, w in zip(got, want)]
    two_peaks_ok = max(errs) < 0.02

    # (b) after linear-polarization cooling exactly one peak survives
    tail = cooled_500.sample_trajectory
    dt = float(cooled_500.sample_times_tail[1] - cooled_500.sample_times_tail[0])
    psd_c = estimate_psd(p45_series(tail[:, 0], tail[:, 1]), dt,
                         segment_length=8192)
    wcc = coupling_frequency(cooled_500.cfg.particle, tail[0, 5])
    mc = normal_modes_elliptical(cooled_500.cfg.trap.omega_xi2,
                                 cooled_500.cfg.trap.omega_eta2, wcc)
    def band_height(p, w, rel=0.02):
        m = (p.omega > w * (1 - rel)) & (p.omega < w * (1 + rel))
        return float(p.power[m].max())
    h_plus = band_height(psd_c, mc.omega_plus)
    h_minus = band_height(psd_c, mc.omega_minus)
    floor = float(np.median(psd_c.power))
    hi, lo = max(h_plus, h_minus), min(h_plus, h_minus)
    one_peak_ok = hi > 100.0 * floor and lo < 1e-3 * hi

    # (c) elliptical cooling: both peak heights fall across windows
    cfg_e = default_experiment(theta=THETA_DEEP, n_trajectories=1, seed=2718,
                               signal_choice="sum", chi=1e7, t_final=12e-3)
    spec_e = make_kernel_spec(cfg_e.particle, cfg_e.trap, cfg_e.feedback,
                              None, cfg_e.integ, cfg_e.method)
    t_e = np.arange(0.0, 12e-3, 2e-7)
    out_e, status_e = run_one(0, cfg_e, spec_e, t_e)
    assert status_e == STATUS_OK
    wce = coupling_frequency(cfg_e.particle, out_e[0, 5])
    me = normal_modes_elliptical(cfg_e.trap.omega_xi2, cfg_e.trap.omega_eta2,
                                 wce)
    sig = p45_series(out_e[:, 0], out_e[:, 1])
    n_win = t_e.size // 3
    heights = []
    for k in range(3):
        pw = estimate_psd(sig[k * n_win:(k + 1) * n_win], 2e-7,
                          segment_length=8192)
        heights.append((band_height(pw, me.omega_plus),
                        band_height(pw, me.omega_minus)))
    falling = all(heights[k + 1][j] < heights[k][j]
                  for k in range(2) for j in range(2))

    ok = two_peaks_ok and one_peak_ok and falling
    report("criterion 7 (spectral signatures)", ok,
           f"uncooled peak errors {errs[0]:.4f}/{errs[1]:.4f} (< 0.02); "
           f"cooled peak ratio {lo / hi:.2e} (< 1e-3); elliptical peak "
           f"heights monotone falling: {falling}")


def test_criterion_8_cooling_rate_oracle():
    particle, _ = default_setup(0.0)
    rng = np.random.default_rng(20260827)
    errs = []
    for k in range(20):
        sim, pred = rate_draw(rng, k, particle)
        errs.append(abs(sim - pred) / abs(pred))
    worst = max(errs)
    ok = worst < 0.05
    report("criterion 8 (cycle-averaged cooling-rate oracle)", ok,
           f"20 random draws, worst relative error {worst:.3%} (< 5%)")


def test_criterion_9_conservation_suite():
    particle, trap = default_setup(0.1)
    thermal = ThermalConfig(seed=999)
    rng = trajectory_rng(thermal.seed, 0)
    s = sample_state(rng, trap, particle, thermal)
    spec = make_kernel_spec(
        particle, trap,
        integ=IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, dt_max=1e-7),
        method="dopri5")
    t_out = np.linspace(0.0, 1e-3, 101)
    out, status, _ = integrate_fast(s.as_vector(), s.omega3, 0.0, t_out, spec)
    assert status == STATUS_OK
    e = shifted_energy_kelvin_series(out, particle, trap)
    e_drift = float((e.max() - e.min()) / e[0])
    w3_drift = float(np.abs(out[:, 5] - s.omega3).max() / abs(s.omega3))

    # linearized dynamics with feedback: the precession invariant holds
    # for linear polarization (degenerate trap frequencies)
    _, trap_lin = default_setup(0.0)
    wc = coupling_frequency(particle, s.omega3)
    chi_r2 = 1e7 * particle.radius**2

    def rhs(t, y):
        mod = 1.0 + chi_r2 * (y[0] * y[2] + y[1] * y[3])
        return small_angle_rhs(y, trap_lin.omega_xi2, trap_lin.omega_eta2,
                               wc, mod)

    y0 = np.array([0.05, -0.03, 1e4, 2e4])
    sol = solve_ivp(rhs, (0.0, 1e-3), y0, method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=True)
    ts = np.linspace(0.0, 1e-3, 2001)
    ys = sol.sol(ts)
    c = np.array([
        conserved_precession_quantity(
            SmallAngleState(xi=ys[0, j], eta=ys[1, j],
                            xi_dot=ys[2, j], eta_dot=ys[3, j]), wc)
        for j in range(ts.size)
    ])
    c_drift = float(np.abs(c - c[0]).max() / abs(c[0]))

    # analytic torque gradients against central finite differences
    g_rng = np.random.default_rng(7)
    worst_g = 0.0
    h = 1e-6
    for _ in range(50):
        a = g_rng.uniform(0.0, 2.0 * math.pi)
        b = g_rng.uniform(0.3, math.pi - 0.3)
        da, db = potential_gradients(a, b, trap, particle)

        def u(aa, bb):
            return potential_above_minimum(
                EulerState(alpha=aa, beta=bb, gamma=0.0,
                           alpha_dot=0.0, beta_dot=0.0, omega3=0.0),
                trap, particle)

        ua = (u(a + h, b) - u(a - h, b)) / (2 * h)
        ub = (u(a, b + h) - u(a, b - h)) / (2 * h)
        scale = abs(ua) + abs(ub) + 1e-30
        worst_g = max(worst_g, abs(da - ua) / scale, abs(db - ub) / scale)

    ok = e_drift < 1e-8 and w3_drift < 1e-8 and c_drift < 1e-8 and worst_g < 1e-6
    report("criterion 9 (conservation suite)", ok,
           f"energy drift {e_drift:.2e}, spin drift {w3_drift:.2e}, "
           f"precession-invariant drift {c_drift:.2e} (all < 1e-8); "
           f"gradient error {worst_g:.2e} (< 1e-6)")


def test_criterion_10_scalar_checks():
    particle, trap = default_setup(0.0)
    zr = axial_displacement_ratio(particle, trap)
    w3_rms = math.sqrt(BOLTZMANN * 300.0 / particle.inertia_z)
    wc_rms = abs(coupling_frequency(particle, w3_rms))
    m_s = particle.sphere_mass
    r2 = particle.radius**2
    ix_err = abs(particle.inertia_x - 14.0 / 5.0 * m_s * r2) / (14.0 / 5.0 * m_s * r2)
    iz_err = abs(particle.inertia_z - 4.0 / 5.0 * m_s * r2) / (4.0 / 5.0 * m_s * r2)
    ok = (abs(zr - 0.159) < 0.2 * 0.159
          and abs(wc_rms - 1.1e5) < 0.1 * 1.1e5
          and ix_err < 0.005 and iz_err < 0.005)
    report("criterion 10 (scalar checks)", ok,
           f"z_d/z_R={zr:.4f} (0.159 +- 20%), thermal coupling rms "
           f"{wc_rms:.3e} rad/s (1.1e5 +- 10%), inertia errors "
           f"{ix_err:.2e}/{iz_err:.2e} (< 0.5%)")


def test_criterion_11_noise_regimes(sweep_points):
    # 760 Torr: gas collisions dominate the feedback; re-thermalized
    cfg_hi = default_experiment(theta=0.0, n_trajectories=200, seed=717171,
                                signal_choice="sum", chi=1e7, t_final=2e-3)
    cfg_hi = dataclasses.replace(
        cfg_hi, noise=NoiseConfig(pressure=760.0, gas_temperature=300.0),
        n_samples=41)
    res_hi = run_experiment(cfg_hi)
    mean_hi = float(np.nanmean(res_hi.final_energies()))

    # 1e-3 Torr: negligible perturbation to the criterion-2 floor
    cfg_lo = default_experiment(theta=0.0, n_trajectories=200, seed=515151,
                                signal_choice="sum", chi=1e7, t_final=T_RUN)
    cfg_lo = dataclasses.replace(
        cfg_lo, noise=NoiseConfig(pressure=1e-3, gas_temperature=300.0))
    res_lo = run_experiment(cfg_lo)
    e_lo = res_lo.final_energies()
    e_lo = e_lo[np.isfinite(e_lo)]
    mean_lo = float(e_lo.mean())
    sem_lo = float(e_lo.std(ddof=1) / math.sqrt(e_lo.size))
    ref = sweep_points[0]              # same protocol, no gas, N=200
    delta = abs(mean_lo - ref.mean_energy)
    bound = 2.0 * math.hypot(sem_lo, ref.sem)

    ok = abs(mean_hi - 600.0) < 0.10 * 600.0 and delta < bound
    report("criterion 11 (noise regimes)", ok,
           f"760 Torr mean {mean_hi:.1f} K (600 +- 10%); 1e-3 Torr floor "
           f"{mean_lo:.1f} K vs gas-free {ref.mean_energy:.1f} K, "
           f"|delta|={delta:.1f} K < 2 SEM = {bound:.1f} K")


def test_criterion_12_figure_rendering(tmp_path_factory):
    """All five figure families render from completed scenario output,
    byte-for-byte reproducibly, without touching the simulation."""
    from nanorotor.cli import main as nanorotor_main
    from nanorotor_figs.cli import main as render_main
    from nanorotor_figs.io import latest_run

    root = tmp_path_factory.mktemp("figs") / "out"
    jobs = [
        ("fig2a", []),
        ("fig3b", ["--set", "ensemble.n=500"]),
        ("fig4a", []),
        ("fig4b", ["--set", "ensemble.n=12"]),
        ("fig5a", []),
    ]
    for scenario, extra in jobs:
        rc = nanorotor_main(["--scenario", scenario, "--seed", "1234",
                             "--out", str(root)] + extra)
        assert rc == 0, f"scenario {scenario} failed"

    t0 = time.monotonic()
    assert render_main([str(root)]) == 0
    render_wall = time.monotonic() - t0

    digests = {}
    for scenario, _ in jobs:
        run_dir = latest_run(root / scenario)
        for ext in ("png", "svg"):
            path = run_dir / f"{scenario}.{ext}"
            assert path.stat().st_size > 0
            digests[path] = hashlib.sha256(path.read_bytes()).hexdigest()

    assert render_main([str(root)]) == 0
    stable = all(
        hashlib.sha256(p.read_bytes()).hexdigest() == d
        for p, d in digests.items()
    )
    ok = stable and render_wall < 30.0
    report("criterion 12 (figure rendering)", ok,
           f"5 figure families rendered as PNG+SVG in {render_wall:.1f} s, "
           f"re-render byte-identical: {stable}")
