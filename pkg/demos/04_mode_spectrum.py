"""Measure the two precession-mode peaks of an uncooled trajectory.

The conserved spin omega3 hybridizes the two librations into modes at
omega_+ and omega_-; both appear in the 45-degree detector signal, and
their locations match the analytic formulas given the trajectory's omega3.
"""
import math

import numpy as np

from nanorotor import default_setup
from nanorotor.ensemble import ENSEMBLE_TOLERANCES
from nanorotor.fastsim import integrate_fast, make_kernel_spec
from nanorotor.modes import coupling_frequency, normal_modes_elliptical
from nanorotor.spectral import estimate_psd, find_peaks, p45_series
from nanorotor.thermal import ThermalConfig, sample_state, trajectory_rng

particle, trap = default_setup(0.0)
thermal = ThermalConfig(temperature=300.0, seed=12)
rng = trajectory_rng(thermal.seed, 0)

# pick a draw whose spin splits the modes cleanly
state = sample_state(rng, trap, particle, thermal)
while abs(coupling_frequency(particle, state.omega3)) < 1.5e5:
    state = sample_state(rng, trap, particle, thermal)

spec = make_kernel_spec(particle, trap, integ=ENSEMBLE_TOLERANCES,
                        method="dopri5")
dt = 1e-7
t_out = np.arange(0.0, 8e-3, dt)
out, status, _ = integrate_fast(state.as_vector(), state.omega3, 0.0,
                                t_out, spec)
assert status == 0

psd = estimate_psd(p45_series(out[:, 0], out[:, 1]), dt, segment_length=65536)
peaks = sorted(find_peaks(psd, n=2), key=lambda p: p[0])

wc = coupling_frequency(particle, state.omega3)
modes = normal_modes_elliptical(trap.omega_xi2, trap.omega_eta2, wc)

print(f"spin omega3 = {state.omega3:.4e} rad/s "
      f"(coupling {wc:.3e} rad/s)")
print(f"analytic modes : {modes.omega_minus:.5e}  {modes.omega_plus:.5e} rad/s")
print("measured peaks :",
      "  ".join(f"{2 * math.pi * f:.5e}" for f, _, _ in peaks), "rad/s")
