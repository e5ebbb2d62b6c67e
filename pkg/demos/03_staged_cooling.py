"""Drive a single trajectory to micro-kelvin energies with a staged schedule.

The feedback gain chi is raised by a factor of ten every millisecond from
t = 3 ms.  Each boost produces an abrupt increase in the cooling rate.
"""
import math

from nanorotor import (
    ExperimentConfig,
    FeedbackConfig,
    IntegratorConfig,
    ThermalConfig,
    default_setup,
)
from nanorotor.ensemble import staged_chi_run
from nanorotor.feedback import STAGED_CHI_SCHEDULE, chi_at

particle, trap = default_setup(4 * math.pi / 32)
feedback = FeedbackConfig(signal_choice="sum", chi=1e7,
                          schedule=STAGED_CHI_SCHEDULE)
cfg = ExperimentConfig(
    particle=particle,
    trap=trap,
    thermal=ThermalConfig(seed=42),
    feedback=feedback,
    integ=IntegratorConfig(rel_tol=1e-9, abs_tol=1e-13, dt_max=5e-7),
    t_final=9e-3,
    n_samples=901,
)

times, energies, status = staged_chi_run(cfg)
assert status == 0

print(" t [ms]    chi [s/m^2]    energy [K]")
for k in range(0, times.size, 50):
    chi = chi_at(times[k], feedback)
    print(f"  {times[k] * 1e3:5.2f}   {chi:12.1e}   {energies[k]:12.4e}")
print(f"\nfinal energy after 9 ms: {energies[-1]:.3e} K")
