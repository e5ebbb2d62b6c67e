"""Sample a room-temperature orientation ensemble and check its statistics.

A dumbbell in the tweezer has two librational position coordinates and two
velocity coordinates, so the mean shifted energy of a 300 K bath is 2 k_B T
(~600 K) and the energies follow an n=1 Maxwell-Boltzmann shape.
"""
import numpy as np

from nanorotor import default_experiment, run_experiment
from nanorotor.ensemble import fit_maxwell_boltzmann

cfg = default_experiment(n_trajectories=1000, signal_choice="off",
                         t_final=1e-6, seed=1)
result = run_experiment(cfg)
energies = result.initial_energies

amp, temperature, residual = fit_maxwell_boltzmann(energies, n_dof=1)

print(f"sampled {energies.size} states at T = 300 K")
print(f"mean shifted energy : {energies.mean():7.1f} K   (expect ~600 K)")
print(f"n=1 fit temperature : {temperature:7.1f} K   (expect ~300 K)")
print(f"fit residual        : {residual:7.3f}")

hist, edges = np.histogram(energies, bins=12, density=True)
peak = hist.max()
for h, lo in zip(hist, edges):
    print(f"  {lo:7.0f} K | {'#' * int(40 * h / peak)}")
