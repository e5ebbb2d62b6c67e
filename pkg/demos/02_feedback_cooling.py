"""Cool a small ensemble with parametric feedback and watch the mean energy.

Linear polarization (theta = 0) cools only one of the two precession modes,
so the ensemble settles near 300 K.  Elliptical polarization (theta =
4 pi/32) couples both modes to the feedback and cools far deeper.
"""
import math

from nanorotor import default_experiment, run_experiment

for theta, label in ((0.0, "linear polarization"),
                     (4 * math.pi / 32, "elliptical, theta = 4pi/32")):
    cfg = default_experiment(theta=theta, n_trajectories=20, seed=7,
                             signal_choice="sum", chi=1e7, t_final=40e-3)
    result = run_experiment(cfg)
    mean = result.mean_energy()
    print(f"\n{label}:")
    for k in range(0, cfg.n_samples, cfg.n_samples // 8):
        t = result.times[k]
        print(f"  t = {t * 1e3:5.1f} ms   <energy> = {mean[k]:10.3f} K")
