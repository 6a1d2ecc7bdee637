"""Feed-forward learning demo: watch the knee pendulum's tracking error
shrink across learning iterations, then generalize the learned signal into
velocity/friction/gravity coefficients."""

import numpy as np

from soccerbot import actuation
from soccerbot.actuation import ReferenceTrajectory, fit_coefficients

print("knee pendulum, 2 s sinusoid, gravity load, low-gain position spring")
rms, model = actuation.run_ilc_benchmark(iterations=10)
print(f"\n{'iter':>4}  {'rms [rad]':>10}  bar")
for i, value in enumerate(rms):
    bar = "#" * int(round(60 * value / rms[0]))
    print(f"{i:>4}  {value:>10.5f}  {bar}")
print(f"\nfinal error is {100 * rms[-1] / rms[0]:.1f}% of the unassisted run")

# The learned per-sample signal generalizes: fit it against the velocity,
# friction-sign, and gravity regressors.
t = np.arange(250) * 0.008
q_des = 0.9 + 0.5 * np.sin(2 * np.pi * 0.5 * t - np.pi / 2)
traj = ReferenceTrajectory(q_des, dt=0.008)
pose_gravity = np.array([
    actuation.gravity_torque(
        np.eye(20)[3] * q, "left_knee_pitch") for q in q_des])
fitted, singular = fit_coefficients(model, traj, pose_gravity)
print(f"\nfit: k_v={fitted.k_v:.4f}  k_c={fitted.k_c:.4f}  k_g={fitted.k_g:.4f}"
      f"  (singular={singular})")
print(f"residual after fit: {np.sqrt(np.mean(fitted.u ** 2)):.5f} rad rms")
print("k_g should sit near 1/K_p =", 1 / 8.0)
