"""Gait generator demo: phase-locked joint waveforms, the half-period mirror
identity, and attitude feedback injection."""

import numpy as np

from soccerbot import gait, model
from soccerbot.attitude import AttitudeEstimate
from soccerbot.gait import GaitCommand, GaitParams

params = GaitParams()
period = 1.0 / params.freq
dt = period / 80.0

state = gait.init_state(params)
trace = []
for _ in range(160):  # two periods
    state, targets = gait.gait_step(state, GaitCommand(vx=0.6), params,
                                    AttitudeEstimate(), dt)
    trace.append(targets)
trace = np.array(trace)

left_knee = trace[:, model.joint_index("left_knee_pitch")]
right_knee = trace[:, model.joint_index("right_knee_pitch")]
print("knee waveforms over one period (L = left, R = right):")
for i in range(80, 160, 5):
    def bar(v):
        return int(round((v - params.k0) / params.a_short * 30))
    row = [" "] * 34
    row[max(0, bar(left_knee[i]))] = "L"
    row[max(0, bar(right_knee[i]))] = "R"
    print(f"  phase {(i - 80) / 80:4.2f}T |{''.join(row)}|")

state = gait.init_state(params)
zero = []
for _ in range(160):
    state, targets = gait.gait_step(state, GaitCommand(), params,
                                    AttitudeEstimate(), dt)
    zero.append(targets)
zero = np.array(zero)
worst = max(np.max(np.abs(zero[t] - model.mirror(zero[t + 40])))
            for t in range(100))
print(f"\nhalf-period mirror identity (zero command): max deviation {worst:.2e} rad")

tilted = gait.init_state(params)
fb = GaitParams(kp_pitch=0.4)
_, upright = gait.gait_step(gait.init_state(fb), GaitCommand(), fb,
                            AttitudeEstimate(), dt)
_, leaning = gait.gait_step(gait.init_state(fb), GaitCommand(), fb,
                            AttitudeEstimate(pitch=0.1), dt)
delta = leaning - upright
print("forward lean of 0.1 rad with kp_pitch=0.4 shifts:")
for name in ("left_hip_pitch", "left_ankle_pitch", "left_knee_pitch"):
    print(f"  {name:18s} {delta[model.joint_index(name)]:+.4f} rad")
