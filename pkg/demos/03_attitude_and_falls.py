"""Attitude estimation demo: complementary filter convergence, gating under
violent motion, and the fall detector's state machine."""

import math

import numpy as np

from soccerbot.attitude import (AttitudeEstimate, FallDetector, FallState,
                                ImuSample, update_attitude)


def static_accel(roll, pitch, g=9.81):
    return (-g * math.sin(pitch),
            g * math.sin(roll) * math.cos(pitch),
            g * math.cos(roll) * math.cos(pitch))


print("== convergence to a static 30 degree roll ==")
truth = math.radians(30)
sample = ImuSample(gyro=(0, 0, 0), accel=static_accel(truth, 0))
est = AttitudeEstimate()
for step in range(251):
    if step % 50 == 0:
        print(f"  t={step * 0.008:4.2f}s  roll={math.degrees(est.roll):6.2f} deg")
    est = update_attitude(est, sample, 0.008, alpha=0.02)

print("\n== accelerometer gating at 15 m/s^2 ==")
est = AttitudeEstimate(roll=0.2)
out = update_attitude(est, ImuSample(gyro=(0.5, 0, 0), accel=(0, 0, 15.0)),
                      0.008, alpha=0.5)
print(f"  gated step uses pure gyro: roll {est.roll:.4f} -> {out.roll:.4f} "
      f"(= 0.2 + 0.5*0.008)")

print("\n== a simulated push and the fall state machine ==")
detector = FallDetector()
est = AttitudeEstimate()
pitch_rate = 1.6 / 0.3
pitch = 0.0
for step in range(300):
    dt = 0.008
    pitch = min(1.6, pitch + pitch_rate * dt) if step > 20 else 0.0
    rate = pitch_rate if 0 < pitch < 1.6 else 0.0
    sample = ImuSample(gyro=(0, rate, 0), accel=static_accel(0, pitch))
    est = update_attitude(est, sample, dt)
    state = detector.update(est, dt)
    if step % 25 == 0 or state != detector.state:
        print(f"  t={step * dt:4.2f}s pitch={math.degrees(est.pitch):6.1f} deg  {state.value}")
    if state == FallState.FALLEN_PRONE:
        print(f"  -> fallen prone at t={step * dt:.2f}s; a get-up motion would run now")
        break
