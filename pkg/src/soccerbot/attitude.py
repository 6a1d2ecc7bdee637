"""Attitude estimation from the IMU board, plus fall detection.

Complementary filter: gyro rates are integrated for the high-frequency part
and blended toward accelerometer gravity angles with weight alpha, gated off
when the specific-force magnitude is far from 1 g (violent motion). Axes:
x forward, y left, z up; pitch > 0 leans forward (prone side).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

GRAVITY = 9.81
ACCEL_GATE = 2.94  # +-0.3 g band around 1 g where the accelerometer is trusted


@dataclass(frozen=True)
class ImuSample:
    gyro: tuple[float, float, float]   # rad/s, body frame
    accel: tuple[float, float, float]  # m/s^2 specific force, (0,0,+g) at rest


@dataclass(frozen=True)
class AttitudeEstimate:
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    roll_rate: float = 0.0
    pitch_rate: float = 0.0
    yaw_rate: float = 0.0


def _wrap(angle: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def accel_angles(accel) -> tuple[float, float]:
    ax, ay, az = accel
    roll = math.atan2(ay, az)
    pitch = math.atan2(-ax, math.hypot(ay, az))
    return roll, pitch


def update_attitude(est: AttitudeEstimate, sample: ImuSample, dt: float,
                    alpha: float = 0.02) -> AttitudeEstimate:
    """One complementary-filter step. Yaw integrates the z gyro only."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    wx, wy, wz = sample.gyro
    norm = math.sqrt(sum(a * a for a in sample.accel))
    a_eff = alpha if abs(norm - GRAVITY) <= ACCEL_GATE else 0.0
    roll_a, pitch_a = accel_angles(sample.accel)
    roll = (1.0 - a_eff) * (est.roll + wx * dt) + a_eff * roll_a
    pitch = (1.0 - a_eff) * (est.pitch + wy * dt) + a_eff * pitch_a
    yaw = est.yaw + wz * dt
    return AttitudeEstimate(roll=_wrap(roll), pitch=_wrap(pitch), yaw=yaw,
                            roll_rate=wx, pitch_rate=wy, yaw_rate=wz)


class FallState(enum.Enum):
    STABLE = "stable"
    FALLING = "falling"
    FALLEN_PRONE = "fallen_prone"
    FALLEN_SUPINE = "fallen_supine"


class FallDetector:
    """Instability detection with dwell-timed prone/supine resolution.

    STABLE -> FALLING once either tilt axis exceeds trigger_rad while moving
    outward; FALLING resolves to FALLEN_* after the tilt stays beyond
    fallen_rad for dwell_s, prone vs supine by the sign of pitch (ties are
    prone). Only an external reset (after a get-up) returns to STABLE.
    """

    def __init__(self, trigger_rad: float = 0.9, fallen_rad: float = 1.3,
                 dwell_s: float = 0.5):
        self.trigger_rad = trigger_rad
        self.fallen_rad = fallen_rad
        self.dwell_s = dwell_s
        self.state = FallState.STABLE
        self._dwell = 0.0

    def reset(self):
        self.state = FallState.STABLE
        self._dwell = 0.0

    def update(self, est: AttitudeEstimate, dt: float) -> FallState:
        if self.state == FallState.STABLE:
            roll_out = abs(est.roll) > self.trigger_rad and est.roll * est.roll_rate > 0
            pitch_out = abs(est.pitch) > self.trigger_rad and est.pitch * est.pitch_rate > 0
            if roll_out or pitch_out:
                self.state = FallState.FALLING
                self._dwell = 0.0
        elif self.state == FallState.FALLING:
            if max(abs(est.roll), abs(est.pitch)) > self.fallen_rad:
                self._dwell += dt
            else:
                self._dwell = 0.0
            if self._dwell >= self.dwell_s:
                self.state = (FallState.FALLEN_PRONE if est.pitch >= 0.0
                              else FallState.FALLEN_SUPINE)
        return self.state


def detect_fall(detector: FallDetector, est: AttitudeEstimate, dt: float) -> FallState:
    return detector.update(est, dt)
