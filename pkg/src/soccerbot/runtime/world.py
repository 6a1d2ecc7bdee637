"""Kinematic world: robot pose, ball, battery, field geometry, and the
injected events (pushes, teleports) that exercise fall protection.

There is no rigid-body physics: locomotion integrates the gait's commanded
twist, falls are attitude ramps, and the ball is a point with friction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FieldGeometry:
    length: float = 9.0        # m, along x
    width: float = 6.0         # m, along y
    line_width: float = 0.05
    goal_width: float = 2.6
    ball_radius: float = 0.11
    circle_radius: float = 0.75
    post_radius: float = 0.06
    post_height: float = 0.9
    carpet_margin: float = 0.7  # green extends this far beyond the lines

    @property
    def half_length(self) -> float:
        return self.length / 2.0

    @property
    def half_width(self) -> float:
        return self.width / 2.0

    def post_positions(self) -> list[tuple[float, float]]:
        y = self.goal_width / 2.0
        return [(self.half_length, y), (self.half_length, -y),
                (-self.half_length, y), (-self.half_length, -y)]


@dataclass
class AttitudeRamp:
    target_roll: float
    target_pitch: float
    remaining_s: float


class WorldState:
    """Mutable world the control loop owns."""

    BATTERY_MIN = 12.8
    BATTERY_MAX = 16.8
    BATTERY_LOW = 14.0
    BALL_FRICTION = 0.5  # m/s^2 deceleration

    def __init__(self, geometry: FieldGeometry | None = None,
                 battery_v: float = 16.8):
        self.geometry = geometry or FieldGeometry()
        self.pose = np.array([0.0, 0.0, 0.0])  # x, y, heading
        self.ball_pos = np.array([2.0, 0.0])
        self.ball_vel = np.array([0.0, 0.0])
        self.battery_v = min(self.BATTERY_MAX, max(self.BATTERY_MIN, battery_v))
        self.battery_low_fired = False
        # true attitude (roll, pitch); yaw is the pose heading
        self.roll = 0.0
        self.pitch = 0.0
        self._ramp: AttitudeRamp | None = None
        self._last_rates = (0.0, 0.0, 0.0)
        # extra white ground marks (x0, y0, x1, y1, width) for test scenes
        self.extra_marks: list[tuple[float, float, float, float, float]] = []

    # -- events ------------------------------------------------------------

    def push(self, pitch_rad: float, roll_rad: float = 0.0,
             duration_s: float = 0.3):
        """Kinematic fall: ramp the true attitude over duration_s."""
        self._ramp = AttitudeRamp(target_roll=roll_rad, target_pitch=pitch_rad,
                                  remaining_s=max(duration_s, 1e-6))

    def teleport(self, x: float, y: float, heading: float):
        self.pose = np.array([x, y, heading])

    def set_ball(self, x: float, y: float, vx: float = 0.0, vy: float = 0.0):
        self.ball_pos = np.array([x, y])
        self.ball_vel = np.array([vx, vy])

    def reset_upright(self):
        """Called when a get-up completes."""
        self.roll = 0.0
        self.pitch = 0.0
        self._ramp = None

    def kick_ball(self, speed: float, reach: float = 0.45,
                  max_bearing: float = 0.5) -> bool:
        """Impulse along the robot heading if the ball is in front of the foot."""
        dx = self.ball_pos - self.pose[:2]
        dist = float(np.hypot(*dx))
        bearing = math.remainder(math.atan2(dx[1], dx[0]) - self.pose[2],
                                 2.0 * math.pi)
        if dist <= reach and abs(bearing) <= max_bearing:
            heading = self.pose[2]
            self.ball_vel = speed * np.array([math.cos(heading), math.sin(heading)])
            return True
        return False

    # -- integration --------------------------------------------------------

    def step(self, dt: float, twist: tuple[float, float, float] = (0.0, 0.0, 0.0)):
        """Advance pose (body twist), ball, attitude ramps."""
        vx, vy, vw = twist
        heading = self.pose[2]
        self.pose = self.pose + dt * np.array([
            vx * math.cos(heading) - vy * math.sin(heading),
            vx * math.sin(heading) + vy * math.cos(heading),
            vw,
        ])
        self.pose[2] = math.remainder(self.pose[2], 2.0 * math.pi)

        speed = float(np.hypot(*self.ball_vel))
        if speed > 0.0:
            drop = self.BALL_FRICTION * dt
            scale = max(0.0, speed - drop) / speed
            self.ball_pos = self.ball_pos + self.ball_vel * dt
            self.ball_vel = self.ball_vel * scale

        roll_rate = pitch_rate = 0.0
        if self._ramp is not None:
            step = min(dt, self._ramp.remaining_s)
            frac = step / self._ramp.remaining_s
            droll = (self._ramp.target_roll - self.roll) * frac
            dpitch = (self._ramp.target_pitch - self.pitch) * frac
            self.roll += droll
            self.pitch += dpitch
            roll_rate = droll / dt
            pitch_rate = dpitch / dt
            self._ramp.remaining_s -= step
            if self._ramp.remaining_s <= 1e-9:
                self._ramp = None
        self._last_rates = (roll_rate, pitch_rate, vw)

    def drain_battery(self, volts: float) -> list[str]:
        """Discharge; returns notices (the low-battery event fires once)."""
        self.battery_v = max(self.BATTERY_MIN, self.battery_v - volts)
        notices = []
        if self.battery_v < self.BATTERY_LOW and not self.battery_low_fired:
            self.battery_low_fired = True
            notices.append("battery_low")
        return notices

    # -- sensors --------------------------------------------------------------

    def imu_sample(self, rng: np.random.Generator | None = None,
                   gyro_noise: float = 0.0, accel_noise: float = 0.0):
        """Body-frame gyro (rad/s) and specific force (m/s^2)."""
        g = 9.81
        roll_rate, pitch_rate, yaw_rate = self._last_rates
        gyro = np.array([roll_rate, pitch_rate, yaw_rate])
        accel = np.array([
            -g * math.sin(self.pitch),
            g * math.sin(self.roll) * math.cos(self.pitch),
            g * math.cos(self.roll) * math.cos(self.pitch),
        ])
        if rng is not None and (gyro_noise > 0.0 or accel_noise > 0.0):
            gyro = gyro + rng.normal(0.0, gyro_noise, 3)
            accel = accel + rng.normal(0.0, accel_noise, 3)
        return gyro, accel

    def ball_bearing_distance(self) -> tuple[float, float]:
        """Ground-truth bearing/distance of the ball in the robot frame."""
        dx = self.ball_pos - self.pose[:2]
        bearing = math.remainder(math.atan2(dx[1], dx[0]) - self.pose[2],
                                 2.0 * math.pi)
        return bearing, float(np.hypot(*dx))
