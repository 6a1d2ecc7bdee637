"""Robot constants: joint layout, limits, link geometry and unit conversions.

Everything here is immutable after startup and shared read-only by the rest
of the stack. The 20-joint layout is fixed; geometry and masses are plain
numbers that can be overridden from the `/robot/*` config subtree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Canonical joint order: 6 DoF per leg, 3 per arm, 2 neck. Bus device id of
# joint i is i + 1.
JOINT_NAMES: tuple[str, ...] = (
    "left_hip_yaw",
    "left_hip_roll",
    "left_hip_pitch",
    "left_knee_pitch",
    "left_ankle_pitch",
    "left_ankle_roll",
    "right_hip_yaw",
    "right_hip_roll",
    "right_hip_pitch",
    "right_knee_pitch",
    "right_ankle_pitch",
    "right_ankle_roll",
    "left_shoulder_pitch",
    "left_shoulder_roll",
    "left_elbow_pitch",
    "right_shoulder_pitch",
    "right_shoulder_roll",
    "right_elbow_pitch",
    "neck_yaw",
    "neck_pitch",
)

N_JOINTS = 20
JOINT_INDEX: dict[str, int] = {name: i for i, name in enumerate(JOINT_NAMES)}

TICKS_PER_REV = 4096
TICK_CENTER = 2048
RAD_PER_TICK = 2.0 * math.pi / TICKS_PER_REV

GRAVITY = 9.81  # m/s^2


def bus_id(index: int) -> int:
    """Servo bus device id for a joint index (ids 1..20)."""
    if not 0 <= index < N_JOINTS:
        raise DomainError(f"joint index {index} out of range")
    return index + 1


def joint_index(name: str) -> int:
    try:
        return JOINT_INDEX[name]
    except KeyError:
        raise DomainError(f"unknown joint name {name!r}") from None


def ticks_to_rad(ticks: int) -> float:
    """Convert a 12-bit servo position register value to radians.

    2048 is the center (0 rad); one revolution spans 4096 ticks.
    """
    if not 0 <= ticks <= 4095:
        raise DomainError(f"ticks {ticks} outside 0..4095")
    return (ticks - TICK_CENTER) * RAD_PER_TICK


def rad_to_ticks(angle: float) -> int:
    """Nearest-tick inverse of ticks_to_rad, clamped to [0, 4095]."""
    if math.isnan(angle):
        raise DomainError("angle is NaN")
    ticks = int(round(TICK_CENTER + angle / RAD_PER_TICK))
    return min(4095, max(0, ticks))


def joint_vector(values=None) -> np.ndarray:
    """A fresh length-20 float vector (zeros unless values given)."""
    if values is None:
        return np.zeros(N_JOINTS)
    out = np.asarray(values, dtype=float).copy()
    if out.shape != (N_JOINTS,):
        raise DomainError(f"joint vector must have shape (20,), got {out.shape}")
    return out


def _build_mirror_map() -> tuple[np.ndarray, np.ndarray]:
    perm = np.arange(N_JOINTS)
    sign = np.ones(N_JOINTS)
    for i, name in enumerate(JOINT_NAMES):
        if name.startswith("left_"):
            perm[i] = JOINT_INDEX["right_" + name[len("left_"):]]
        elif name.startswith("right_"):
            perm[i] = JOINT_INDEX["left_" + name[len("right_"):]]
        if name.endswith("_roll") or name.endswith("_yaw"):
            sign[i] = -1.0
    return perm, sign


_MIRROR_PERM, _MIRROR_SIGN = _build_mirror_map()


def mirror(joints: np.ndarray) -> np.ndarray:
    """Left-right mirror of a joint vector.

    Swaps the left/right joint groups and negates roll and yaw joints
    (pitch joints copy unsigned). Involution: mirror(mirror(x)) == x.
    """
    j = joint_vector(joints)
    return _MIRROR_SIGN * j[_MIRROR_PERM]


@dataclass(frozen=True)
class RobotConstants:
    """Geometry, masses and limits. Defaults total 0.95 m / 6.6 kg."""

    height_m: float = 0.95
    mass_kg: float = 6.6
    battery_nominal_v: float = 14.8

    trunk_m: float = 0.35
    thigh_m: float = 0.21
    shank_m: float = 0.21
    foot_m: float = 0.05
    upper_arm_m: float = 0.15
    forearm_m: float = 0.15
    head_m: float = 0.13

    trunk_kg: float = 1.8
    head_kg: float = 0.4
    thigh_kg: float = 0.8
    shank_kg: float = 0.7
    foot_kg: float = 0.3
    upper_arm_kg: float = 0.2
    forearm_kg: float = 0.2

    # Limits: generous defaults pending calibration; knees cannot hyperextend
    # and ankle rolls are mechanically narrow.
    limit_default_rad: float = 2.6
    knee_lo_rad: float = 0.0
    ankle_roll_rad: float = 0.8

    limits_lo: np.ndarray = field(init=False, repr=False)
    limits_hi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        total = (
            self.trunk_kg
            + self.head_kg
            + 2 * (self.thigh_kg + self.shank_kg + self.foot_kg)
            + 2 * (self.upper_arm_kg + self.forearm_kg)
        )
        if abs(total - self.mass_kg) > 1e-6:
            raise DomainError(
                f"link masses sum to {total:.6f} kg, expected {self.mass_kg} kg"
            )
        lo = np.full(N_JOINTS, -self.limit_default_rad)
        hi = np.full(N_JOINTS, self.limit_default_rad)
        for i, name in enumerate(JOINT_NAMES):
            if name.endswith("knee_pitch"):
                lo[i] = self.knee_lo_rad
            if name.endswith("ankle_roll"):
                lo[i] = -self.ankle_roll_rad
                hi[i] = self.ankle_roll_rad
        if not np.all(lo < hi):
            raise DomainError("joint limits must satisfy lo < hi")
        object.__setattr__(self, "limits_lo", lo)
        object.__setattr__(self, "limits_hi", hi)
        self.limits_lo.setflags(write=False)
        self.limits_hi.setflags(write=False)

    def clamp(self, joints: np.ndarray) -> np.ndarray:
        return np.clip(joint_vector(joints), self.limits_lo, self.limits_hi)


DEFAULT_CONSTANTS = RobotConstants()


def declare_params(tree, constants: RobotConstants = DEFAULT_CONSTANTS) -> None:
    """Publish the tunable constants under /robot/* in a config tree."""
    c = constants
    for key, value, hi in [
        ("height_m", c.height_m, 2.0),
        ("mass_kg", c.mass_kg, 20.0),
        ("battery_nominal_v", c.battery_nominal_v, 25.0),
        ("trunk_m", c.trunk_m, 1.0),
        ("thigh_m", c.thigh_m, 1.0),
        ("shank_m", c.shank_m, 1.0),
        ("foot_m", c.foot_m, 0.5),
        ("upper_arm_m", c.upper_arm_m, 1.0),
        ("forearm_m", c.forearm_m, 1.0),
        ("head_m", c.head_m, 0.5),
        ("trunk_kg", c.trunk_kg, 10.0),
        ("head_kg", c.head_kg, 5.0),
        ("thigh_kg", c.thigh_kg, 5.0),
        ("shank_kg", c.shank_kg, 5.0),
        ("foot_kg", c.foot_kg, 5.0),
        ("upper_arm_kg", c.upper_arm_kg, 5.0),
        ("forearm_kg", c.forearm_kg, 5.0),
    ]:
        tree.declare(f"/robot/{key}", value, min=0.0, max=hi, step=0.001)


def from_tree(tree) -> RobotConstants:
    """Build constants from the /robot/* subtree (falls back to defaults)."""
    kwargs = {}
    for path, value, _meta in tree.list("/robot"):
        kwargs[path.rsplit("/", 1)[1]] = value
    return RobotConstants(**kwargs)
