"""Open-loop central-pattern gait with attitude-feedback stabilization.

One global phase drives both legs half a period apart. Per leg (sigma = +1
left, -1 right, phi the leg's own phase, W(phi) = max(0, sin phi) the swing
window, gamma = A_short * W(phi) the leg shortening):

    hip_roll   = sigma * (r0 + A_lat sin phi) + vy A_y sin phi
    hip_pitch  = p0 + vx A_x sin phi - gamma / 2
    knee       = k0 + gamma
    ankle_pitch= a0 - gamma / 2 - 0.5 vx A_x sin phi
    hip_yaw    = sigma * vw A_w sin phi
    ankle_roll = -hip_roll                (foot stays ground-parallel)

Attitude feedback adds Kp (angle - nominal) + Kd rate to both pitch joints
(hip/ankle) and, analogously for roll, to both roll joints. Arms swing in
anti-phase with the same-side leg. Outputs are limit-clamped and per-cycle
rate limited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import model
from .attitude import AttitudeEstimate


@dataclass(frozen=True)
class GaitCommand:
    vx: float = 0.0
    vy: float = 0.0
    vw: float = 0.0
    enabled: bool = True

    def clamped(self) -> "GaitCommand":
        c = lambda x: min(1.0, max(-1.0, x))
        return GaitCommand(c(self.vx), c(self.vy), c(self.vw), self.enabled)


@dataclass(frozen=True)
class GaitParams:
    freq: float = 1.8          # Hz
    a_lat: float = 0.06        # lateral rock amplitude, rad
    a_short: float = 0.35      # swing leg shortening, rad
    a_x: float = 0.25          # forward command to swing amplitude
    a_y: float = 0.12
    a_w: float = 0.2
    r0: float = 0.05           # stance hip splay
    p0: float = -0.3           # stance hip pitch
    k0: float = 0.6            # stance knee bend
    a0: float = -0.3           # stance ankle pitch
    arm_p0: float = 0.1
    arm_r0: float = 0.15
    elbow0: float = 0.5
    kp_pitch: float = 0.0
    kd_pitch: float = 0.0
    kp_roll: float = 0.0
    kd_roll: float = 0.0
    pitch_nominal: float = 0.0
    roll_nominal: float = 0.0
    rate_limit: float = 0.1    # rad per cycle per joint
    # commanded body twist per unit command (owned here so speed scaling
    # lives in one module; the world integrates it kinematically)
    speed_x: float = 0.3       # m/s at vx = 1
    speed_y: float = 0.15
    speed_w: float = 0.8       # rad/s at vw = 1


@dataclass
class GaitState:
    phase: float = 0.0
    last: np.ndarray = field(default_factory=model.joint_vector)


def _wrap(phase: float) -> float:
    return math.remainder(phase, 2.0 * math.pi)


def stand_pose(params: GaitParams) -> np.ndarray:
    """Stance offsets only; the handoff pose between gait and motions."""
    pose = model.joint_vector()
    for side, sigma in (("left", 1.0), ("right", -1.0)):
        pose[model.JOINT_INDEX[f"{side}_hip_roll"]] = sigma * params.r0
        pose[model.JOINT_INDEX[f"{side}_hip_pitch"]] = params.p0
        pose[model.JOINT_INDEX[f"{side}_knee_pitch"]] = params.k0
        pose[model.JOINT_INDEX[f"{side}_ankle_pitch"]] = params.a0
        pose[model.JOINT_INDEX[f"{side}_ankle_roll"]] = -sigma * params.r0
        pose[model.JOINT_INDEX[f"{side}_shoulder_pitch"]] = params.arm_p0
        pose[model.JOINT_INDEX[f"{side}_shoulder_roll"]] = sigma * params.arm_r0
        pose[model.JOINT_INDEX[f"{side}_elbow_pitch"]] = params.elbow0
    return pose


def init_state(params: GaitParams) -> GaitState:
    return GaitState(phase=0.0, last=stand_pose(params))


def _leg_targets(pose, side, sigma, phi, cmd, params):
    s = math.sin(phi)
    gamma = params.a_short * max(0.0, s)
    hip_roll = sigma * (params.r0 + params.a_lat * s) + cmd.vy * params.a_y * s
    swing = cmd.vx * params.a_x * s
    pose[model.JOINT_INDEX[f"{side}_hip_yaw"]] = sigma * cmd.vw * params.a_w * s
    pose[model.JOINT_INDEX[f"{side}_hip_roll"]] = hip_roll
    pose[model.JOINT_INDEX[f"{side}_hip_pitch"]] = params.p0 + swing - gamma / 2.0
    pose[model.JOINT_INDEX[f"{side}_knee_pitch"]] = params.k0 + gamma
    pose[model.JOINT_INDEX[f"{side}_ankle_pitch"]] = params.a0 - gamma / 2.0 - 0.5 * swing
    pose[model.JOINT_INDEX[f"{side}_ankle_roll"]] = -hip_roll
    # arm swings anti-phase with the same-side leg
    pose[model.JOINT_INDEX[f"{side}_shoulder_pitch"]] = (
        params.arm_p0 + cmd.vx * params.a_x * math.sin(phi + math.pi))
    pose[model.JOINT_INDEX[f"{side}_shoulder_roll"]] = sigma * params.arm_r0
    pose[model.JOINT_INDEX[f"{side}_elbow_pitch"]] = params.elbow0


def gait_step(state: GaitState, cmd: GaitCommand, params: GaitParams,
              attitude: AttitudeEstimate, dt: float,
              constants: model.RobotConstants = model.DEFAULT_CONSTANTS
              ) -> tuple[GaitState, np.ndarray]:
    """Advance the phase and emit clamped, rate-limited joint targets."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    cmd = cmd.clamped()
    pose = model.joint_vector()
    if cmd.enabled:
        phase = _wrap(state.phase + 2.0 * math.pi * params.freq * dt)
        _leg_targets(pose, "left", 1.0, phase, cmd, params)
        _leg_targets(pose, "right", -1.0, _wrap(phase + math.pi), cmd, params)
    else:
        phase = state.phase
        pose = stand_pose(params)

    fb_pitch = (params.kp_pitch * (attitude.pitch - params.pitch_nominal)
                + params.kd_pitch * attitude.pitch_rate)
    fb_roll = (params.kp_roll * (attitude.roll - params.roll_nominal)
               + params.kd_roll * attitude.roll_rate)
    for side in ("left", "right"):
        pose[model.JOINT_INDEX[f"{side}_hip_pitch"]] += fb_pitch
        pose[model.JOINT_INDEX[f"{side}_ankle_pitch"]] += fb_pitch
        pose[model.JOINT_INDEX[f"{side}_hip_roll"]] += fb_roll
        pose[model.JOINT_INDEX[f"{side}_ankle_roll"]] += fb_roll

    pose = constants.clamp(pose)
    delta = np.clip(pose - state.last, -params.rate_limit, params.rate_limit)
    targets = state.last + delta
    return GaitState(phase=phase, last=targets), targets


def body_twist(cmd: GaitCommand, params: GaitParams) -> tuple[float, float, float]:
    """Commanded body twist (m/s, m/s, rad/s) the world integrates."""
    cmd = cmd.clamped()
    if not cmd.enabled:
        return (0.0, 0.0, 0.0)
    return (cmd.vx * params.speed_x, cmd.vy * params.speed_y, cmd.vw * params.speed_w)


def declare_params(tree, params: GaitParams = GaitParams()) -> None:
    spec = [
        ("freq", params.freq, 0.1, 5.0, 0.05),
        ("a_lat", params.a_lat, 0.0, 0.5, 0.005),
        ("a_short", params.a_short, 0.0, 1.2, 0.01),
        ("a_x", params.a_x, 0.0, 1.0, 0.01),
        ("a_y", params.a_y, 0.0, 1.0, 0.01),
        ("a_w", params.a_w, 0.0, 1.0, 0.01),
        ("r0", params.r0, -0.5, 0.5, 0.005),
        ("p0", params.p0, -1.5, 1.5, 0.01),
        ("k0", params.k0, 0.0, 2.0, 0.01),
        ("a0", params.a0, -1.5, 1.5, 0.01),
        ("arm_p0", params.arm_p0, -1.5, 1.5, 0.01),
        ("arm_r0", params.arm_r0, -1.5, 1.5, 0.01),
        ("elbow0", params.elbow0, -1.5, 1.5, 0.01),
        ("kp_pitch", params.kp_pitch, -2.0, 2.0, 0.01),
        ("kd_pitch", params.kd_pitch, -2.0, 2.0, 0.01),
        ("kp_roll", params.kp_roll, -2.0, 2.0, 0.01),
        ("kd_roll", params.kd_roll, -2.0, 2.0, 0.01),
        ("pitch_nominal", params.pitch_nominal, -0.5, 0.5, 0.01),
        ("roll_nominal", params.roll_nominal, -0.5, 0.5, 0.01),
        ("rate_limit", params.rate_limit, 0.01, 1.0, 0.01),
        ("speed_x", params.speed_x, 0.0, 1.0, 0.01),
        ("speed_y", params.speed_y, 0.0, 1.0, 0.01),
        ("speed_w", params.speed_w, 0.0, 2.0, 0.01),
    ]
    for key, default, lo, hi, step in spec:
        tree.declare(f"/gait/{key}", default, min=lo, max=hi, step=step)


def params_from_tree(tree) -> GaitParams:
    values = {path.rsplit("/", 1)[1]: value for path, value, _ in tree.list("/gait")}
    return GaitParams(**values)
