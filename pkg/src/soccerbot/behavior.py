"""Soccer behavior: search, approach (aiming at the goal), align, kick,
fall protection, get-up.

The FSM runs once per control cycle on a belief assembled from the latest
vision snapshot. Fall protection has absolute priority: a FALLING estimate
relaxes every joint regardless of the game state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .attitude import AttitudeEstimate, FallState
from .gait import GaitCommand
from .vision.pipeline import Detections


class BehaviorState(enum.Enum):
    SEARCH = "search"
    APPROACH = "approach"
    ALIGN = "align"
    KICK = "kick"
    RELAX = "relax"
    GETUP = "getup"


@dataclass(frozen=True)
class BallBelief:
    bearing: float
    elevation: float
    distance: float | None
    age_s: float = 0.0


@dataclass(frozen=True)
class GoalBelief:
    bearing: float
    age_s: float = 0.0


@dataclass(frozen=True)
class WorldBelief:
    ball: BallBelief | None = None
    goal: GoalBelief | None = None
    attitude: AttitudeEstimate = AttitudeEstimate()
    fall_state: FallState = FallState.STABLE
    motion_active: bool = False
    now_s: float = 0.0


@dataclass(frozen=True)
class BehaviorParams:
    stale_s: float = 2.0
    kick_distance: float = 0.3
    kick_bearing: float = 0.2
    kick_goal_bearing: float = 0.3
    standoff: float = 0.25        # aim point behind the ball on the goal line
    approach_gain: float = 1.0    # vx per meter of remaining distance
    steer_gain: float = 1.2       # vw per radian of target bearing
    lateral_gain: float = 0.8     # vy per meter of lateral offset
    search_omega: float = 0.4
    neck_amp: float = 1.0
    neck_freq: float = 0.25
    camera_height: float = 0.85
    default_distance: float = 1.5  # assumed range when elevation is unusable


# Actions: exactly one of gait command / motion playback / relax.

@dataclass(frozen=True)
class GaitAction:
    command: GaitCommand
    neck_yaw: float = 0.0
    neck_pitch: float = 0.0


@dataclass(frozen=True)
class MotionAction:
    name: str


@dataclass(frozen=True)
class RelaxAction:
    pass


Action = GaitAction | MotionAction | RelaxAction


def update_belief(belief: WorldBelief, detections: Detections | None,
                  attitude: AttitudeEstimate, dt: float,
                  params: BehaviorParams = BehaviorParams()) -> WorldBelief:
    """Age the belief, then overwrite entries with fresh detections.

    Ball ground distance comes from the bearing elevation and the camera
    height; above-horizon elevations keep the bearing but mark the distance
    unknown.
    """
    ball = belief.ball
    goal = belief.goal
    if ball is not None:
        ball = replace(ball, age_s=ball.age_s + dt)
    if goal is not None:
        goal = replace(goal, age_s=goal.age_s + dt)

    if detections is not None:
        if detections.ball is not None:
            el = detections.ball.elevation
            if el < -1e-3:
                distance = params.camera_height / math.tan(-el)
            else:
                distance = None
            ball = BallBelief(bearing=detections.ball.azimuth, elevation=el,
                              distance=distance, age_s=0.0)
        if detections.goal_posts:
            bearing = sum(p.azimuth for p in detections.goal_posts) \
                / len(detections.goal_posts)
            goal = GoalBelief(bearing=bearing, age_s=0.0)

    return replace(belief, ball=ball, goal=goal, attitude=attitude,
                   now_s=belief.now_s + dt)


def _triangle(t: float, amp: float, freq: float) -> float:
    """Triangle wave starting at 0, rising, in [-amp, amp]."""
    s = (t * freq + 0.25) % 1.0
    return amp * (4.0 * s - 1.0 if s < 0.5 else 3.0 - 4.0 * s)


class Behavior:
    """The soccer FSM; deterministic in (state, belief)."""

    def __init__(self, params: BehaviorParams = BehaviorParams()):
        self.params = params
        self.state = BehaviorState.SEARCH
        self.entry_s = 0.0
        self._motion_seen = False
        self._active_motion: str | None = None

    def _goto(self, state: BehaviorState, now_s: float):
        if state != self.state:
            self.state = state
            self.entry_s = now_s
            self._motion_seen = False

    def _fresh_ball(self, belief: WorldBelief) -> BallBelief | None:
        ball = belief.ball
        if ball is None or ball.age_s > self.params.stale_s:
            return None
        return ball

    def _kick_window(self, belief: WorldBelief) -> bool:
        ball = self._fresh_ball(belief)
        if ball is None or ball.distance is None:
            return False
        p = self.params
        if ball.distance >= p.kick_distance or abs(ball.bearing) >= p.kick_bearing:
            return False
        goal = belief.goal
        if goal is not None and goal.age_s <= p.stale_s:
            return abs(goal.bearing) < p.kick_goal_bearing
        return True  # goal unknown: kick anyway

    def _approach_command(self, ball: BallBelief, belief: WorldBelief) -> GaitCommand:
        p = self.params
        distance = ball.distance if ball.distance is not None else p.default_distance
        bx = distance * math.cos(ball.bearing)
        by = distance * math.sin(ball.bearing)
        goal = belief.goal
        if goal is not None and goal.age_s <= p.stale_s:
            # aim point sits behind the ball on the (far-field) ball-goal line
            ux, uy = math.cos(goal.bearing), math.sin(goal.bearing)
        else:
            norm = math.hypot(bx, by) or 1.0
            ux, uy = bx / norm, by / norm
        tx = bx - p.standoff * ux
        ty = by - p.standoff * uy
        dist = math.hypot(tx, ty)
        bearing_t = math.atan2(ty, tx) if dist > 1e-6 else 0.0
        vx = min(1.0, max(0.0, p.approach_gain * dist * math.cos(bearing_t)))
        vy = min(1.0, max(-1.0, p.lateral_gain * ty))
        vw = min(1.0, max(-1.0, p.steer_gain * bearing_t))
        return GaitCommand(vx=vx, vy=vy, vw=vw)

    def tick(self, belief: WorldBelief) -> Action:
        p = self.params
        now = belief.now_s

        # -- fall protection overrides everything
        if belief.fall_state == FallState.FALLING:
            self._goto(BehaviorState.RELAX, now)
            return RelaxAction()
        if belief.fall_state in (FallState.FALLEN_PRONE, FallState.FALLEN_SUPINE):
            self._goto(BehaviorState.GETUP, now)
            if belief.motion_active:
                self._motion_seen = True
            name = ("getup_prone" if belief.fall_state == FallState.FALLEN_PRONE
                    else "getup_supine")
            self._active_motion = name
            return MotionAction(name)
        if self.state in (BehaviorState.RELAX, BehaviorState.GETUP):
            # fall resolved (world reset after get-up): back to play
            if belief.motion_active and self._active_motion:
                self._motion_seen = True
                return MotionAction(self._active_motion)
            self._goto(BehaviorState.SEARCH, now)

        if self.state == BehaviorState.KICK:
            self._active_motion = "kick"
            if belief.motion_active:
                self._motion_seen = True
                return MotionAction("kick")
            if self._motion_seen:
                self._goto(BehaviorState.SEARCH, now)
                return GaitAction(GaitCommand(enabled=False))
            return MotionAction("kick")

        ball = self._fresh_ball(belief)
        if ball is None:
            self._goto(BehaviorState.SEARCH, now)
            neck = _triangle(now - self.entry_s, p.neck_amp, p.neck_freq)
            return GaitAction(GaitCommand(vw=p.search_omega), neck_yaw=neck)

        if self._kick_window(belief):
            if self.state == BehaviorState.ALIGN:
                self._goto(BehaviorState.KICK, now)
                return MotionAction("kick")
            self._goto(BehaviorState.ALIGN, now)
            return GaitAction(GaitCommand(enabled=False),
                              neck_yaw=_clamp_neck(ball.bearing))
        self._goto(BehaviorState.APPROACH, now)
        return GaitAction(self._approach_command(ball, belief),
                          neck_yaw=_clamp_neck(ball.bearing))


def _clamp_neck(bearing: float) -> float:
    return min(1.2, max(-1.2, bearing))


def declare_params(tree, params: BehaviorParams = BehaviorParams()) -> None:
    spec = [
        ("stale_s", params.stale_s, 0.1, 10.0, 0.1),
        ("kick_distance", params.kick_distance, 0.05, 1.0, 0.01),
        ("kick_bearing", params.kick_bearing, 0.05, 1.0, 0.01),
        ("kick_goal_bearing", params.kick_goal_bearing, 0.05, 1.0, 0.01),
        ("standoff", params.standoff, 0.0, 1.0, 0.01),
        ("approach_gain", params.approach_gain, 0.1, 5.0, 0.1),
        ("steer_gain", params.steer_gain, 0.1, 5.0, 0.1),
        ("lateral_gain", params.lateral_gain, 0.0, 5.0, 0.1),
        ("search_omega", params.search_omega, 0.0, 1.0, 0.05),
        ("neck_amp", params.neck_amp, 0.0, 1.5, 0.05),
        ("neck_freq", params.neck_freq, 0.05, 2.0, 0.05),
        ("camera_height", params.camera_height, 0.2, 1.5, 0.01),
        ("default_distance", params.default_distance, 0.2, 5.0, 0.1),
    ]
    for key, default, lo, hi, step in spec:
        tree.declare(f"/behavior/{key}", default, min=lo, max=hi, step=step)


def params_from_tree(tree) -> BehaviorParams:
    values = {path.rsplit("/", 1)[1]: value
              for path, value, _ in tree.list("/behavior")}
    values.pop("kick_strike_s", None)
    values.pop("kick_speed", None)
    return BehaviorParams(**values)
