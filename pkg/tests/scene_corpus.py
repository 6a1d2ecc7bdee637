"""Deterministic 20-scene synthetic corpus for vision accuracy grading.

Each scene poses the robot midfield facing the yellow goal with the ball
1.2-2.2 m ahead, and paints a T or X line feature on the ground 1.5 m away
at a deterministic orientation. Ground truth per scene: exact ball bearing,
two visible goal posts, and the feature kind/location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from soccerbot.runtime.world import WorldState

N_SCENES = 20
STROKE_WIDTH = 0.10
STROKE_HALF_LENGTH = 0.6
FEATURE_DISTANCE = 1.5
FEATURE_BEARING = 0.35


@dataclass(frozen=True)
class Scene:
    index: int
    world: WorldState
    feature_xy: tuple[float, float]
    kind: str  # "T" or "X"


def _stroke(cx, cy, ang, l0, l1):
    return (cx + l0 * math.cos(ang), cy + l0 * math.sin(ang),
            cx + l1 * math.cos(ang), cy + l1 * math.sin(ang), STROKE_WIDTH)


def make_scene(i: int) -> Scene:
    rng = np.random.default_rng(1000 + i)
    world = WorldState()
    ry = float(rng.uniform(-1.0, 1.0))
    rx = float(rng.uniform(0.4, 1.4))
    heading = float(rng.uniform(-0.25, 0.25))
    world.teleport(rx, ry, heading)
    ball_dist = float(rng.uniform(1.2, 2.2))
    ball_bearing = float(rng.uniform(-0.35, 0.35))
    world.set_ball(rx + ball_dist * math.cos(heading + ball_bearing),
                   ry + ball_dist * math.sin(heading + ball_bearing))
    kind = "X" if i % 2 == 0 else "T"
    # feature on the opposite side of the ball so they never overlap
    sight = heading + (-FEATURE_BEARING if ball_bearing > 0 else FEATURE_BEARING)
    jitter = math.radians(float(rng.uniform(-8, 8)))
    fx = rx + FEATURE_DISTANCE * math.cos(sight)
    fy = ry + FEATURE_DISTANCE * math.sin(sight)
    a1 = sight + math.pi / 4 + jitter
    a2 = sight - math.pi / 4 + jitter
    marks = [_stroke(fx, fy, a1, -STROKE_HALF_LENGTH, STROKE_HALF_LENGTH)]
    if kind == "X":
        marks.append(_stroke(fx, fy, a2, -STROKE_HALF_LENGTH, STROKE_HALF_LENGTH))
    else:
        marks.append(_stroke(fx, fy, a2, 0.0, STROKE_HALF_LENGTH))
    world.extra_marks = marks
    return Scene(index=i, world=world, feature_xy=(fx, fy), kind=kind)


def all_scenes() -> list[Scene]:
    return [make_scene(i) for i in range(N_SCENES)]
