"""Full vision pipeline: classify a frame, run every detector, and express
detections as robot-frame bearings using the neck/camera geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import detect
from .classify import ON_THRESHOLD, classify
from .lens import LensModel, bearing, camera_basis
from .lut import (CLASS_BALL, CLASS_FIELD, CLASS_GOAL, CLASS_LINE,
                  CLASS_OBSTACLE, ColorLut)


@dataclass(frozen=True)
class CameraPose:
    """Camera mount in the robot frame (x forward, y left, z up)."""

    yaw: float = 0.0     # neck yaw
    pitch: float = 0.35  # downward tilt incl. neck pitch
    height: float = 0.85


@dataclass(frozen=True)
class BallDetection:
    pixel: tuple[float, float]
    azimuth: float
    elevation: float
    radius_cells: float
    area_cells: int


@dataclass(frozen=True)
class PostDetection:
    pixel: tuple[float, float]
    azimuth: float
    elevation: float
    area_cells: int


@dataclass(frozen=True)
class ObstacleDetection:
    pixel: tuple[float, float]
    azimuth: float
    elevation: float
    area_cells: int


@dataclass(frozen=True)
class Detections:
    ball: BallDetection | None = None
    goal_posts: list[PostDetection] = field(default_factory=list)
    obstacles: list[ObstacleDetection] = field(default_factory=list)
    field_boundary: np.ndarray = field(default_factory=lambda: np.zeros(0, int))
    line_segments: list[detect.Segment] = field(default_factory=list)
    crossings: list[detect.Crossing] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ball": None if self.ball is None else {
                "pixel": list(self.ball.pixel),
                "azimuth": self.ball.azimuth,
                "elevation": self.ball.elevation,
                "radius_cells": self.ball.radius_cells,
                "area_cells": self.ball.area_cells,
            },
            "goal_posts": [
                {"pixel": list(p.pixel), "azimuth": p.azimuth,
                 "elevation": p.elevation, "area_cells": p.area_cells}
                for p in self.goal_posts
            ],
            "obstacles": [
                {"pixel": list(o.pixel), "azimuth": o.azimuth,
                 "elevation": o.elevation, "area_cells": o.area_cells}
                for o in self.obstacles
            ],
            "field_boundary": [int(b) for b in self.field_boundary],
            "line_segments": [
                {"p0": list(s.p0), "p1": list(s.p1), "direction": list(s.direction)}
                for s in self.line_segments
            ],
            "crossings": [
                {"cell": list(c.cell), "kind": c.kind} for c in self.crossings
            ],
        }


class VisionPipeline:
    """Stateless per-frame processing; LUT swaps atomically via set_lut."""

    def __init__(self, lut: ColorLut, lens: LensModel | None = None,
                 width: int = 800, height: int = 600,
                 threshold: int = ON_THRESHOLD):
        self.lut = lut
        self.lens = lens or LensModel(cx=width / 2.0, cy=height / 2.0)
        self.width = width
        self.height = height
        self.threshold = threshold
        self.last_counts: np.ndarray | None = None

    def set_lut(self, lut: ColorLut):
        self.lut = lut

    def _robot_bearing(self, pixel, pose: CameraPose) -> tuple[float, float]:
        ray_cam = self.lens.ray(pixel[0], pixel[1])
        ray_robot = camera_basis(pose.yaw, pose.pitch) @ ray_cam
        return bearing(ray_robot)

    def process(self, yuyv: bytes, pose: CameraPose | None = None) -> Detections:
        pose = pose or CameraPose()
        counts = classify(yuyv, self.lut, self.width, self.height)
        self.last_counts = counts
        boundary = detect.field_boundary(counts[CLASS_FIELD], self.threshold)

        ball = None
        blob = detect.detect_ball(counts[CLASS_BALL], boundary, self.threshold)
        if blob is not None:
            az, el = self._robot_bearing(blob.centroid_pixel, pose)
            ball = BallDetection(pixel=blob.centroid_pixel, azimuth=az,
                                 elevation=el,
                                 radius_cells=detect.ball_radius_cells(blob.area),
                                 area_cells=blob.area)

        posts = []
        for post in detect.detect_goal(counts[CLASS_GOAL], boundary, self.threshold):
            az, el = self._robot_bearing(post.centroid_pixel, pose)
            posts.append(PostDetection(pixel=post.centroid_pixel, azimuth=az,
                                       elevation=el, area_cells=post.area))

        obstacles = []
        for obs in detect.detect_obstacles(counts[CLASS_OBSTACLE], boundary,
                                           self.threshold):
            az, el = self._robot_bearing(obs.centroid_pixel, pose)
            obstacles.append(ObstacleDetection(pixel=obs.centroid_pixel,
                                               azimuth=az, elevation=el,
                                               area_cells=obs.area))

        segments, crossings = detect.detect_lines_and_crossings(
            counts[CLASS_LINE], boundary, self.threshold)

        return Detections(ball=ball, goal_posts=posts, obstacles=obstacles,
                          field_boundary=boundary, line_segments=segments,
                          crossings=crossings)
