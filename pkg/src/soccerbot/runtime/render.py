"""Synthetic fisheye camera: per-pixel ray casting against the ground plane,
ball disc, and goal-post cylinders, using the exact inverse of the vision
undistortion model so the loop closes consistently.

Ray directions in the camera frame depend only on the lens, so they are
precomputed once; a frame render is a 3x3 rotation plus vectorized masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..vision.classify import pack_yuyv, yuv_to_rgb
from ..vision.lens import LensModel, camera_basis
from ..vision.lut import Palette
from .world import FieldGeometry, WorldState


@dataclass(frozen=True)
class CameraView:
    """World-frame camera placement."""

    position: tuple[float, float, float]
    yaw: float
    pitch: float  # downward tilt


class CameraRenderer:
    def __init__(self, lens: LensModel | None = None,
                 palette: Palette | None = None,
                 width: int = 800, height: int = 600):
        self.width = width
        self.height = height
        self.lens = lens or LensModel(cx=width / 2.0, cy=height / 2.0)
        self.palette = palette or Palette()
        uu, vv = np.meshgrid(np.arange(width, dtype=np.float32),
                             np.arange(height, dtype=np.float32))
        self._dirs_cam = self.lens.rays(uu, vv).reshape(-1, 3).astype(np.float32)

    def view_for(self, world: WorldState, neck_yaw: float, neck_pitch: float,
                 cam_height: float, cam_tilt: float) -> CameraView:
        return CameraView(
            position=(float(world.pose[0]), float(world.pose[1]), cam_height),
            yaw=float(world.pose[2]) + neck_yaw,
            pitch=cam_tilt + neck_pitch + world.pitch,
        )

    # surface ids, resolved through one palette gather at the end
    _BG, _FIELD, _LINE, _BALL, _GOAL = range(5)

    def render_planes(self, world: WorldState, view: CameraView):
        """Render to full-resolution Y, U, V uint8 planes."""
        geom = world.geometry
        pal = self.palette
        basis = camera_basis(view.yaw, view.pitch).astype(np.float32)
        dirs = self._dirs_cam @ basis.T  # world-frame rays, (N, 3)
        ox, oy, oz = view.position

        n = dirs.shape[0]
        surface = np.zeros(n, dtype=np.uint8)
        dz = dirs[:, 2]
        t_ground = np.full(n, np.inf, dtype=np.float32)

        gi = np.flatnonzero(dz < -1e-6)
        if len(gi):
            t = np.float32(-oz) / dz[gi]
            t_ground[gi] = t
            px = np.float32(ox) + t * dirs[gi, 0]
            py = np.float32(oy) + t * dirs[gi, 1]

            surf = np.zeros(len(gi), dtype=np.uint8)
            carpet = (np.abs(px) <= geom.half_length + geom.carpet_margin) & \
                     (np.abs(py) <= geom.half_width + geom.carpet_margin)
            surf[carpet] = self._FIELD
            surf[carpet & self._line_mask(px, py, geom, world.extra_marks)] = self._LINE
            ball = ((px - np.float32(world.ball_pos[0])) ** 2 +
                    (py - np.float32(world.ball_pos[1])) ** 2
                    <= np.float32(geom.ball_radius) ** 2)
            surf[ball] = self._BALL
            surface[gi] = surf

        # goal posts: vertical cylinders, nearest hit wins over the ground
        a = dirs[:, 0] ** 2 + dirs[:, 1] ** 2
        safe_a = np.where(a > 1e-12, 2.0 * a, 1.0)
        for cx, cy in geom.post_positions():
            rx = np.float32(ox - cx)
            ry = np.float32(oy - cy)
            b = 2.0 * (rx * dirs[:, 0] + ry * dirs[:, 1])
            c = rx * rx + ry * ry - np.float32(geom.post_radius) ** 2
            disc = b * b - 4.0 * a * c
            hit = (disc > 0.0) & (a > 1e-12)
            t_post = (-b - np.sqrt(np.where(hit, disc, 0.0))) / safe_a
            z = np.float32(oz) + t_post * dz
            visible = hit & (t_post > 0.0) & (z >= 0.0) \
                & (z <= geom.post_height) & (t_post < t_ground)
            surface[visible] = self._GOAL

        palette = np.array([pal.background, pal.field, pal.line, pal.ball,
                            pal.goal], dtype=np.uint8)
        planes = palette[surface].reshape(self.height, self.width, 3)
        return planes[:, :, 0], planes[:, :, 1], planes[:, :, 2]

    def render_yuyv(self, world: WorldState, view: CameraView) -> bytes:
        return pack_yuyv(*self.render_planes(world, view))

    def render_rgb(self, world: WorldState, view: CameraView) -> np.ndarray:
        y, u, v = self.render_planes(world, view)
        return yuv_to_rgb(np.stack([y, u, v], axis=-1))

    @staticmethod
    def _line_mask(px, py, geom: FieldGeometry, extra_marks) -> np.ndarray:
        hw = geom.line_width / 2.0
        l2, w2 = geom.half_length, geom.half_width
        inside = (np.abs(px) <= l2 + hw) & (np.abs(py) <= w2 + hw)
        boundary = inside & ((np.abs(np.abs(px) - l2) <= hw) |
                             (np.abs(np.abs(py) - w2) <= hw))
        center = (np.abs(px) <= hw) & (np.abs(py) <= w2)
        r = np.hypot(px, py)
        circle = np.abs(r - geom.circle_radius) <= hw
        mask = boundary | center | circle
        for x0, y0, x1, y1, width in extra_marks:
            ex, ey = x1 - x0, y1 - y0
            ll = ex * ex + ey * ey
            if ll < 1e-12:
                continue
            t = np.clip(((px - x0) * ex + (py - y0) * ey) / ll, 0.0, 1.0)
            d2 = (px - (x0 + t * ex)) ** 2 + (py - (y0 + t * ey)) ** 2
            mask |= d2 <= (width / 2.0) ** 2
        return mask

    def project_world_point(self, point, view: CameraView):
        """World point -> pixel (u, v); inverse of the per-pixel ray cast."""
        p = np.asarray(point, dtype=float) - np.asarray(view.position)
        basis = camera_basis(view.yaw, view.pitch)
        d_cam = basis.T @ p
        return self.lens.project(d_cam)
