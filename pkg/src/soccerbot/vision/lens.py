"""Equidistant fisheye lens model with optional radial polynomial terms.

Pixel -> ray: r = |pixel - principal point|, theta = (r/f)(1 + k1 (r/f)^2
+ k2 (r/f)^4) is the polar angle off the optical axis, and the in-image
azimuth is measured from +u toward up (-v). f defaults to 254.65 px/rad so
the 800 px image width spans a 180 degree field of view.

Camera frame axes: x = image right, y = image up, z = optical axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class OutOfModel(ValueError):
    """Ray falls outside the lens model (theta > pi)."""


@dataclass(frozen=True)
class LensModel:
    cx: float = 400.0
    cy: float = 300.0
    f: float = 254.65  # px per radian
    k1: float = 0.0
    k2: float = 0.0

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("focal scale must be positive")

    def theta_of_r(self, r):
        x = np.asarray(r, dtype=float) / self.f
        return x * (1.0 + self.k1 * x ** 2 + self.k2 * x ** 4)

    def r_of_theta(self, theta):
        """Inverse of theta_of_r (Newton; exact when k1 = k2 = 0)."""
        theta = np.asarray(theta, dtype=float)
        if self.k1 == 0.0 and self.k2 == 0.0:
            return theta * self.f
        x = theta.copy()
        for _ in range(25):
            fx = x * (1.0 + self.k1 * x ** 2 + self.k2 * x ** 4) - theta
            dfx = 1.0 + 3.0 * self.k1 * x ** 2 + 5.0 * self.k2 * x ** 4
            x = x - fx / dfx
        return x * self.f

    def undistort(self, u: float, v: float) -> tuple[float, float]:
        """Pixel -> (azimuth, theta) in radians; azimuth +90 deg is up."""
        du = u - self.cx
        dv = v - self.cy
        r = math.hypot(du, dv)
        theta = float(self.theta_of_r(r))
        if theta > math.pi:
            raise OutOfModel(f"theta {theta:.3f} exceeds pi at pixel ({u}, {v})")
        azimuth = math.atan2(-dv, du)
        return azimuth, theta

    def rays(self, u, v) -> np.ndarray:
        """Camera-frame unit rays (..., 3) for pixel arrays; no theta check."""
        du = np.asarray(u, dtype=float) - self.cx
        dv = np.asarray(v, dtype=float) - self.cy
        r = np.hypot(du, dv)
        theta = self.theta_of_r(r)
        psi = np.arctan2(-dv, du)
        st = np.sin(theta)
        return np.stack([st * np.cos(psi), st * np.sin(psi), np.cos(theta)],
                        axis=-1)

    def ray(self, u: float, v: float) -> np.ndarray:
        azimuth, theta = self.undistort(u, v)
        st = math.sin(theta)
        return np.array([st * math.cos(azimuth), st * math.sin(azimuth),
                         math.cos(theta)])

    def project(self, rays) -> tuple[np.ndarray, np.ndarray]:
        """Camera-frame directions -> pixel coordinates (u, v)."""
        d = np.asarray(rays, dtype=float)
        norm = np.linalg.norm(d, axis=-1, keepdims=True)
        d = d / norm
        theta = np.arccos(np.clip(d[..., 2], -1.0, 1.0))
        psi = np.arctan2(d[..., 1], d[..., 0])
        r = self.r_of_theta(theta)
        return self.cx + r * np.cos(psi), self.cy - r * np.sin(psi)


def camera_basis(yaw: float, pitch: float) -> np.ndarray:
    """Camera-to-parent rotation for a camera yawed then pitched down.

    Parent frame: x forward, y left, z up. Columns map the camera axes
    (right, up, forward) into the parent frame; pitch > 0 looks down.
    """
    cy, sy = math.cos(yaw), math.sin(yaw)
    ct, st = math.cos(pitch), math.sin(pitch)
    right = (sy, -cy, 0.0)
    up = (cy * st, sy * st, ct)
    fwd = (cy * ct, sy * ct, -st)
    return np.array([right, up, fwd]).T


def bearing(direction) -> tuple[float, float]:
    """(azimuth, elevation) of a direction in an x-forward/z-up frame."""
    d = np.asarray(direction, dtype=float)
    az = math.atan2(d[1], d[0])
    el = math.atan2(d[2], math.hypot(d[0], d[1]))
    return az, el
