"""YUV color look-up table: 64x64x64 cells (each axis quantized by /4)
mapping to semantic class ids, with the binary file format used by the
calibration tooling.

File format: 8-byte magic ``NOPLUT01`` followed by 262,144 class-id bytes in
Y-major, then U, then V order; a JSON sidecar (<path>.json) names the classes.
"""

from __future__ import annotations

import colorsys
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"NOPLUT01"
LUT_SIDE = 64
LUT_SIZE = LUT_SIDE ** 3

CLASS_UNKNOWN = 0
CLASS_BALL = 1
CLASS_FIELD = 2
CLASS_LINE = 3
CLASS_GOAL = 4
CLASS_OBSTACLE = 5
N_CLASSES = 6
CLASS_NAMES = ("unknown", "ball", "field", "line", "goal", "obstacle")


@dataclass(frozen=True)
class Palette:
    """Canonical YUV renderer colors for each world surface.

    Values are full-range BT.601 conversions of: orange (255, 96, 0),
    field green (30, 140, 40), line white (235, 235, 235), obstacle black
    (16, 16, 16), background gray (128, 128, 128). The goal color derives
    from a configurable hue (default 60 = yellow).
    """

    ball: tuple[int, int, int] = (133, 53, 215)
    field: tuple[int, int, int] = (96, 97, 81)
    line: tuple[int, int, int] = (235, 128, 128)
    goal: tuple[int, int, int] = (203, 14, 147)
    obstacle: tuple[int, int, int] = (16, 128, 128)
    background: tuple[int, int, int] = (128, 128, 128)

    def by_class(self) -> dict[int, tuple[int, int, int]]:
        return {CLASS_BALL: self.ball, CLASS_FIELD: self.field,
                CLASS_LINE: self.line, CLASS_GOAL: self.goal,
                CLASS_OBSTACLE: self.obstacle}


def goal_yuv_from_hue(hue_deg: float) -> tuple[int, int, int]:
    """Goal class color from a hue in degrees (saturated, bright)."""
    r, g, b = colorsys.hsv_to_rgb((hue_deg % 360.0) / 360.0, 1.0, 0.9)
    r, g, b = r * 255.0, g * 255.0, b * 255.0
    y = 0.299 * r + 0.587 * g + 0.114 * b
    u = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    v = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return (int(round(y)), int(round(u)), int(round(v)))


def make_palette(goal_hue_deg: float = 60.0) -> Palette:
    return Palette(goal=goal_yuv_from_hue(goal_hue_deg))


class ColorLut:
    """64^3 YUV -> class-id table."""

    def __init__(self, table: np.ndarray | None = None):
        if table is None:
            table = np.zeros((LUT_SIDE,) * 3, dtype=np.uint8)
        table = np.asarray(table, dtype=np.uint8)
        if table.shape != (LUT_SIDE,) * 3:
            raise ValueError(f"LUT must be {LUT_SIDE}^3, got {table.shape}")
        if table.max(initial=0) >= N_CLASSES:
            raise ValueError("LUT entry is not a valid class id")
        self.table = table
        self.flat = table.reshape(-1)

    def lookup(self, y: int, u: int, v: int) -> int:
        return int(self.table[y >> 2, u >> 2, v >> 2])

    def grow(self, y: int, u: int, v: int, class_id: int, radius: int = 2):
        """Assign the (2r+1)^3 cell neighborhood of a clicked color.

        class_id 0 erases. Coordinates are 0..255 pixel values.
        """
        if not 0 <= class_id < N_CLASSES:
            raise ValueError(f"bad class id {class_id}")
        cy, cu, cv = y >> 2, u >> 2, v >> 2
        lo = lambda c: max(0, c - radius)
        hi = lambda c: min(LUT_SIDE, c + radius + 1)
        self.table[lo(cy):hi(cy), lo(cu):hi(cu), lo(cv):hi(cv)] = class_id

    def copy(self) -> "ColorLut":
        return ColorLut(self.table.copy())

    # -- persistence -------------------------------------------------------

    def to_bytes(self) -> bytes:
        return MAGIC + self.table.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ColorLut":
        if blob[:8] != MAGIC:
            raise ValueError("bad LUT magic")
        if len(blob) != 8 + LUT_SIZE:
            raise ValueError(f"LUT payload must be {LUT_SIZE} bytes")
        table = np.frombuffer(blob[8:], dtype=np.uint8).reshape((LUT_SIDE,) * 3)
        return cls(table.copy())

    def save(self, path):
        path = Path(path)
        path.write_bytes(self.to_bytes())
        sidecar = {"classes": list(CLASS_NAMES)}
        path.with_name(path.name + ".json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ColorLut":
        return cls.from_bytes(Path(path).read_bytes())


def reference_lut(palette: Palette | None = None, radius: int = 2) -> ColorLut:
    """LUT pre-seeded with the renderer palette (for closed-loop runs)."""
    palette = palette or Palette()
    lut = ColorLut()
    for class_id, (y, u, v) in palette.by_class().items():
        lut.grow(y, u, v, class_id, radius=radius)
    return lut
