"""Fisheye soccer vision: undistortion, LUT color classification,
per-class downscaled grids, and object/line/crossing detection."""

from .lens import LensModel, OutOfModel, camera_basis
from .lut import ColorLut, Palette, CLASS_NAMES, reference_lut
from .classify import classify, unpack_yuyv, pack_yuyv, rgb_to_yuv, yuv_to_rgb
from .pipeline import CameraPose, Detections, VisionPipeline

__all__ = [
    "LensModel", "OutOfModel", "camera_basis",
    "ColorLut", "Palette", "CLASS_NAMES", "reference_lut",
    "classify", "unpack_yuyv", "pack_yuyv", "rgb_to_yuv", "yuv_to_rgb",
    "CameraPose", "Detections", "VisionPipeline",
]
