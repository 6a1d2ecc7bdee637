"""Fixed-step control loop, simulated world, synthetic camera, telemetry."""

from .world import FieldGeometry, WorldState
from .render import CameraRenderer
from .loop import Simulation

__all__ = ["FieldGeometry", "WorldState", "CameraRenderer", "Simulation"]
