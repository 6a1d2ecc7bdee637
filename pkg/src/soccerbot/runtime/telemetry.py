"""Telemetry frames: one JSON line every 12 cycles (~10 Hz), written to a
JSONL file and/or streamed to wire subscribers."""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class TelemetryFrame:
    cycle: int
    t_us: int
    targets: list[float]
    positions: list[float]
    attitude: dict
    fall_state: str
    behavior_state: str
    battery_v: float
    detections: dict
    notices: list[str] = field(default_factory=list)
    warnings: int = 0

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


class TelemetryHub:
    """Fan-out of telemetry lines to a file and live listeners."""

    def __init__(self, path=None):
        self._fh = open(path, "w", encoding="utf-8") if path else None
        self._listeners: list = []
        self._lock = threading.Lock()

    def add_listener(self, callback):
        with self._lock:
            self._listeners.append(callback)

    def remove_listener(self, callback):
        with self._lock:
            if callback in self._listeners:
                self._listeners.remove(callback)

    def publish(self, frame: TelemetryFrame):
        line = frame.to_json_line()
        if self._fh:
            self._fh.write(line + "\n")
        with self._lock:
            listeners = list(self._listeners)
        for callback in listeners:
            callback(frame)

    def close(self):
        if self._fh:
            self._fh.close()
            self._fh = None
