"""Keyframe motions: the `.motion` text format, sampling, and the shipped
kick / get-up files.

Format (line-oriented, LF endings, `#` starts a comment):

    motion <name>
    interp linear|cosine
    frame <duration_s> [hold]
      <joint_name> <angle_rad>     # exactly 20 lines per frame

Within a frame's time span the pose blends from the previous frame's targets
(or the caller's start pose before the first frame) with weight
w = (1 - cos(pi s)) / 2 for cosine interpolation or w = s for linear, where
s is normalized span time. A `hold` frame pins its targets for the whole
span. After the last span the final targets are held.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import model


class ValidationError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True)
class Keyframe:
    duration_s: float
    targets: tuple[float, ...]
    hold: bool = False


@dataclass(frozen=True)
class MotionFile:
    name: str
    interpolation: str = "cosine"
    keyframes: tuple[Keyframe, ...] = ()

    @property
    def duration_s(self) -> float:
        return sum(k.duration_s for k in self.keyframes)


def _validate(motion: MotionFile,
              constants: model.RobotConstants = model.DEFAULT_CONSTANTS):
    if not motion.keyframes:
        raise ValidationError("motion needs at least one keyframe")
    if motion.interpolation not in ("linear", "cosine"):
        raise ValidationError(f"unknown interpolation {motion.interpolation!r}")
    for i, kf in enumerate(motion.keyframes):
        if not kf.duration_s > 0:
            raise ValidationError(f"frame {i + 1}: duration must be positive")
        if len(kf.targets) != model.N_JOINTS:
            raise ValidationError(f"frame {i + 1}: arity {len(kf.targets)} != 20")
        for j, angle in enumerate(kf.targets):
            lo = constants.limits_lo[j]
            hi = constants.limits_hi[j]
            if not lo - 1e-9 <= angle <= hi + 1e-9:
                raise ValidationError(
                    f"frame {i + 1}: {model.JOINT_NAMES[j]} = {angle} outside "
                    f"[{lo}, {hi}]")


def sample(motion: MotionFile, t: float, start_pose: np.ndarray) -> np.ndarray:
    """Pose at time t >= 0; blends per frame, holds after the end."""
    if not motion.keyframes:
        raise ValidationError("motion needs at least one keyframe")
    if t < 0:
        raise ValidationError("t must be >= 0")
    start_pose = model.joint_vector(start_pose)
    t0 = 0.0
    prev = start_pose
    for kf in motion.keyframes:
        targets = np.asarray(kf.targets)
        if t < t0 + kf.duration_s:
            if kf.hold:
                return targets.copy()
            s = (t - t0) / kf.duration_s
            w = s if motion.interpolation == "linear" \
                else (1.0 - math.cos(math.pi * s)) / 2.0
            return prev + w * (targets - prev)
        t0 += kf.duration_s
        prev = targets
    return np.asarray(motion.keyframes[-1].targets).copy()


class MotionPlayback:
    """Tracks elapsed time through one motion."""

    def __init__(self, motion: MotionFile, start_pose: np.ndarray):
        self.motion = motion
        self.start_pose = model.joint_vector(start_pose)
        self.elapsed_s = 0.0

    @property
    def active(self) -> bool:
        return self.elapsed_s < self.motion.duration_s

    def step(self, dt: float) -> np.ndarray:
        pose = sample(self.motion, self.elapsed_s, self.start_pose)
        self.elapsed_s += dt
        return pose


# -- text format --------------------------------------------------------------

def load_motion(text: str | bytes,
                constants: model.RobotConstants = model.DEFAULT_CONSTANTS
                ) -> MotionFile:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    name = None
    interpolation = "cosine"
    keyframes: list[Keyframe] = []
    pending: dict | None = None

    def finish_frame(line_no):
        nonlocal pending
        if pending is None:
            return
        targets = pending["targets"]
        if len(targets) != model.N_JOINTS:
            raise ValidationError(f"arity: frame has {len(targets)} joints, "
                                  f"expected 20", line=pending["line"])
        order = [targets[n] for n in model.JOINT_NAMES]
        keyframes.append(Keyframe(duration_s=pending["duration"],
                                  targets=tuple(order), hold=pending["hold"]))
        pending = None

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        if tokens[0] == "motion":
            if len(tokens) < 2:
                raise ValidationError("motion needs a name", line=line_no)
            name = " ".join(tokens[1:])
        elif tokens[0] == "interp":
            if len(tokens) != 2 or tokens[1] not in ("linear", "cosine"):
                raise ValidationError("interp must be linear or cosine",
                                      line=line_no)
            interpolation = tokens[1]
        elif tokens[0] == "frame":
            finish_frame(line_no)
            if len(tokens) not in (2, 3) or (len(tokens) == 3 and tokens[2] != "hold"):
                raise ValidationError("frame takes a duration and optional "
                                      "'hold'", line=line_no)
            try:
                duration = float(tokens[1])
            except ValueError:
                raise ValidationError(f"bad duration {tokens[1]!r}",
                                      line=line_no) from None
            if not duration > 0:
                raise ValidationError("duration must be positive", line=line_no)
            pending = {"duration": duration, "targets": {}, "hold": len(tokens) == 3,
                       "line": line_no}
        elif pending is not None and len(tokens) == 2:
            joint, value = tokens
            if joint not in model.JOINT_INDEX:
                raise ValidationError(f"unknown joint {joint!r}", line=line_no)
            if joint in pending["targets"]:
                raise ValidationError(f"duplicate joint {joint!r}", line=line_no)
            try:
                pending["targets"][joint] = float(value)
            except ValueError:
                raise ValidationError(f"bad angle {value!r}", line=line_no) from None
        else:
            raise ValidationError(f"unexpected line {line.strip()!r}", line=line_no)
    finish_frame(None)
    if name is None:
        raise ValidationError("missing 'motion <name>' header")
    motion = MotionFile(name=name, interpolation=interpolation,
                        keyframes=tuple(keyframes))
    _validate(motion, constants)
    return motion


def serialize(motion: MotionFile) -> str:
    """Canonical text form: durations %.3f, angles %.4f, 2-space indent."""
    lines = [f"motion {motion.name}", f"interp {motion.interpolation}"]
    for kf in motion.keyframes:
        hold = " hold" if kf.hold else ""
        lines.append(f"frame {kf.duration_s:.3f}{hold}")
        for joint, angle in zip(model.JOINT_NAMES, kf.targets):
            lines.append(f"  {joint} {angle:.4f}")
    return "\n".join(lines) + "\n"


_STANDARD = ("kick", "getup_prone", "getup_supine")


def load_standard(name: str) -> MotionFile:
    if name not in _STANDARD:
        raise ValidationError(f"unknown standard motion {name!r}")
    text = resources.files("soccerbot.data").joinpath(f"{name}.motion").read_text()
    return load_motion(text)


def standard_motions() -> dict[str, MotionFile]:
    """The shipped kick and get-up motions."""
    return {name: load_standard(name) for name in _STANDARD}
