// Keyframe motion model and the `.motion` text grammar, serialized in the
// exact canonical form the robot writes (durations %.3f, angles %.4f,
// two-space indent, LF endings) so saved files round-trip byte for byte.

export const JOINT_NAMES = [
  "left_hip_yaw", "left_hip_roll", "left_hip_pitch", "left_knee_pitch",
  "left_ankle_pitch", "left_ankle_roll",
  "right_hip_yaw", "right_hip_roll", "right_hip_pitch", "right_knee_pitch",
  "right_ankle_pitch", "right_ankle_roll",
  "left_shoulder_pitch", "left_shoulder_roll", "left_elbow_pitch",
  "right_shoulder_pitch", "right_shoulder_roll", "right_elbow_pitch",
  "neck_yaw", "neck_pitch",
] as const;

export const N_JOINTS = 20;

export interface Keyframe {
  durationS: number;
  targets: number[];
  hold: boolean;
}

export interface Motion {
  name: string;
  interpolation: "linear" | "cosine";
  keyframes: Keyframe[];
}

export class MotionFormatError extends Error {
  constructor(message: string, public line: number | null = null) {
    super(line === null ? message : `line ${line}: ${message}`);
  }
}

export function parseMotion(text: string): Motion {
  let name: string | null = null;
  let interpolation: "linear" | "cosine" = "cosine";
  const keyframes: Keyframe[] = [];
  let pending: { durationS: number; hold: boolean; targets: Map<string, number>; line: number } | null = null;

  const finish = () => {
    if (!pending) return;
    if (pending.targets.size !== N_JOINTS) {
      throw new MotionFormatError(
        `arity: frame has ${pending.targets.size} joints, expected 20`,
        pending.line,
      );
    }
    keyframes.push({
      durationS: pending.durationS,
      hold: pending.hold,
      targets: JOINT_NAMES.map((j) => pending!.targets.get(j)!),
    });
    pending = null;
  };

  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const lineNo = i + 1;
    const line = lines[i].split("#", 1)[0].trimEnd();
    if (!line.trim()) continue;
    const tokens = line.trim().split(/\s+/);
    if (tokens[0] === "motion") {
      if (tokens.length < 2) throw new MotionFormatError("motion needs a name", lineNo);
      name = tokens.slice(1).join(" ");
    } else if (tokens[0] === "interp") {
      if (tokens.length !== 2 || (tokens[1] !== "linear" && tokens[1] !== "cosine")) {
        throw new MotionFormatError("interp must be linear or cosine", lineNo);
      }
      interpolation = tokens[1];
    } else if (tokens[0] === "frame") {
      finish();
      if (tokens.length > 3 || (tokens.length === 3 && tokens[2] !== "hold")) {
        throw new MotionFormatError("frame takes a duration and optional 'hold'", lineNo);
      }
      const duration = Number(tokens[1]);
      if (!Number.isFinite(duration)) {
        throw new MotionFormatError(`bad duration ${tokens[1]}`, lineNo);
      }
      if (!(duration > 0)) throw new MotionFormatError("duration must be positive", lineNo);
      pending = { durationS: duration, hold: tokens.length === 3, targets: new Map(), line: lineNo };
    } else if (pending && tokens.length === 2) {
      const [joint, raw] = tokens;
      if (!(JOINT_NAMES as readonly string[]).includes(joint)) {
        throw new MotionFormatError(`unknown joint ${joint}`, lineNo);
      }
      if (pending.targets.has(joint)) {
        throw new MotionFormatError(`duplicate joint ${joint}`, lineNo);
      }
      const angle = Number(raw);
      if (!Number.isFinite(angle)) throw new MotionFormatError(`bad angle ${raw}`, lineNo);
      pending.targets.set(joint, angle);
    } else {
      throw new MotionFormatError(`unexpected line ${line.trim()}`, lineNo);
    }
  }
  finish();
  if (name === null) throw new MotionFormatError("missing 'motion <name>' header");
  if (!keyframes.length) throw new MotionFormatError("motion needs at least one keyframe");
  return { name, interpolation, keyframes };
}

export function serializeMotion(motion: Motion): string {
  const lines = [`motion ${motion.name}`, `interp ${motion.interpolation}`];
  for (const kf of motion.keyframes) {
    lines.push(`frame ${kf.durationS.toFixed(3)}${kf.hold ? " hold" : ""}`);
    for (let j = 0; j < N_JOINTS; j++) {
      lines.push(`  ${JOINT_NAMES[j]} ${kf.targets[j].toFixed(4)}`);
    }
  }
  return lines.join("\n") + "\n";
}

/** Pose at time t for editor preview (same blending as the robot). */
export function sampleMotion(motion: Motion, t: number, startPose: number[]): number[] {
  let t0 = 0;
  let prev = startPose;
  for (const kf of motion.keyframes) {
    if (t < t0 + kf.durationS) {
      if (kf.hold) return [...kf.targets];
      const s = (t - t0) / kf.durationS;
      const w = motion.interpolation === "linear" ? s : (1 - Math.cos(Math.PI * s)) / 2;
      return prev.map((p, j) => p + w * (kf.targets[j] - p));
    }
    t0 += kf.durationS;
    prev = kf.targets;
  }
  return [...motion.keyframes[motion.keyframes.length - 1].targets];
}

export function motionDuration(motion: Motion): number {
  return motion.keyframes.reduce((acc, kf) => acc + kf.durationS, 0);
}
