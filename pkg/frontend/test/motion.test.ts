import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import {
  JOINT_NAMES,
  Motion,
  motionDuration,
  parseMotion,
  sampleMotion,
  serializeMotion,
} from "../src/motion.js";

const here = dirname(fileURLToPath(import.meta.url));
const shippedDir = join(here, "..", "..", "src", "soccerbot", "data");

function simpleMotion(): Motion {
  const stand = new Array(20).fill(0);
  const bent = [...stand];
  bent[3] = 1.0; // left knee
  return {
    name: "probe",
    interpolation: "linear",
    keyframes: [
      { durationS: 0.5, targets: bent, hold: false },
      { durationS: 0.25, targets: bent, hold: true },
      { durationS: 0.5, targets: stand, hold: false },
    ],
  };
}

describe("motion grammar", () => {
  it("serialize -> parse -> serialize is byte-identical", () => {
    const text = serializeMotion(simpleMotion());
    const reparsed = parseMotion(text);
    expect(serializeMotion(reparsed)).toBe(text);
  });

  it("round-trips the robot's shipped files byte for byte", () => {
    for (const name of ["kick", "getup_prone", "getup_supine"]) {
      const shipped = readFileSync(join(shippedDir, `${name}.motion`), "utf-8");
      const motion = parseMotion(shipped);
      expect(serializeMotion(motion)).toBe(shipped);
      expect(motion.keyframes.length).toBeGreaterThanOrEqual(5);
    }
  });

  it("canonical formatting: durations %.3f, angles %.4f, LF, 2-space indent", () => {
    const text = serializeMotion(simpleMotion());
    const lines = text.split("\n");
    expect(lines[0]).toBe("motion probe");
    expect(lines[1]).toBe("interp linear");
    expect(lines[2]).toBe("frame 0.500");
    expect(lines[3]).toBe("  left_hip_yaw 0.0000");
    expect(lines[2 + 20 + 1]).toBe("frame 0.250 hold");
    expect(text.endsWith("\n")).toBe(true);
    expect(text.includes("\r")).toBe(false);
  });

  it("rejects zero durations", () => {
    const text = serializeMotion(simpleMotion()).replace("frame 0.500", "frame 0.000");
    expect(() => parseMotion(text)).toThrow(/duration/);
  });

  it("rejects wrong arity with a line number", () => {
    const lines = serializeMotion(simpleMotion()).split("\n");
    lines.splice(3, 1); // drop a joint line
    expect(() => parseMotion(lines.join("\n"))).toThrow(/arity/);
  });

  it("rejects unknown joints", () => {
    const text = serializeMotion(simpleMotion()).replace("left_knee_pitch", "left_knee");
    expect(() => parseMotion(text)).toThrow(/left_knee/);
  });

  it("handles comments and blank lines", () => {
    const text = "# a comment\n\n" + serializeMotion(simpleMotion());
    expect(parseMotion(text).name).toBe("probe");
  });
});

describe("motion sampling", () => {
  it("starts at the start pose and holds the final targets", () => {
    const motion = simpleMotion();
    const start = new Array(20).fill(0.2);
    expect(sampleMotion(motion, 0, start)).toEqual(start);
    const end = sampleMotion(motion, 99, start);
    expect(end[3]).toBe(0);
  });

  it("linear blend hits the quarter point", () => {
    const motion = simpleMotion();
    const start = new Array(20).fill(0);
    const quarter = sampleMotion(motion, 0.125, start);
    expect(quarter[3]).toBeCloseTo(0.25, 10);
  });

  it("hold frames pin their targets", () => {
    const motion = simpleMotion();
    const midHold = sampleMotion(motion, 0.6, new Array(20).fill(0));
    expect(midHold[3]).toBe(1.0);
  });

  it("duration sums the keyframes", () => {
    expect(motionDuration(simpleMotion())).toBeCloseTo(1.25, 10);
    expect(JOINT_NAMES.length).toBe(20);
  });
});
