import { describe, expect, it } from "vitest";

import { TelemetryFrame } from "../src/protocol.js";
import { BatteryNotifier, TelemetryBuffer } from "../src/telemetry.js";

function frame(tUs: number, battery = 16.8): TelemetryFrame {
  return {
    cycle: Math.round(tUs / 8000),
    t_us: tUs,
    targets: new Array(20).fill(Math.sin(tUs / 1e6)),
    positions: new Array(20).fill(Math.sin(tUs / 1e6) * 0.9),
    attitude: { roll: 0, pitch: 0, yaw: 0 },
    fall_state: "stable",
    behavior_state: "search",
    battery_v: battery,
    detections: { ball: null, goal_posts: 0, crossings: 0 },
    notices: [],
    warnings: 0,
  };
}

describe("telemetry buffer", () => {
  it("keeps only the last 10 seconds", () => {
    const buffer = new TelemetryBuffer(10);
    for (let t = 0; t <= 15e6; t += 96000) buffer.push(frame(t));
    expect(buffer.latest!.t_us).toBe(14976000);
    expect(buffer.frames[0].t_us).toBeGreaterThanOrEqual(14976000 - 10e6);
    expect(buffer.frames.length).toBeLessThanOrEqual(Math.ceil(10e6 / 96000) + 1);
  });

  it("extracts joint series aligned with time", () => {
    const buffer = new TelemetryBuffer(10);
    buffer.push(frame(96000));
    buffer.push(frame(192000));
    const series = buffer.jointSeries(3);
    expect(series.t).toEqual([0.096, 0.192]);
    expect(series.target.length).toBe(2);
    expect(series.position[0]).toBeCloseTo(Math.sin(0.096) * 0.9);
  });
});

describe("battery notifier", () => {
  it("fires exactly on the downward crossing of 14.0 V", () => {
    const fired: number[] = [];
    const notifier = new BatteryNotifier((v) => fired.push(v));
    for (const v of [16.8, 14.2, 14.0, 13.99, 13.9, 13.5]) notifier.update(v);
    expect(fired).toEqual([13.99]);
  });

  it("re-arms only after recovering above the threshold", () => {
    const fired: number[] = [];
    const notifier = new BatteryNotifier((v) => fired.push(v));
    notifier.update(13.8);
    notifier.update(13.2);
    notifier.update(14.5); // charged
    notifier.update(13.9);
    expect(fired).toEqual([13.8, 13.9]);
  });
});
