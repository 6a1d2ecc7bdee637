// Telemetry ring buffer (last 10 s of frames) and the battery notifier.

import { TelemetryFrame } from "./protocol.js";

export const PLOT_WINDOW_S = 10;
export const BATTERY_LOW_V = 14.0;

export interface JointSeries {
  t: number[];
  target: number[];
  position: number[];
}

export class TelemetryBuffer {
  frames: TelemetryFrame[] = [];

  constructor(private windowS: number = PLOT_WINDOW_S) {}

  push(frame: TelemetryFrame): void {
    this.frames.push(frame);
    const horizon = frame.t_us - this.windowS * 1e6;
    let drop = 0;
    while (drop < this.frames.length && this.frames[drop].t_us < horizon) drop++;
    if (drop > 0) this.frames.splice(0, drop);
  }

  get latest(): TelemetryFrame | null {
    return this.frames.length ? this.frames[this.frames.length - 1] : null;
  }

  jointSeries(joint: number): JointSeries {
    const t: number[] = [];
    const target: number[] = [];
    const position: number[] = [];
    for (const frame of this.frames) {
      t.push(frame.t_us / 1e6);
      target.push(frame.targets[joint]);
      position.push(frame.positions[joint]);
    }
    return { t, target, position };
  }
}

// Fires exactly when the battery crosses the threshold downward; re-arms
// only after the voltage recovers above the threshold.
export class BatteryNotifier {
  private below = false;

  constructor(
    private onLow: (volts: number) => void,
    private threshold: number = BATTERY_LOW_V,
  ) {}

  update(volts: number): void {
    if (volts < this.threshold && !this.below) {
      this.below = true;
      this.onLow(volts);
    } else if (volts >= this.threshold) {
      this.below = false;
    }
  }
}
