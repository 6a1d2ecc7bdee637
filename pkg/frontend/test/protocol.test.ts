import { describe, expect, it } from "vitest";

import { backoffDelayMs, RequestTracker } from "../src/protocol.js";

describe("backoff", () => {
  it("follows 1s/2s/4s capped at 10s", () => {
    expect(backoffDelayMs(0)).toBe(1000);
    expect(backoffDelayMs(1)).toBe(2000);
    expect(backoffDelayMs(2)).toBe(4000);
    expect(backoffDelayMs(3)).toBe(8000);
    expect(backoffDelayMs(4)).toBe(10000);
    expect(backoffDelayMs(9)).toBe(10000);
  });
});

describe("request tracker", () => {
  it("correlates replies by id", async () => {
    const tracker = new RequestTracker();
    const a = tracker.issue();
    const b = tracker.issue();
    expect(a.id).not.toBe(b.id);
    expect(tracker.settle({ id: b.id })).toBe(true);
    await expect(b.promise).resolves.toMatchObject({ id: b.id });
    expect(tracker.inFlight).toBe(1);
    expect(tracker.settle({ id: 999 })).toBe(false);
  });

  it("ignores events without ids", () => {
    const tracker = new RequestTracker();
    tracker.issue();
    expect(tracker.settle({})).toBe(false);
    expect(tracker.inFlight).toBe(1);
  });

  it("rejects everything in flight on disconnect", async () => {
    const tracker = new RequestTracker();
    const pending = tracker.issue();
    tracker.abortAll("connection lost");
    await expect(pending.promise).rejects.toThrow("connection lost");
    expect(tracker.inFlight).toBe(0);
  });
});
