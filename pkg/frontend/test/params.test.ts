import { describe, expect, it } from "vitest";

import { ParamStore } from "../src/params.js";

const entries = [
  { path: "/gait/freq", value: 1.8, meta: { min: 0.1, max: 5, step: 0.05, default: 1.8 } },
  { path: "/bus/log_enabled", value: false, meta: null },
  { path: "/vision/camera_tilt", value: 0.35, meta: { min: -0.5, max: 1.2, step: 0.01, default: 0.35 } },
];

describe("param store", () => {
  it("displays the confirmed value, never the pending edit", () => {
    const store = new ParamStore();
    store.loadEntries(entries);
    store.markPending("/gait/freq", 9.9);
    expect(store.displayed("/gait/freq")).toBe(1.8); // unconfirmed edit hidden
    expect(store.get("/gait/freq")!.pending).toBe(9.9);
  });

  it("confirmation replaces the pending edit with the clamped value", () => {
    const store = new ParamStore();
    store.loadEntries(entries);
    store.markPending("/gait/freq", 99);
    store.confirm("/gait/freq", 5); // server clamped to max
    const state = store.get("/gait/freq")!;
    expect(state.confirmed).toBe(5);
    expect(state.pending).toBeNull();
  });

  it("subscription events confirm concurrent edits from elsewhere", () => {
    const store = new ParamStore();
    store.loadEntries(entries);
    store.confirm("/gait/freq", 2.4);
    expect(store.displayed("/gait/freq")).toBe(2.4);
  });

  it("notifies listeners on every change", () => {
    const store = new ParamStore();
    const seen: string[] = [];
    store.onChange((s) => seen.push(`${s.path}=${s.confirmed}/${s.pending}`));
    store.loadEntries(entries.slice(0, 1));
    store.markPending("/gait/freq", 3);
    store.confirm("/gait/freq", 3);
    expect(seen).toEqual([
      "/gait/freq=1.8/null",
      "/gait/freq=1.8/3",
      "/gait/freq=3/null",
    ]);
  });

  it("groups by the first path segment in sorted order", () => {
    const store = new ParamStore();
    store.loadEntries(entries);
    const groups = store.groups();
    expect([...groups.keys()]).toEqual(["bus", "gait", "vision"]);
  });
});
