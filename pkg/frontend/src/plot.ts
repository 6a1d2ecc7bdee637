// Minimal canvas line plot for joint target/measured traces.

export interface Trace {
  label: string;
  color: string;
  dashed: boolean;
  t: number[];
  v: number[];
}

export interface PlotRange {
  t0: number;
  t1: number;
  v0: number;
  v1: number;
}

export function computeRange(traces: Trace[], windowS: number): PlotRange {
  let t1 = 0;
  let v0 = Infinity;
  let v1 = -Infinity;
  for (const trace of traces) {
    if (trace.t.length) t1 = Math.max(t1, trace.t[trace.t.length - 1]);
    for (const v of trace.v) {
      v0 = Math.min(v0, v);
      v1 = Math.max(v1, v);
    }
  }
  if (!Number.isFinite(v0)) {
    v0 = -1;
    v1 = 1;
  }
  if (v1 - v0 < 0.05) {
    const mid = (v0 + v1) / 2;
    v0 = mid - 0.025;
    v1 = mid + 0.025;
  }
  const pad = 0.08 * (v1 - v0);
  return { t0: t1 - windowS, t1, v0: v0 - pad, v1: v1 + pad };
}

export function drawPlot(
  canvas: HTMLCanvasElement,
  traces: Trace[],
  windowS: number,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  const range = computeRange(traces, windowS);
  const sx = (t: number) => ((t - range.t0) / (range.t1 - range.t0 || 1)) * width;
  const sy = (v: number) =>
    height - ((v - range.v0) / (range.v1 - range.v0 || 1)) * height;

  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#2a2f3a";
  ctx.lineWidth = 1;
  for (let g = 0; g <= 4; g++) {
    const y = (g / 4) * height;
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }
  ctx.fillStyle = "#8a93a5";
  ctx.font = "10px monospace";
  ctx.fillText(range.v1.toFixed(2), 4, 11);
  ctx.fillText(range.v0.toFixed(2), 4, height - 4);

  for (const trace of traces) {
    ctx.strokeStyle = trace.color;
    ctx.lineWidth = 1.4;
    ctx.setLineDash(trace.dashed ? [5, 4] : []);
    ctx.beginPath();
    for (let i = 0; i < trace.t.length; i++) {
      const x = sx(trace.t[i]);
      const y = sy(trace.v[i]);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  ctx.setLineDash([]);
}
