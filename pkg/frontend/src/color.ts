// Full-range BT.601 RGB <-> YUV, matching the robot's conversions
// (including round-half-to-even, so sampled colors agree byte for byte).

export function roundHalfEven(x: number): number {
  const floor = Math.floor(x);
  const diff = x - floor;
  if (diff > 0.5) return floor + 1;
  if (diff < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

function clampByte(x: number): number {
  return Math.min(255, Math.max(0, roundHalfEven(x)));
}

export function rgbToYuv(r: number, g: number, b: number): [number, number, number] {
  const y = 0.299 * r + 0.587 * g + 0.114 * b;
  const u = 128 - 0.168736 * r - 0.331264 * g + 0.5 * b;
  const v = 128 + 0.5 * r - 0.418688 * g - 0.081312 * b;
  return [clampByte(y), clampByte(u), clampByte(v)];
}

export function yuvToRgb(y: number, u: number, v: number): [number, number, number] {
  const r = y + 1.402 * (v - 128);
  const g = y - 0.344136 * (u - 128) - 0.714136 * (v - 128);
  const b = y + 1.772 * (u - 128);
  return [clampByte(r), clampByte(g), clampByte(b)];
}
