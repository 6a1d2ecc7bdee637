// Client-side color LUT: 64^3 cells of class ids, edited locally and
// uploaded atomically. File form is the robot's bit-exact format: the
// 8-byte magic "NOPLUT01" followed by 262,144 class bytes in Y-major,
// then U, then V order (each channel quantized by 4).

export const LUT_SIDE = 64;
export const LUT_SIZE = LUT_SIDE ** 3;
export const MAGIC = "NOPLUT01";
export const CLASS_NAMES = ["unknown", "ball", "field", "line", "goal", "obstacle"] as const;
export const DEFAULT_BRUSH_RADIUS = 2;

export class Lut {
  readonly table: Uint8Array;

  constructor(table?: Uint8Array) {
    if (table) {
      if (table.length !== LUT_SIZE) throw new Error(`LUT must be ${LUT_SIZE} bytes`);
      this.table = table;
    } else {
      this.table = new Uint8Array(LUT_SIZE);
    }
  }

  static index(y: number, u: number, v: number): number {
    return ((y >> 2) << 12) | ((u >> 2) << 6) | (v >> 2);
  }

  lookup(y: number, u: number, v: number): number {
    return this.table[Lut.index(y, u, v)];
  }

  /** Claim the (2r+1)^3 cell neighborhood of a clicked color; class 0 erases. */
  grow(y: number, u: number, v: number, classId: number, radius = DEFAULT_BRUSH_RADIUS): void {
    if (classId < 0 || classId >= CLASS_NAMES.length) {
      throw new Error(`bad class id ${classId}`);
    }
    const cy = y >> 2;
    const cu = u >> 2;
    const cv = v >> 2;
    const lo = (c: number) => Math.max(0, c - radius);
    const hi = (c: number) => Math.min(LUT_SIDE - 1, c + radius);
    for (let iy = lo(cy); iy <= hi(cy); iy++) {
      for (let iu = lo(cu); iu <= hi(cu); iu++) {
        for (let iv = lo(cv); iv <= hi(cv); iv++) {
          this.table[(iy << 12) | (iu << 6) | iv] = classId;
        }
      }
    }
  }

  copy(): Lut {
    return new Lut(this.table.slice());
  }

  encode(): Uint8Array {
    const out = new Uint8Array(8 + LUT_SIZE);
    for (let i = 0; i < 8; i++) out[i] = MAGIC.charCodeAt(i);
    out.set(this.table, 8);
    return out;
  }

  static decode(blob: Uint8Array): Lut {
    if (blob.length !== 8 + LUT_SIZE) throw new Error("bad LUT size");
    for (let i = 0; i < 8; i++) {
      if (blob[i] !== MAGIC.charCodeAt(i)) throw new Error("bad LUT magic");
    }
    return new Lut(blob.slice(8));
  }
}

// Dependency-free base64 so the same code runs in the browser and in tests.
const B64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
const B64_REV = new Map([...B64].map((c, i) => [c, i] as const));

export function toBase64(bytes: Uint8Array): string {
  let out = "";
  for (let i = 0; i < bytes.length; i += 3) {
    const a = bytes[i];
    const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out += B64[a >> 2] + B64[((a & 3) << 4) | (b >> 4)];
    out += i + 1 < bytes.length ? B64[((b & 15) << 2) | (c >> 6)] : "=";
    out += i + 2 < bytes.length ? B64[c & 63] : "=";
  }
  return out;
}

export function fromBase64(text: string): Uint8Array {
  const clean = text.replace(/=+$/, "");
  const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
  let acc = 0;
  let bits = 0;
  let pos = 0;
  for (const ch of clean) {
    const val = B64_REV.get(ch);
    if (val === undefined) throw new Error(`bad base64 char ${ch}`);
    acc = (acc << 6) | val;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out[pos++] = (acc >> bits) & 0xff;
    }
  }
  return out;
}
