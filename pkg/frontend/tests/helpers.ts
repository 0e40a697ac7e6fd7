/** Raster builders for tests: JS twins of the server's frame encoders. */

import type { ClassPalette, FrameMsg, Palette } from "../src/protocol.js";

export function encodePpm(width: number, height: number, rgb: number[]): Uint8Array {
  if (rgb.length !== width * height * 3) throw new Error("bad rgb length");
  const header = new TextEncoder().encode(`P6\n${width} ${height}\n255\n`);
  const out = new Uint8Array(header.length + rgb.length);
  out.set(header);
  out.set(rgb, header.length);
  return out;
}

export function encodePgm16(width: number, height: number, values: number[]): Uint8Array {
  if (values.length !== width * height) throw new Error("bad value length");
  const header = new TextEncoder().encode(`P5\n${width} ${height}\n65535\n`);
  const out = new Uint8Array(header.length + values.length * 2);
  out.set(header);
  values.forEach((v, i) => {
    out[header.length + 2 * i] = (v >> 8) & 0xff;
    out[header.length + 2 * i + 1] = v & 0xff;
  });
  return out;
}

export function b64(bytes: Uint8Array): string {
  return Buffer.from(bytes).toString("base64");
}

export interface FrameSpec {
  seq?: number;
  tick?: number;
  width?: number;
  height?: number;
  rgb?: number[];
  depth?: number[];
  seg?: number[];
  classSeg?: number[];
  palette?: Palette;
  classPalette?: ClassPalette;
}

/** A complete, decodable Frame message; defaults to a 4x3 frame with a
 * two-pixel "mug" instance (seg value 2, class 1) in the middle row. */
export function makeFrameMsg(spec: FrameSpec = {}): FrameMsg {
  const width = spec.width ?? 4;
  const height = spec.height ?? 3;
  const n = width * height;
  const seg = spec.seg ?? [
    0, 0, 0, 0,
    0, 2, 2, 0,
    0, 0, 0, 0,
  ];
  const classSeg = spec.classSeg ?? seg.map((v) => (v === 0 ? 0 : 1));
  const depth = spec.depth ?? seg.map((v) => (v === 0 ? 5000 : 750));
  const rgb = spec.rgb ?? Array.from({ length: n * 3 }, (_, i) => i % 256);
  return {
    type: "Frame",
    push: true,
    seq: spec.seq ?? 1,
    tick: spec.tick ?? 0,
    width,
    height,
    rgb_ppm: b64(encodePpm(width, height, rgb)),
    depth_pgm: b64(encodePgm16(width, height, depth)),
    seg_pgm: b64(encodePgm16(width, height, seg)),
    class_pgm: b64(encodePgm16(width, height, classSeg)),
    palette: spec.palette ?? {
      "0": { instance: null, class: null },
      "2": { instance: "mug_0", class: "Mug" },
    },
    class_palette: spec.classPalette ?? { "0": null, "1": "Mug" },
  };
}
