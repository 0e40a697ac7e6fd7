/** Frame payload decoding: base64 netpbm rasters to typed arrays, plus the
 * channel-to-RGBA conversion the canvas paints from.
 *
 * The server sends four aligned channels per frame: a P6 PPM for rgb and
 * big-endian 16-bit P5 PGMs for depth (millimeters), instance indices, and
 * class indices.  Background is 0 in both segmentation channels; walls show
 * in rgb/depth only.
 */

import type { ClassPalette, FrameMsg, Palette } from "./protocol.js";

export class FrameFormatError extends Error {}

export function decodeBase64(b64: string): Uint8Array {
  let binary: string;
  try {
    binary = atob(b64);
  } catch {
    throw new FrameFormatError("invalid base64 payload");
  }
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0b, 0x0c, 0x0d]);

/** Parse a netpbm header: magic, then width/height/maxval with whitespace
 * and #-comment skipping, then a single whitespace byte before the payload.
 * Returns [width, height, maxval, payloadOffset]. */
function readHeader(data: Uint8Array, magic: string): [number, number, number, number] {
  if (data.length < magic.length ||
      String.fromCharCode(...data.subarray(0, magic.length)) !== magic) {
    throw new FrameFormatError(`expected ${magic} file`);
  }
  const fields: number[] = [];
  let pos = magic.length;
  while (fields.length < 3) {
    if (pos >= data.length) throw new FrameFormatError("truncated header");
    const ch = data[pos]!;
    if (ch === 0x23) { // '#'
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      if (pos >= data.length) throw new FrameFormatError("truncated header");
      pos++;
    } else if (WHITESPACE.has(ch)) {
      pos++;
    } else {
      let end = pos;
      while (end < data.length && !WHITESPACE.has(data[end]!)) end++;
      const token = String.fromCharCode(...data.subarray(pos, end));
      if (!/^[0-9]+$/.test(token)) {
        throw new FrameFormatError(`bad header token ${JSON.stringify(token)}`);
      }
      fields.push(parseInt(token, 10));
      pos = end;
    }
  }
  if (pos >= data.length || !WHITESPACE.has(data[pos]!)) {
    throw new FrameFormatError("missing header terminator");
  }
  pos++;
  return [fields[0]!, fields[1]!, fields[2]!, pos];
}

export interface Raster8 {
  width: number;
  height: number;
  /** RGB triplets, row-major, 3 * width * height bytes. */
  pixels: Uint8Array;
}

export interface Raster16 {
  width: number;
  height: number;
  pixels: Uint16Array;
}

export function decodePpm(data: Uint8Array): Raster8 {
  const [width, height, maxval, pos] = readHeader(data, "P6");
  if (maxval !== 255) throw new FrameFormatError(`unsupported maxval ${maxval}`);
  const n = width * height * 3;
  if (data.length < pos + n) throw new FrameFormatError("truncated pixel data");
  return { width, height, pixels: data.slice(pos, pos + n) };
}

export function decodePgm16(data: Uint8Array): Raster16 {
  const [width, height, maxval, pos] = readHeader(data, "P5");
  if (maxval !== 65535) throw new FrameFormatError(`unsupported maxval ${maxval}`);
  const n = width * height;
  if (data.length < pos + n * 2) throw new FrameFormatError("truncated pixel data");
  const pixels = new Uint16Array(n);
  for (let i = 0; i < n; i++) {
    pixels[i] = (data[pos + 2 * i]! << 8) | data[pos + 2 * i + 1]!; // big-endian
  }
  return { width, height, pixels };
}

export interface DecodedFrame {
  tick: number;
  width: number;
  height: number;
  rgb: Uint8Array;
  depth: Uint16Array;
  seg: Uint16Array;
  classSeg: Uint16Array;
  palette: Palette;
  classPalette: ClassPalette;
}

export function decodeFrame(msg: FrameMsg): DecodedFrame {
  const rgb = decodePpm(decodeBase64(msg.rgb_ppm));
  const depth = decodePgm16(decodeBase64(msg.depth_pgm));
  const seg = decodePgm16(decodeBase64(msg.seg_pgm));
  const classSeg = decodePgm16(decodeBase64(msg.class_pgm));
  for (const r of [depth, seg, classSeg]) {
    if (r.width !== rgb.width || r.height !== rgb.height) {
      throw new FrameFormatError("channel dimensions disagree");
    }
  }
  if (rgb.width !== msg.width || rgb.height !== msg.height) {
    throw new FrameFormatError("raster size disagrees with frame header");
  }
  return {
    tick: msg.tick,
    width: rgb.width,
    height: rgb.height,
    rgb: rgb.pixels,
    depth: depth.pixels,
    seg: seg.pixels,
    classSeg: classSeg.pixels,
    palette: msg.palette,
    classPalette: msg.class_palette,
  };
}

export type Channel = "rgb" | "depth" | "instances" | "classes";

export const CHANNELS: readonly Channel[] = ["rgb", "depth", "instances", "classes"];

/** Deterministic label color: golden-angle hue walk, background black. */
export function labelColor(index: number): [number, number, number] {
  if (index === 0) return [0, 0, 0];
  const hue = (index * 137.508) % 360;
  const c = 0.85;
  const x = c * (1 - Math.abs(((hue / 60) % 2) - 1));
  let rgb: [number, number, number];
  if (hue < 60) rgb = [c, x, 0];
  else if (hue < 120) rgb = [x, c, 0];
  else if (hue < 180) rgb = [0, c, x];
  else if (hue < 240) rgb = [0, x, c];
  else if (hue < 300) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  return [
    Math.round((rgb[0] + 0.12) * 255),
    Math.round((rgb[1] + 0.12) * 255),
    Math.round((rgb[2] + 0.12) * 255),
  ];
}

/** Expand one channel to RGBA for ImageData.  Depth maps near-bright to
 * far-dark against the largest depth in the frame; the segmentation
 * channels get one flat labelColor per index. */
export function channelToRgba(frame: DecodedFrame, channel: Channel): Uint8ClampedArray<ArrayBuffer> {
  const n = frame.width * frame.height;
  const out = new Uint8ClampedArray(n * 4);
  if (channel === "rgb") {
    for (let i = 0; i < n; i++) {
      out[4 * i] = frame.rgb[3 * i]!;
      out[4 * i + 1] = frame.rgb[3 * i + 1]!;
      out[4 * i + 2] = frame.rgb[3 * i + 2]!;
      out[4 * i + 3] = 255;
    }
    return out;
  }
  if (channel === "depth") {
    let far = 1;
    for (let i = 0; i < n; i++) far = Math.max(far, frame.depth[i]!);
    for (let i = 0; i < n; i++) {
      const v = 255 - Math.floor((frame.depth[i]! * 255) / far);
      out[4 * i] = v;
      out[4 * i + 1] = v;
      out[4 * i + 2] = v;
      out[4 * i + 3] = 255;
    }
    return out;
  }
  const values = channel === "instances" ? frame.seg : frame.classSeg;
  const cache = new Map<number, [number, number, number]>();
  for (let i = 0; i < n; i++) {
    const value = values[i]!;
    let color = cache.get(value);
    if (!color) {
      color = labelColor(value);
      cache.set(value, color);
    }
    out[4 * i] = color[0];
    out[4 * i + 1] = color[1];
    out[4 * i + 2] = color[2];
    out[4 * i + 3] = 255;
  }
  return out;
}

export interface PixelInfo {
  value: number;
  instance: string | null;
  objectClass: string | null;
}

/** What the instance channel labels at raster coordinates (x, y). */
export function instanceAt(frame: DecodedFrame, x: number, y: number): PixelInfo {
  if (x < 0 || y < 0 || x >= frame.width || y >= frame.height) {
    return { value: 0, instance: null, objectClass: null };
  }
  const value = frame.seg[y * frame.width + x]!;
  const entry = frame.palette[String(value)];
  return {
    value,
    instance: entry?.instance ?? null,
    objectClass: entry?.class ?? null,
  };
}
