/**
 * Pixel-level rendering: one grid cell becomes one RGBA pixel, scaled up
 * on the canvas with image smoothing off so cells stay crisp.
 */

import { GridFrame, Phase } from "./protocol.js";

export type Rgb = readonly [number, number, number];

export const UNBURNT_GREEN: Rgb = [34, 139, 34];
export const BURNT_BLACK: Rgb = [0, 0, 0];
export const SUPPRESSED_PURPLE: Rgb = [160, 32, 240];
// Burning cells sweep orange -> red as intensity climbs.
const BURNING_LOW: Rgb = [255, 165, 0];
const BURNING_HIGH: Rgb = [220, 20, 20];

export function burningColor(intensity: number): Rgb {
  const t = Math.min(1, Math.max(0, intensity));
  return [
    Math.round(BURNING_LOW[0] + t * (BURNING_HIGH[0] - BURNING_LOW[0])),
    Math.round(BURNING_LOW[1] + t * (BURNING_HIGH[1] - BURNING_LOW[1])),
    Math.round(BURNING_LOW[2] + t * (BURNING_HIGH[2] - BURNING_LOW[2])),
  ];
}

export function cellColor(phase: Phase, intensity: number): Rgb {
  switch (phase) {
    case Phase.Unburnt:
      return UNBURNT_GREEN;
    case Phase.Burning:
      return burningColor(intensity);
    case Phase.Burnt:
      return BURNT_BLACK;
    case Phase.Suppressed:
      return SUPPRESSED_PURPLE;
  }
}

/** Paint the frame into an RGBA buffer (4 bytes per cell, row-major). */
export function paintGrid(
  frame: GridFrame,
  out?: Uint8ClampedArray<ArrayBuffer>,
): Uint8ClampedArray<ArrayBuffer> {
  const cells = frame.height * frame.width;
  const buf = out ?? new Uint8ClampedArray(cells * 4);
  if (buf.length !== cells * 4) {
    throw new Error(`buffer holds ${buf.length / 4} pixels, grid has ${cells}`);
  }
  for (let i = 0; i < cells; i += 1) {
    const [r, g, b] = cellColor(frame.phase[i]! as Phase, frame.fire[i]!);
    const o = i * 4;
    buf[o] = r;
    buf[o + 1] = g;
    buf[o + 2] = b;
    buf[o + 3] = 255;
  }
  return buf;
}

export function pixelAt(buf: Uint8ClampedArray, width: number, row: number, col: number): Rgb {
  const o = (row * width + col) * 4;
  return [buf[o]!, buf[o + 1]!, buf[o + 2]!];
}

/**
 * Burnt-count sparkline as a polyline in a w x h box, y growing downward.
 * The series is scaled to its own max; a flat zero series draws along the
 * bottom edge.
 */
export function sparklinePoints(
  series: number[],
  w: number,
  h: number,
): Array<[number, number]> {
  if (series.length === 0) {
    return [];
  }
  if (series.length === 1) {
    return [[0, h - 1]];
  }
  const max = Math.max(...series, 1);
  const dx = (w - 1) / (series.length - 1);
  return series.map((v, i) => [i * dx, (h - 1) * (1 - v / max)]);
}
