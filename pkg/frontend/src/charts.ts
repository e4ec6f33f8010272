/** Chart-data builders and SVG path helpers.
 *
 * Builders copy API arrays verbatim (same numbers, same order); only the
 * uncertainty band edges mean ± 1.96σ are derived, for drawing.
 */

import type { SweepResponse } from "./api.js";
import { Z95 } from "./readout.js";

export interface SweepSeries {
  /** numeric x positions: the grid itself, or level indices for categoricals */
  x: number[];
  /** tick labels (level names for categorical sweeps) */
  labels: string[];
  mean: number[];
  lo: number[];
  hi: number[];
}

export function buildSweepSeries(resp: SweepResponse, outputIndex: number): SweepSeries {
  const numeric = resp.grid.every((g) => typeof g === "number");
  const x = resp.grid.map((g, i) => (numeric ? (g as number) : i));
  const labels = resp.grid.map((g) => String(g));
  const mean = resp.mean.map((row) => row[outputIndex]);
  const sigma = resp.variance.map((row) => Math.sqrt(row[outputIndex]));
  return {
    x,
    labels,
    mean,
    lo: mean.map((m, i) => m - Z95 * sigma[i]),
    hi: mean.map((m, i) => m + Z95 * sigma[i]),
  };
}

export interface TradeoffSeries {
  /** KPI means along the sweep, connected in grid order */
  x: number[];
  y: number[];
  /** normalized grid position in [0, 1], for coloring by the varied input */
  t: number[];
  labels: string[];
}

export function buildTradeoff(resp: SweepResponse, kpiX: number, kpiY: number): TradeoffSeries {
  const n = resp.grid.length;
  return {
    x: resp.mean.map((row) => row[kpiX]),
    y: resp.mean.map((row) => row[kpiY]),
    t: resp.grid.map((_, i) => (n > 1 ? i / (n - 1) : 0)),
    labels: resp.grid.map((g) => String(g)),
  };
}

export interface Extent {
  min: number;
  max: number;
}

export function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!Number.isFinite(min)) return { min: 0, max: 1 };
  if (min === max) return { min: min - 0.5, max: max + 0.5 };
  return { min, max };
}

export interface Frame {
  width: number;
  height: number;
  pad: number;
}

export function xScale(frame: Frame, ex: Extent): (v: number) => number {
  const span = ex.max - ex.min;
  return (v) => frame.pad + ((v - ex.min) / span) * (frame.width - 2 * frame.pad);
}

export function yScale(frame: Frame, ex: Extent): (v: number) => number {
  const span = ex.max - ex.min;
  return (v) => frame.height - frame.pad - ((v - ex.min) / span) * (frame.height - 2 * frame.pad);
}

export function linePath(xs: number[], ys: number[], fx: (v: number) => number, fy: (v: number) => number): string {
  return xs
    .map((x, i) => `${i === 0 ? "M" : "L"}${fx(x).toFixed(2)},${fy(ys[i]).toFixed(2)}`)
    .join("");
}

/** Closed polygon tracing hi left-to-right then lo back right-to-left. */
export function bandPath(
  xs: number[],
  lo: number[],
  hi: number[],
  fx: (v: number) => number,
  fy: (v: number) => number,
): string {
  const up = xs.map((x, i) => `${i === 0 ? "M" : "L"}${fx(x).toFixed(2)},${fy(hi[i]).toFixed(2)}`);
  const down = [...xs.keys()]
    .reverse()
    .map((i) => `L${fx(xs[i]).toFixed(2)},${fy(lo[i]).toFixed(2)}`);
  return up.join("") + down.join("") + "Z";
}

/** Color ramp for the trade-off scatter: blue (t=0) through red (t=1). */
export function rampColor(t: number): string {
  const hue = 240 - 240 * Math.min(Math.max(t, 0), 1);
  return `hsl(${hue.toFixed(0)}, 75%, 45%)`;
}

/** Index of the series point nearest to a pixel x, for hover readouts. */
export function nearestIndex(xs: number[], fx: (v: number) => number, pixelX: number): number {
  let best = 0;
  let bestDist = Infinity;
  xs.forEach((x, i) => {
    const d = Math.abs(fx(x) - pixelX);
    if (d < bestDist) {
      bestDist = d;
      best = i;
    }
  });
  return best;
}
