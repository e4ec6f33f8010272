import { describe, expect, it } from "vitest";

import type { SweepResponse } from "../src/api.js";
import {
  bandPath,
  buildSweepSeries,
  buildTradeoff,
  extent,
  linePath,
  nearestIndex,
  rampColor,
  xScale,
  yScale,
} from "../src/charts.js";
import { Z95 } from "../src/readout.js";

const sweep: SweepResponse = {
  grid: [10, 32.5, 55, 77.5, 100],
  mean: [
    [0.1, 40],
    [0.4, 40],
    [2.5, 40],
    [9.0, 40],
    [21.0, 40],
  ],
  variance: [
    [0.04, 1],
    [0.09, 1],
    [0.16, 1],
    [0.25, 1],
    [0.36, 1],
  ],
};

describe("sweep series", () => {
  it("copies the API arrays verbatim", () => {
    const s = buildSweepSeries(sweep, 0);
    expect(s.x).toEqual(sweep.grid);
    expect(s.mean).toEqual(sweep.mean.map((r) => r[0]));
    // strict identity of the numbers, not just approximate equality
    s.mean.forEach((v, i) => expect(Object.is(v, sweep.mean[i][0])).toBe(true));
  });

  it("derives the band as mean +- 1.96 sigma", () => {
    const s = buildSweepSeries(sweep, 0);
    s.mean.forEach((m, i) => {
      const sigma = Math.sqrt(sweep.variance[i][0]);
      expect(s.lo[i]).toBeCloseTo(m - Z95 * sigma, 12);
      expect(s.hi[i]).toBeCloseTo(m + Z95 * sigma, 12);
    });
  });

  it("maps categorical grids onto level indices with labels", () => {
    const cat: SweepResponse = {
      grid: ["low", "med", "high"],
      mean: [[1], [2], [3]],
      variance: [[0], [0], [0]],
    };
    const s = buildSweepSeries(cat, 0);
    expect(s.x).toEqual([0, 1, 2]);
    expect(s.labels).toEqual(["low", "med", "high"]);
  });
});

describe("trade-off series", () => {
  it("pairs KPI means in grid order with normalized color positions", () => {
    const t = buildTradeoff(sweep, 0, 1);
    expect(t.x).toEqual([0.1, 0.4, 2.5, 9.0, 21.0]);
    expect(t.y).toEqual([40, 40, 40, 40, 40]);
    expect(t.t[0]).toBe(0);
    expect(t.t[4]).toBe(1);
  });

  it("kpi_x = kpi_y gives the diagonal", () => {
    const t = buildTradeoff(sweep, 0, 0);
    t.x.forEach((x, i) => expect(t.y[i]).toBe(x));
  });
});

describe("svg helpers", () => {
  const frame = { width: 100, height: 50, pad: 10 };

  it("scales extents onto the padded frame", () => {
    const fx = xScale(frame, { min: 0, max: 10 });
    const fy = yScale(frame, { min: 0, max: 10 });
    expect(fx(0)).toBe(10);
    expect(fx(10)).toBe(90);
    expect(fy(0)).toBe(40); // y axis points down
    expect(fy(10)).toBe(10);
  });

  it("degenerate extents stay finite", () => {
    const e = extent([5, 5, 5]);
    expect(e.max).toBeGreaterThan(e.min);
    expect(extent([])).toEqual({ min: 0, max: 1 });
  });

  it("builds well-formed paths", () => {
    const fx = xScale(frame, { min: 0, max: 1 });
    const fy = yScale(frame, { min: 0, max: 1 });
    const line = linePath([0, 0.5, 1], [0, 1, 0], fx, fy);
    expect(line).toMatch(/^M[\d.]+,[\d.]+L/);
    const band = bandPath([0, 1], [0, 0], [1, 1], fx, fy);
    expect(band.endsWith("Z")).toBe(true);
    expect(band.match(/L/g)!.length).toBe(3);
  });

  it("nearestIndex finds the hovered point", () => {
    const fx = xScale(frame, { min: 0, max: 4 });
    expect(nearestIndex([0, 1, 2, 3, 4], fx, fx(2.2))).toBe(2);
    expect(nearestIndex([0, 1, 2, 3, 4], fx, fx(3.8))).toBe(4);
  });

  it("color ramp spans blue to red", () => {
    expect(rampColor(0)).toBe("hsl(240, 75%, 45%)");
    expect(rampColor(1)).toBe("hsl(0, 75%, 45%)");
  });
});
