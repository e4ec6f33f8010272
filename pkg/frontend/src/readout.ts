/** KPI readout model: API numbers kept verbatim, formatting separate.
 *
 * The interval is the predictive (observation-level) 95% band, matching the
 * model's variance convention; the multiplier mirrors the server's.
 */

import type { Domain, PredictResponse } from "./api.js";

export const Z95 = 1.959964;

export interface KpiReadout {
  name: string;
  unit: string;
  /** verbatim API value */
  mean: number;
  /** verbatim API value */
  variance: number;
  sigma: number;
  lo: number;
  hi: number;
}

export function buildReadout(domain: Domain, resp: PredictResponse, row = 0): KpiReadout[] {
  return domain.outputs.map((spec, j) => {
    const mean = resp.mean[row][j];
    const variance = resp.variance[row][j];
    const sigma = Math.sqrt(variance);
    return {
      name: spec.name,
      unit: spec.unit ?? "",
      mean,
      variance,
      sigma,
      lo: mean - Z95 * sigma,
      hi: mean + Z95 * sigma,
    };
  });
}

export function formatValue(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  const a = Math.abs(x);
  if (a !== 0 && (a >= 1e6 || a < 1e-3)) return x.toExponential(3);
  return x.toPrecision(5).replace(/\.?0+$/, (m) => (m.includes(".") ? "" : m));
}

export function formatReadout(r: KpiReadout): string {
  const unit = r.unit ? ` ${r.unit}` : "";
  return `${formatValue(r.mean)} ± ${formatValue(Z95 * r.sigma)}${unit}`;
}
