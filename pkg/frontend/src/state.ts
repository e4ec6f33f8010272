/** Selector state: one current value per input variable, plus sweep choices.
 *
 * Values always stay within the domain fetched from the API; the control
 * widgets enforce bounds, this module never clamps silently.
 */

import type { CampaignSummary, Domain, RawPoint, VariableSpec } from "./api.js";

export interface SelectorState {
  campaignId: string | null;
  values: RawPoint;
  sweepVariable: string | null;
  steps: number;
}

export function defaultValue(spec: VariableSpec): number | string {
  if (spec.kind === "categorical") return spec.levels![0];
  const mid = (spec.lower! + spec.upper!) / 2;
  return spec.kind === "integer" ? Math.round(mid) : mid;
}

export function initialState(domain: Domain, campaignId: string | null = null): SelectorState {
  const values: RawPoint = {};
  for (const spec of domain.inputs) values[spec.name] = defaultValue(spec);
  return {
    campaignId,
    values,
    sweepVariable: domain.inputs[0]?.name ?? null,
    steps: 25,
  };
}

export function setValue(state: SelectorState, name: string, value: number | string): SelectorState {
  return { ...state, values: { ...state.values, [name]: value } };
}

export function setSweepVariable(state: SelectorState, name: string): SelectorState {
  return { ...state, sweepVariable: name };
}

export function setSteps(state: SelectorState, steps: number): SelectorState {
  return { ...state, steps };
}

/** The full point the readout panel queries. */
export function currentPoint(state: SelectorState): RawPoint {
  return { ...state.values };
}

/** Fixed values for the sweep request: everything except the varied input. */
export function sweepFixed(state: SelectorState): RawPoint {
  const fixed: RawPoint = {};
  for (const [name, value] of Object.entries(state.values)) {
    if (name !== state.sweepVariable) fixed[name] = value;
  }
  return fixed;
}

export interface PickerEntry {
  id: string;
  label: string;
  enabled: boolean;
  tooltip: string;
}

/** Campaigns with a fitted model are selectable; the rest are greyed out. */
export function pickerEntries(campaigns: CampaignSummary[]): PickerEntry[] {
  return campaigns.map((c) => ({
    id: c.campaign_id,
    label: `${c.simulator_id} — ${c.campaign_id.slice(0, 8)} (iter ${c.iteration})`,
    enabled: c.has_model,
    tooltip: c.has_model
      ? `${c.training_size} training points` + (c.stop_reason ? `, stopped: ${c.stop_reason}` : "")
      : "no model fitted yet — advance the campaign first",
  }));
}
