import { describe, expect, it } from "vitest";

import type { CampaignSummary, Domain } from "../src/api.js";
import {
  currentPoint,
  defaultValue,
  initialState,
  pickerEntries,
  setSweepVariable,
  setValue,
  sweepFixed,
} from "../src/state.js";

const domain: Domain = {
  inputs: [
    { name: "demand", kind: "continuous", lower: 10, upper: 100, unit: "flights/h" },
    { name: "capacity", kind: "integer", lower: 20, upper: 61 },
    { name: "mode", kind: "categorical", levels: ["low", "med", "high"] },
  ],
  outputs: [{ name: "avg_delay", kind: "continuous", lower: -10, upper: 110, unit: "min" }],
};

describe("selector defaults", () => {
  it("uses the midpoint for numeric inputs, rounded for integers", () => {
    expect(defaultValue(domain.inputs[0])).toBe(55);
    expect(defaultValue(domain.inputs[1])).toBe(41); // round(40.5)
  });

  it("uses the first level for categoricals", () => {
    expect(defaultValue(domain.inputs[2])).toBe("low");
  });

  it("covers every input exactly once", () => {
    const state = initialState(domain, "c1");
    expect(Object.keys(state.values).sort()).toEqual(["capacity", "demand", "mode"]);
    expect(state.sweepVariable).toBe("demand");
  });
});

describe("state transitions are immutable", () => {
  it("setValue returns a new object and keeps the old one intact", () => {
    const a = initialState(domain, "c1");
    const b = setValue(a, "demand", 72);
    expect(a.values.demand).toBe(55);
    expect(b.values.demand).toBe(72);
    expect(b).not.toBe(a);
  });
});

describe("point construction", () => {
  it("currentPoint carries all inputs", () => {
    const state = setValue(initialState(domain, "c1"), "mode", "high");
    expect(currentPoint(state)).toEqual({ demand: 55, capacity: 41, mode: "high" });
  });

  it("sweepFixed drops exactly the varied variable", () => {
    const state = setSweepVariable(initialState(domain, "c1"), "capacity");
    expect(sweepFixed(state)).toEqual({ demand: 55, mode: "low" });
  });
});

describe("campaign picker entries", () => {
  const summaries: CampaignSummary[] = [
    {
      campaign_id: "aaaa1111",
      simulator_id: "atm_slot_overload",
      iteration: 4,
      simulator_calls_used: 14,
      training_size: 14,
      stop_reason: null,
      has_model: true,
      metrics_history: [],
    },
    {
      campaign_id: "bbbb2222",
      simulator_id: "branin",
      iteration: 0,
      simulator_calls_used: 0,
      training_size: 0,
      stop_reason: null,
      has_model: false,
      metrics_history: [],
    },
  ];

  it("enables only campaigns with a fitted model", () => {
    const entries = pickerEntries(summaries);
    expect(entries[0].enabled).toBe(true);
    expect(entries[1].enabled).toBe(false);
    expect(entries[1].tooltip).toMatch(/no model/);
  });
});
