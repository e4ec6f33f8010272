/** DOM layer: campaign picker, input selectors, KPI readout, sweep and
 * trade-off charts. All numbers shown come from API responses; this module
 * only wires widgets to the tested builders in state/readout/charts.
 */

import {
  ApiClient,
  ApiError,
  type CampaignSummary,
  type Domain,
  type SweepResponse,
  type VariableSpec,
} from "./api.js";
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
  type Frame,
} from "./charts.js";
import { LatestWins, debounce } from "./debounce.js";
import { buildReadout, formatReadout, formatValue } from "./readout.js";
import {
  currentPoint,
  initialState,
  pickerEntries,
  setSteps,
  setSweepVariable,
  setValue,
  sweepFixed,
  type SelectorState,
} from "./state.js";

const DEBOUNCE_MS = 150;
const FRAME: Frame = { width: 420, height: 220, pad: 34 };
const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export class DashboardApp {
  private state: SelectorState | null = null;
  private domain: Domain | null = null;
  private campaigns: CampaignSummary[] = [];
  private lastSweep: SweepResponse | null = null;
  private kpiX = 0;
  private kpiY = 1;

  private banner: HTMLElement;
  private picker: HTMLSelectElement;
  private selectorsBox: HTMLElement;
  private readoutBox: HTMLElement;
  private sweepBox: HTMLElement;
  private tradeoffBox: HTMLElement;

  private predictGate = new LatestWins();
  private sweepGate = new LatestWins();
  private refreshDebounced: ReturnType<typeof debounce<[]>>;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
  ) {
    this.banner = el("div", { class: "banner hidden" });
    this.picker = el("select", { class: "picker" });
    this.selectorsBox = el("div", { class: "selectors" });
    this.readoutBox = el("div", { class: "readout" });
    this.sweepBox = el("div", { class: "charts" });
    this.tradeoffBox = el("div", { class: "charts" });
    this.refreshDebounced = debounce(() => void this.refresh(), DEBOUNCE_MS);
  }

  async start(): Promise<void> {
    const title = el("h1", {}, "proxsim explorer");
    const pickerRow = el("div", { class: "picker-row" });
    pickerRow.append(el("label", {}, "campaign:"), this.picker);
    const reload = el("button", {}, "reload");
    reload.addEventListener("click", () => void this.loadCampaigns());
    pickerRow.append(reload);
    this.root.append(title, this.banner, pickerRow, this.selectorsBox, this.readoutBox,
                     el("h2", {}, "sweep"), this.sweepBox,
                     el("h2", {}, "KPI trade-off"), this.tradeoffBox);
    this.picker.addEventListener("change", () => void this.selectCampaign(this.picker.value));
    await this.loadCampaigns();
  }

  private showBanner(message: string): void {
    this.banner.textContent = "";
    this.banner.append(el("span", {}, message));
    const retry = el("button", {}, "retry");
    retry.addEventListener("click", () => void this.loadCampaigns());
    this.banner.append(retry);
    this.banner.classList.remove("hidden");
  }

  private clearBanner(): void {
    this.banner.classList.add("hidden");
  }

  async loadCampaigns(): Promise<void> {
    try {
      this.campaigns = await this.client.listCampaigns();
      this.clearBanner();
    } catch (err) {
      this.showBanner(`cannot reach the server: ${err instanceof Error ? err.message : err}`);
      return;
    }
    this.picker.textContent = "";
    this.picker.append(el("option", { value: "", disabled: "", selected: "" }, "pick a campaign"));
    for (const entry of pickerEntries(this.campaigns)) {
      const opt = el("option", { value: entry.id, title: entry.tooltip }, entry.label);
      if (!entry.enabled) opt.setAttribute("disabled", "");
      this.picker.append(opt);
    }
  }

  private async selectCampaign(campaignId: string): Promise<void> {
    const summary = this.campaigns.find((c) => c.campaign_id === campaignId);
    if (!summary) return;
    try {
      const sim = await this.client.getSimulator(summary.simulator_id);
      this.domain = sim.domain;
    } catch (err) {
      this.showBanner(`cannot load domain: ${err instanceof Error ? err.message : err}`);
      return;
    }
    this.state = initialState(this.domain, campaignId);
    this.kpiX = 0;
    this.kpiY = Math.min(1, this.domain.outputs.length - 1);
    this.buildSelectors();
    this.refreshDebounced.flush();
    this.refreshDebounced();
  }

  /** Selector widgets mirror the fetched domain; the varied sweep input
   * stays visible but greyed. */
  private buildSelectors(): void {
    const domain = this.domain!;
    const state = this.state!;
    this.selectorsBox.textContent = "";

    for (const spec of domain.inputs) {
      const row = el("div", { class: "selector-row", "data-variable": spec.name });
      row.append(el("label", {}, spec.unit ? `${spec.name} (${spec.unit})` : spec.name));
      row.append(this.makeWidget(spec));
      row.append(el("span", { class: "inline-error hidden" }));
      this.selectorsBox.append(row);
    }

    const sweepRow = el("div", { class: "selector-row sweep-config" });
    sweepRow.append(el("label", {}, "sweep variable"));
    const sweepSel = el("select", {});
    for (const spec of domain.inputs) {
      const opt = el("option", { value: spec.name }, spec.name);
      if (spec.name === state.sweepVariable) opt.setAttribute("selected", "");
      sweepSel.append(opt);
    }
    sweepSel.addEventListener("change", () => {
      this.state = setSweepVariable(this.state!, sweepSel.value);
      this.markSweptSelector();
      this.refreshDebounced();
    });
    sweepRow.append(sweepSel);
    sweepRow.append(el("label", {}, "steps"));
    const steps = el("input", { type: "number", min: "2", max: "200", value: String(state.steps) });
    steps.addEventListener("change", () => {
      const n = Math.max(2, Number(steps.value) || 2);
      this.state = setSteps(this.state!, n);
      this.refreshDebounced();
    });
    sweepRow.append(steps);
    this.selectorsBox.append(sweepRow);
    this.markSweptSelector();
  }

  private makeWidget(spec: VariableSpec): HTMLElement {
    const state = this.state!;
    if (spec.kind === "categorical") {
      const select = el("select", {});
      for (const level of spec.levels!) {
        const opt = el("option", { value: level }, level);
        if (level === state.values[spec.name]) opt.setAttribute("selected", "");
        select.append(opt);
      }
      select.addEventListener("change", () => this.onValueChange(spec.name, select.value));
      return select;
    }
    const wrap = el("span", { class: "slider-pair" });
    const step = spec.kind === "integer" ? "1" : String((spec.upper! - spec.lower!) / 200);
    const slider = el("input", {
      type: "range",
      min: String(spec.lower),
      max: String(spec.upper),
      step,
      value: String(state.values[spec.name]),
    });
    const num = el("input", {
      type: "number",
      min: String(spec.lower),
      max: String(spec.upper),
      step,
      value: String(state.values[spec.name]),
    });
    const push = (raw: string) => {
      const value = spec.kind === "integer" ? Math.round(Number(raw)) : Number(raw);
      slider.value = String(value);
      num.value = String(value);
      this.onValueChange(spec.name, value);
    };
    slider.addEventListener("input", () => push(slider.value));
    num.addEventListener("change", () => push(num.value));
    wrap.append(slider, num);
    return wrap;
  }

  private markSweptSelector(): void {
    const swept = this.state?.sweepVariable;
    this.selectorsBox.querySelectorAll<HTMLElement>(".selector-row[data-variable]").forEach((row) => {
      const isSwept = row.dataset.variable === swept;
      row.classList.toggle("swept", isSwept);
      row.querySelectorAll("input, select").forEach((w) => {
        (w as HTMLInputElement).disabled = isSwept;
      });
    });
  }

  private onValueChange(name: string, value: number | string): void {
    if (!this.state) return;
    this.state = setValue(this.state, name, value);
    this.clearInlineErrors();
    this.refreshDebounced();
  }

  private clearInlineErrors(): void {
    this.selectorsBox.querySelectorAll(".inline-error").forEach((e) => {
      e.classList.add("hidden");
      e.textContent = "";
    });
  }

  private showInlineError(variable: string | null, message: string): void {
    const row = variable
      ? this.selectorsBox.querySelector(`.selector-row[data-variable="${variable}"]`)
      : null;
    const slot = (row ?? this.selectorsBox).querySelector(".inline-error");
    if (slot) {
      slot.textContent = message;
      slot.classList.remove("hidden");
    }
  }

  /** One debounced refresh = one predict + one sweep, latest-wins each. */
  private async refresh(): Promise<void> {
    if (!this.state?.campaignId || !this.domain) return;
    const campaignId = this.state.campaignId;

    try {
      const resp = await this.client.predict(
        campaignId,
        [currentPoint(this.state)],
        this.predictGate.begin(),
      );
      this.renderReadout(resp);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return;
      if (err instanceof ApiError && err.code === "out_of_domain") {
        const details = err.details as { variable?: string } | undefined;
        this.showInlineError(details?.variable ?? null, err.message);
        // previous readout stays on screen
      } else {
        this.showBanner(String(err instanceof Error ? err.message : err));
      }
      return;
    }

    if (!this.state.sweepVariable) return;
    try {
      const sweep = await this.client.sweep(
        campaignId,
        { vary: this.state.sweepVariable, fixed: sweepFixed(this.state), steps: this.state.steps },
        this.sweepGate.begin(),
      );
      this.lastSweep = sweep;
      this.renderSweep(sweep);
      this.renderTradeoff(sweep);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return;
      if (err instanceof ApiError && err.code === "out_of_domain") {
        const details = err.details as { variable?: string } | undefined;
        this.showInlineError(details?.variable ?? null, err.message);
      } else {
        this.showBanner(String(err instanceof Error ? err.message : err));
      }
    }
  }

  private renderReadout(resp: { mean: number[][]; variance: number[][] }): void {
    this.readoutBox.textContent = "";
    for (const kpi of buildReadout(this.domain!, resp)) {
      const card = el("div", { class: "kpi-card" });
      card.append(el("div", { class: "kpi-name" }, kpi.name));
      card.append(el("div", { class: "kpi-value" }, formatReadout(kpi)));
      card.append(
        el(
          "div",
          { class: "kpi-interval", title: "95% predictive interval (observation level)" },
          `95% interval: [${formatValue(kpi.lo)}, ${formatValue(kpi.hi)}]`,
        ),
      );
      this.readoutBox.append(card);
    }
  }

  private renderSweep(sweep: SweepResponse): void {
    this.sweepBox.textContent = "";
    const domain = this.domain!;
    domain.outputs.forEach((spec, j) => {
      const series = buildSweepSeries(sweep, j);
      const ex = extent(series.x);
      const ey = extent([...series.lo, ...series.hi]);
      const fx = xScale(FRAME, ex);
      const fy = yScale(FRAME, ey);

      const fig = el("figure", { class: "chart" });
      fig.append(el("figcaption", {}, `${spec.name} vs ${this.state!.sweepVariable}`));
      const svg = svgEl("svg", {
        viewBox: `0 0 ${FRAME.width} ${FRAME.height}`,
        width: String(FRAME.width),
        height: String(FRAME.height),
      });
      svg.append(
        svgEl("path", { d: bandPath(series.x, series.lo, series.hi, fx, fy), class: "band" }),
      );
      svg.append(svgEl("path", { d: linePath(series.x, series.mean, fx, fy), class: "mean" }));
      const hover = el("div", { class: "hover-tip hidden" });
      svg.addEventListener("mousemove", (ev) => {
        const rect = (svg as unknown as HTMLElement).getBoundingClientRect();
        const i = nearestIndex(series.x, fx, ((ev.clientX - rect.left) / rect.width) * FRAME.width);
        hover.textContent =
          `${this.state!.sweepVariable}=${series.labels[i]}: ` +
          `${formatValue(series.mean[i])} [${formatValue(series.lo[i])}, ${formatValue(series.hi[i])}]`;
        hover.classList.remove("hidden");
      });
      svg.addEventListener("mouseleave", () => hover.classList.add("hidden"));
      fig.append(svg as unknown as HTMLElement, hover);
      this.sweepBox.append(fig);
    });
  }

  private renderTradeoff(sweep: SweepResponse): void {
    this.tradeoffBox.textContent = "";
    const outputs = this.domain!.outputs;
    if (outputs.length < 2) {
      this.tradeoffBox.append(
        el("p", { class: "hint" }, "trade-off view needs at least two KPIs"),
      );
      return;
    }

    const controls = el("div", { class: "selector-row" });
    const makeAxisSelect = (value: number, onChange: (j: number) => void) => {
      const sel = el("select", {});
      outputs.forEach((o, j) => {
        const opt = el("option", { value: String(j) }, o.name);
        if (j === value) opt.setAttribute("selected", "");
        sel.append(opt);
      });
      sel.addEventListener("change", () => onChange(Number(sel.value)));
      return sel;
    };
    controls.append(el("label", {}, "x:"), makeAxisSelect(this.kpiX, (j) => {
      this.kpiX = j;
      if (this.lastSweep) this.renderTradeoff(this.lastSweep);
    }));
    controls.append(el("label", {}, "y:"), makeAxisSelect(this.kpiY, (j) => {
      this.kpiY = j;
      if (this.lastSweep) this.renderTradeoff(this.lastSweep);
    }));
    this.tradeoffBox.append(controls);

    const series = buildTradeoff(sweep, this.kpiX, this.kpiY);
    const ex = extent(series.x);
    const ey = extent(series.y);
    const fx = xScale(FRAME, ex);
    const fy = yScale(FRAME, ey);
    const fig = el("figure", { class: "chart" });
    fig.append(
      el(
        "figcaption",
        {},
        `${outputs[this.kpiX].name} vs ${outputs[this.kpiY].name}, colored by ${this.state!.sweepVariable}`,
      ),
    );
    const svg = svgEl("svg", {
      viewBox: `0 0 ${FRAME.width} ${FRAME.height}`,
      width: String(FRAME.width),
      height: String(FRAME.height),
    });
    svg.append(svgEl("path", { d: linePath(series.x, series.y, fx, fy), class: "trace" }));
    series.x.forEach((x, i) => {
      const dot = svgEl("circle", {
        cx: fx(x).toFixed(2),
        cy: fy(series.y[i]).toFixed(2),
        r: "3.5",
        fill: rampColor(series.t[i]),
      });
      dot.append(svgEl("title", {}));
      dot.querySelector("title")!.textContent =
        `${this.state!.sweepVariable}=${series.labels[i]}: ` +
        `(${formatValue(series.x[i])}, ${formatValue(series.y[i])})`;
      svg.append(dot);
    });
    fig.append(svg as unknown as HTMLElement);
    this.tradeoffBox.append(fig);
  }
}
