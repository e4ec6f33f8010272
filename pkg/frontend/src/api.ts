/** Typed client for the proxsim HTTP API (/api/v1). */

export interface VariableSpec {
  name: string;
  kind: "continuous" | "integer" | "categorical";
  lower?: number;
  upper?: number;
  levels?: string[];
  unit?: string;
}

export interface Domain {
  inputs: VariableSpec[];
  outputs: VariableSpec[];
}

export interface SimulatorInfo {
  id: string;
  domain: Domain;
  deterministic: boolean;
  cost_hint: number;
}

export interface KpiMetrics {
  rmse: number;
  mae: number;
  r2: number;
  picp95: number;
}

export interface CampaignSummary {
  campaign_id: string;
  simulator_id: string;
  iteration: number;
  simulator_calls_used: number;
  training_size: number;
  stop_reason: string | null;
  has_model: boolean;
  metrics_history: { iteration: number; metrics: Record<string, KpiMetrics> }[];
}

export type RawPoint = Record<string, number | string>;

export interface PredictResponse {
  mean: number[][];
  variance: number[][];
}

export interface SweepRequest {
  vary: string;
  fixed: RawPoint;
  steps: number;
}

export interface SweepResponse {
  grid: (number | string)[];
  mean: number[][];
  variance: number[][];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details?: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await fetch(`${this.baseUrl}/api/v1${path}`, init);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(0, "unreachable", `cannot reach server: ${String(err)}`);
    }
    if (!res.ok) {
      let code = "error";
      let message = `${res.status} ${res.statusText}`;
      let details: unknown;
      try {
        const body = (await res.json()) as { code?: string; message?: string; details?: unknown };
        code = body.code ?? code;
        message = body.message ?? message;
        details = body.details;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(res.status, code, message, details);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  }

  listSimulators(): Promise<SimulatorInfo[]> {
    return this.request("/simulators");
  }

  getSimulator(id: string): Promise<SimulatorInfo> {
    return this.request(`/simulators/${encodeURIComponent(id)}`);
  }

  listCampaigns(): Promise<CampaignSummary[]> {
    return this.request("/campaigns");
  }

  getCampaign(id: string): Promise<CampaignSummary> {
    return this.request(`/campaigns/${encodeURIComponent(id)}`);
  }

  createCampaign(simulatorId: string, config: Record<string, unknown>): Promise<{ campaign_id: string }> {
    return this.post("/campaigns", { simulator_id: simulatorId, config });
  }

  advance(id: string, iterations: number): Promise<CampaignSummary> {
    return this.post(`/campaigns/${encodeURIComponent(id)}/advance`, { iterations });
  }

  predict(id: string, points: RawPoint[], signal?: AbortSignal): Promise<PredictResponse> {
    return this.post(`/campaigns/${encodeURIComponent(id)}/predict`, { points }, signal);
  }

  sweep(id: string, req: SweepRequest, signal?: AbortSignal): Promise<SweepResponse> {
    return this.post(`/campaigns/${encodeURIComponent(id)}/sweep`, req, signal);
  }
}
