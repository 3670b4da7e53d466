/** Thin typed client over the level service's JSON API. */

import { GenerateForm, LevelRecord, ModelInfo, ValidationStats } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      throw new ApiError(res.status, body?.detail ?? res.statusText);
    }
    return body as T;
  }

  health(): Promise<{ status: string; model_loaded: boolean }> {
    return this.request("/api/health");
  }

  modelInfo(): Promise<ModelInfo> {
    return this.request("/api/model-info");
  }

  generate(form: GenerateForm): Promise<LevelRecord> {
    const payload: Record<string, unknown> = {
      width: form.width,
      height: form.height,
      symmetry: form.symmetry,
      seed: form.seed,
    };
    if (form.moves !== null) {
      payload.moves = form.moves;
    }
    return this.request("/api/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  validate(grid: number[][], runs: number): Promise<ValidationStats> {
    return this.request("/api/validate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ grid, runs }),
    });
  }
}
