// Thin client for the explanation service; newer requests cancel older ones.

import type { ApiError, Explanation } from "./types.js";

export class ServiceError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(private baseUrl: string,
              private fetchImpl: typeof fetch = fetch) {}

  async health(): Promise<{ status: string; models: string[] }> {
    const res = await this.fetchImpl(`${this.baseUrl}/health`);
    return res.json();
  }

  /** POST /explain; at most one request in flight, older ones aborted. */
  async explain(smiles: string, model: string | null): Promise<Explanation> {
    if (this.inflight) this.inflight.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const res = await this.fetchImpl(`${this.baseUrl}/explain`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(model ? { smiles, model } : { smiles }),
        signal: controller.signal,
      });
      const body = await res.json();
      if (!res.ok) {
        const err = body as ApiError;
        throw new ServiceError(
          err.error?.code ?? "unknown",
          err.error?.message ?? `status ${res.status}`,
          res.status,
        );
      }
      return body as Explanation;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }
}
