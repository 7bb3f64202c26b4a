/** Thin client over the curation service endpoints.
 *
 * The fetch function is injectable so tests can run against an in-memory
 * fixture service; the browser entrypoint passes window.fetch.
 */

import type { Decision, QueueFilters, QueueResponse, RecordDoc, Stats } from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && body.detail) detail = String(body.detail);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async getQueue(limit: number, filters: QueueFilters = {}): Promise<QueueResponse> {
    const params = new URLSearchParams({ limit: String(limit) });
    for (const [key, value] of Object.entries(filters)) {
      if (value) params.set(key, value);
    }
    return this.request<QueueResponse>(`/queue?${params}`);
  }

  async postDecision(
    decision: Decision,
    expectedVersion?: number,
  ): Promise<{ record: RecordDoc }> {
    return this.request<{ record: RecordDoc }>("/decisions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ...decision, expected_version: expectedVersion ?? null }),
    });
  }

  async getStats(): Promise<Stats> {
    return this.request<Stats>("/stats");
  }

  imageUrl(path: string): string {
    return this.baseUrl + path;
  }
}
