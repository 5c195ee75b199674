import type { DemoHit, MetricsSummary, QueueFilters, ReviewItem, StoredDemo } from "./types.js";

/** Error carrying the HTTP status and the service's detail message. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

let baseUrl = "";

export function setApiBase(url: string): void {
  baseUrl = url.endsWith("/") ? url.slice(0, -1) : url;
}

export function apiBase(): string {
  return baseUrl;
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(baseUrl + path, init);
  if (!res.ok) {
    let detail = res.statusText || `status ${res.status}`;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") {
        detail = body.detail;
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

function postJson<T>(path: string, payload: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

/** List review items; the service returns them newest-first. */
export function fetchRecords(filters: QueueFilters = {}): Promise<ReviewItem[]> {
  const params = new URLSearchParams();
  if (filters.status) {
    params.set("status", filters.status);
  }
  if (filters.domain) {
    params.set("domain", filters.domain);
  }
  const query = params.toString();
  return request<ReviewItem[]>(query ? `/api/records?${query}` : "/api/records");
}

/**
 * Store a corrected translation for a pending item. The service answers with
 * the stored demonstration, including the derived instruction list.
 */
export function submitFeedback(recordId: string, postEdit: string, reviewerNote?: string): Promise<StoredDemo> {
  const payload: { post_edit: string; reviewer_note?: string } = { post_edit: postEdit };
  if (reviewerNote) {
    payload.reviewer_note = reviewerNote;
  }
  return postJson<StoredDemo>(`/api/records/${encodeURIComponent(recordId)}/feedback`, payload);
}

export function searchDemos(query: string, domain: string, k?: number): Promise<DemoHit[]> {
  const params = new URLSearchParams({ q: query, domain });
  if (k !== undefined) {
    params.set("k", String(k));
  }
  return request<DemoHit[]>(`/api/demos/search?${params.toString()}`);
}

/** Ask the service how a post-edit would be rendered as revision instructions. */
export function previewInstructions(hypothesis: string, reference: string): Promise<string[]> {
  return postJson<{ instructions: string[] }>("/api/feedback/preview", {
    hypothesis,
    reference,
  }).then((body) => body.instructions);
}

export function fetchSummary(): Promise<MetricsSummary> {
  return request<MetricsSummary>("/api/metrics/summary");
}
