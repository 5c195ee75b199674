// Response shapes of the review service. Field names mirror the JSON
// payloads exactly; the UI never fabricates fields on top of them.

export type ReviewStatus = "pending" | "reviewed";

export interface ReviewItem {
  id: string;
  source: string;
  draft: string;
  refined: string | null;
  final: string;
  domain: string;
  status: ReviewStatus;
}

export interface StoredDemo {
  id: string;
  domain: string;
  source: string;
  hypothesis: string;
  reference: string;
  feedback: string[];
  provenance: string;
  created_at: string;
}

export interface DemoHit {
  id: string;
  bm25: number;
  recall: number | null;
  source: string;
  hypothesis: string;
  reference: string;
  feedback: string[];
  provenance: string;
}

export interface MetricsSummary {
  records: number;
  pending: number;
  reviewed: number;
  human_demos: number;
  simulated_demos: number;
}

export interface QueueFilters {
  status?: ReviewStatus | "";
  domain?: string;
}
