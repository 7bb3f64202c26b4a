/** Wire types for the curation service JSON API. */

export const INCIDENT_CLASSES = [
  "animal_on_road",
  "collapse",
  "vehicle_crash",
  "fire",
  "flooding",
  "landslide",
  "treefall",
  "snow",
] as const;

export type IncidentClass = (typeof INCIDENT_CLASSES)[number];
export type Label = IncidentClass | "negative";

export const REJECTION_REASONS = [
  "bad_viewport",
  "rotated",
  "multi_incident",
  "not_incident",
  "duplicate",
  "other",
] as const;
export type RejectionReason = (typeof REJECTION_REASONS)[number];

export interface RecordDoc {
  id: string;
  blob_checksum: string;
  provider: string;
  label: string;
  query_text: string | null;
  query_language: string | null;
  rank: number | null;
  curation_status: "pending" | "accepted" | "rejected";
  rejection_reason: string | null;
  split: string | null;
  version: number;
}

export interface QueueItem {
  record: RecordDoc;
  image_url: string;
  checklist: string[];
  version: number;
}

export interface QueueResponse {
  items: QueueItem[];
  pending_total: number;
}

export interface Decision {
  record_id: string;
  verdict: "accept" | "reject";
  label?: Label;
  reason?: RejectionReason;
  curator_id: string;
}

export interface StatusCounts {
  pending: number;
  accepted: number;
  rejected: number;
}

export interface Stats {
  classes: Record<string, StatusCounts>;
  totals: StatusCounts;
  curators: Record<string, number>;
  by_class_provider: Record<string, Record<string, number>>;
}

export interface QueueFilters {
  class?: string;
  provider?: string;
  language?: string;
}
