/** Keyboard-driven review session.
 *
 * Digits 1-8 accept the current candidate as the corresponding incident
 * class, "n" accepts it as a negative, "r" opens the reject submenu (one
 * more key picks the reason), space skips. The queue buffer is refilled
 * before it runs dry (prefetch depth 5 by default) and a record is never
 * shown twice in one session unless its decision failed.
 */

import { ApiClient, ApiError } from "./api";
import { OfflineQueue } from "./offlineQueue";
import type { Decision, Label, QueueFilters, QueueItem, RejectionReason } from "./types";
import { INCIDENT_CLASSES } from "./types";

export const REJECT_KEYS: Record<string, RejectionReason> = {
  v: "bad_viewport",
  t: "rotated",
  m: "multi_incident",
  n: "not_incident",
  d: "duplicate",
  o: "other",
};

export interface SessionStats {
  accepted: number;
  rejected: number;
  skipped: number;
  failed: number;
}

export interface SessionOptions {
  curatorId: string;
  filters?: QueueFilters;
  prefetch?: number;
}

export type SessionEvent =
  | { kind: "decided"; decision: Decision; queued: boolean }
  | { kind: "skipped"; recordId: string }
  | { kind: "failed"; recordId: string; message: string };

export class ReviewSession {
  private buffer: QueueItem[] = [];
  private seen = new Set<string>();
  private rejectMode = false;
  private exhausted = false;
  readonly stats: SessionStats = { accepted: 0, rejected: 0, skipped: 0, failed: 0 };
  readonly events: SessionEvent[] = [];
  private prefetch: number;

  constructor(
    private api: ApiClient,
    private offline: OfflineQueue,
    private options: SessionOptions,
  ) {
    this.prefetch = options.prefetch ?? 5;
  }

  get backlogSize(): number {
    return this.offline.size;
  }

  get inRejectMode(): boolean {
    return this.rejectMode;
  }

  current(): QueueItem | null {
    return this.buffer[0] ?? null;
  }

  /** Top up the buffer so it never runs dry mid-review. */
  async fill(): Promise<void> {
    if (this.exhausted || this.buffer.length >= this.prefetch) return;
    try {
      const response = await this.api.getQueue(
        this.prefetch + this.seen.size,
        this.options.filters ?? {},
      );
      const fresh = response.items.filter((item) => !this.seen.has(item.record.id));
      for (const item of fresh) {
        this.seen.add(item.record.id);
        this.buffer.push(item);
        if (this.buffer.length >= this.prefetch) break;
      }
      if (response.items.length >= response.pending_total && fresh.length === 0) {
        this.exhausted = true;
      }
    } catch {
      // offline: keep reviewing what is buffered
    }
  }

  async start(): Promise<void> {
    await this.fill();
  }

  /** Handle one keystroke; resolves once the decision is acknowledged
   * (submitted, or queued offline with the backlog indicator updated). */
  async handleKey(key: string): Promise<void> {
    const item = this.current();
    if (!item) return;
    if (this.rejectMode) {
      this.rejectMode = false;
      if (key === "escape") return;
      const reason = REJECT_KEYS[key];
      if (!reason) return;
      await this.decide({
        record_id: item.record.id,
        verdict: "reject",
        reason,
        curator_id: this.options.curatorId,
      });
      return;
    }
    if (key === "r") {
      this.rejectMode = true;
      return;
    }
    if (key === " " || key === "space") {
      this.stats.skipped += 1;
      this.events.push({ kind: "skipped", recordId: item.record.id });
      await this.advance();
      return;
    }
    if (key === "n") {
      await this.decide({
        record_id: item.record.id,
        verdict: "accept",
        label: "negative",
        curator_id: this.options.curatorId,
      });
      return;
    }
    const digit = Number.parseInt(key, 10);
    if (digit >= 1 && digit <= INCIDENT_CLASSES.length) {
      await this.decide({
        record_id: item.record.id,
        verdict: "accept",
        label: INCIDENT_CLASSES[digit - 1] as Label,
        curator_id: this.options.curatorId,
      });
    }
  }

  private async decide(decision: Decision): Promise<void> {
    const item = this.current();
    if (!item || item.record.id !== decision.record_id) return;
    try {
      await this.api.postDecision(decision, item.version);
      this.tally(decision, false);
      await this.advance();
    } catch (error) {
      if (error instanceof ApiError) {
        // the service rejected it (bad label, version conflict): the record
        // stays current so the curator can retry
        this.stats.failed += 1;
        this.events.push({
          kind: "failed",
          recordId: decision.record_id,
          message: error.message,
        });
        return;
      }
      // network failure: queue locally, keep reviewing
      this.offline.enqueue(decision);
      this.tally(decision, true);
      await this.advance();
    }
  }

  private tally(decision: Decision, queued: boolean): void {
    if (decision.verdict === "accept") this.stats.accepted += 1;
    else this.stats.rejected += 1;
    this.events.push({ kind: "decided", decision, queued });
  }

  private async advance(): Promise<void> {
    this.buffer.shift();
    await this.fill();
  }

  /** Drain the offline backlog (call on reconnect). Returns drained count. */
  async reconnect(): Promise<number> {
    return this.offline.flush((decision) => this.api.postDecision(decision));
  }
}
