/** Offline decision queue.
 *
 * When the service is unreachable, decisions are queued (persisted via an
 * injectable storage so a tab reload keeps them) and flushed in order once
 * the service answers again. The backlog size feeds the UI indicator.
 */

import type { Decision } from "./types";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORAGE_KEY = "roadwatch_decision_backlog_v1";

export class MemoryStorage implements StorageLike {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

export class OfflineQueue {
  private backlog: Decision[];

  constructor(private storage: StorageLike = new MemoryStorage()) {
    this.backlog = this.load();
  }

  private load(): Decision[] {
    try {
      return JSON.parse(this.storage.getItem(STORAGE_KEY) ?? "[]") as Decision[];
    } catch {
      return [];
    }
  }

  private save(): void {
    try {
      this.storage.setItem(STORAGE_KEY, JSON.stringify(this.backlog));
    } catch {
      /* storage full or unavailable; the in-memory backlog still works */
    }
  }

  get size(): number {
    return this.backlog.length;
  }

  enqueue(decision: Decision): void {
    this.backlog.push(decision);
    this.save();
  }

  /** Submit queued decisions in order; stops at the first failure so order
   * is preserved. Returns how many drained. */
  async flush(post: (decision: Decision) => Promise<unknown>): Promise<number> {
    let drained = 0;
    while (this.backlog.length > 0) {
      const next = this.backlog[0];
      try {
        await post(next);
      } catch {
        break;
      }
      this.backlog.shift();
      drained += 1;
      this.save();
    }
    return drained;
  }
}
