/** Progress dashboard: per-class accepted/pending/rejected bars with
 * per-provider series, built as a render model first so it can be tested
 * without a DOM. */

import type { Stats } from "./types";

export interface BarSegment {
  status: "accepted" | "pending" | "rejected";
  count: number;
  fraction: number; // of the widest class bar, for proportional widths
}

export interface ClassGroup {
  classId: string;
  total: number;
  segments: BarSegment[];
  providerSeries: { provider: string; count: number }[];
}

export interface DashboardModel {
  empty: boolean;
  groups: ClassGroup[];
  providers: string[];
  curators: { id: string; decisions: number }[];
}

export function buildDashboardModel(stats: Stats): DashboardModel {
  const classIds = Object.keys(stats.classes).filter((classId) => {
    const counts = stats.classes[classId];
    return counts.pending + counts.accepted + counts.rejected > 0;
  });
  const providers = new Set<string>();
  for (const perProvider of Object.values(stats.by_class_provider)) {
    for (const provider of Object.keys(perProvider)) providers.add(provider);
  }
  const widest = Math.max(
    1,
    ...classIds.map((classId) => {
      const counts = stats.classes[classId];
      return counts.pending + counts.accepted + counts.rejected;
    }),
  );
  const groups: ClassGroup[] = classIds
    .sort()
    .map((classId) => {
      const counts = stats.classes[classId];
      const total = counts.pending + counts.accepted + counts.rejected;
      const segments: BarSegment[] = (
        ["accepted", "pending", "rejected"] as const
      ).map((status) => ({
        status,
        count: counts[status],
        fraction: counts[status] / widest,
      }));
      const providerSeries = Object.entries(stats.by_class_provider[classId] ?? {})
        .map(([provider, count]) => ({ provider, count }))
        .sort((a, b) => a.provider.localeCompare(b.provider));
      return { classId, total, segments, providerSeries };
    });
  return {
    empty: groups.length === 0,
    groups,
    providers: [...providers].sort(),
    curators: Object.entries(stats.curators)
      .map(([id, decisions]) => ({ id, decisions }))
      .sort((a, b) => b.decisions - a.decisions),
  };
}

const STATUS_COLORS: Record<BarSegment["status"], string> = {
  accepted: "#2f9e44",
  pending: "#e8b339",
  rejected: "#c0392b",
};

export function renderDashboard(root: HTMLElement, model: DashboardModel): void {
  root.textContent = "";
  if (model.empty) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No records yet. Run a harvest, then come back.";
    root.appendChild(empty);
    return;
  }
  for (const group of model.groups) {
    const row = document.createElement("div");
    row.className = "class-row";
    const name = document.createElement("span");
    name.className = "class-name";
    name.textContent = `${group.classId} (${group.total})`;
    row.appendChild(name);
    const bar = document.createElement("div");
    bar.className = "bar";
    for (const segment of group.segments) {
      if (segment.count === 0) continue;
      const span = document.createElement("span");
      span.className = `segment ${segment.status}`;
      span.style.background = STATUS_COLORS[segment.status];
      span.style.width = `${(segment.fraction * 100).toFixed(2)}%`;
      span.title = `${segment.status}: ${segment.count}`;
      bar.appendChild(span);
    }
    row.appendChild(bar);
    const series = document.createElement("span");
    series.className = "providers";
    series.textContent = group.providerSeries
      .map((s) => `${s.provider}: ${s.count}`)
      .join("  ");
    row.appendChild(series);
    root.appendChild(row);
  }
}
