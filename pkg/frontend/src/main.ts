/** Browser bootstrap: wires the session, keyboard handling, checklist,
 * dashboard and backlog indicator to the page. */

import { ApiClient } from "./api";
import { buildDashboardModel, renderDashboard } from "./dashboard";
import { OfflineQueue } from "./offlineQueue";
import { REJECT_KEYS, ReviewSession } from "./session";
import { INCIDENT_CLASSES } from "./types";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function refreshDashboard(api: ApiClient): Promise<void> {
  const stats = await api.getStats();
  renderDashboard(el("dashboard"), buildDashboardModel(stats));
}

function renderCurrent(api: ApiClient, session: ReviewSession): void {
  const item = session.current();
  const image = el<HTMLImageElement>("candidate");
  const meta = el("meta");
  const checklist = el("checklist");
  if (!item) {
    image.removeAttribute("src");
    meta.textContent = "Queue empty — nothing left to review.";
    checklist.textContent = "";
    return;
  }
  image.src = api.imageUrl(item.image_url);
  const r = item.record;
  meta.textContent =
    `${r.id} · ${r.provider} · ${r.query_language ?? "-"} · ` +
    `query "${r.query_text ?? "-"}" · candidate label ${r.label}`;
  checklist.textContent = "";
  for (const entry of item.checklist) {
    const li = document.createElement("li");
    li.textContent = entry;
    checklist.appendChild(li);
  }
}

function renderStatus(session: ReviewSession): void {
  const s = session.stats;
  el("status").textContent =
    `accepted ${s.accepted} · rejected ${s.rejected} · skipped ${s.skipped}` +
    (session.inRejectMode
      ? " · REJECT: [v]iewport [t]ilted [m]ulti [n]ot-incident [d]uplicate [o]ther"
      : "");
  const backlog = el("backlog");
  backlog.textContent = session.backlogSize
    ? `offline backlog: ${session.backlogSize}`
    : "";
}

async function boot(): Promise<void> {
  const baseUrl = (window as { ROADWATCH_SERVICE_URL?: string }).ROADWATCH_SERVICE_URL ?? "";
  const api = new ApiClient(baseUrl);
  const session = new ReviewSession(api, new OfflineQueue(window.localStorage), {
    curatorId: new URLSearchParams(window.location.search).get("curator") ?? "anonymous",
  });

  el("hotkeys").textContent =
    INCIDENT_CLASSES.map((c, i) => `${i + 1}=${c}`).join("  ") +
    "  n=negative  r=reject…  space=skip" +
    "  (reject reasons: " +
    Object.entries(REJECT_KEYS).map(([k, v]) => `${k}=${v}`).join(" ") +
    ")";

  await session.start();
  renderCurrent(api, session);
  renderStatus(session);
  await refreshDashboard(api);

  window.addEventListener("keydown", (event) => {
    void session.handleKey(event.key === "Escape" ? "escape" : event.key).then(() => {
      renderCurrent(api, session);
      renderStatus(session);
      void refreshDashboard(api);
    });
  });

  window.addEventListener("online", () => {
    void session.reconnect().then((drained) => {
      if (drained > 0) void refreshDashboard(api);
      renderStatus(session);
    });
  });
}

void boot();
