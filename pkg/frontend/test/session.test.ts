import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { MemoryStorage, OfflineQueue } from "../src/offlineQueue";
import { ReviewSession } from "../src/session";
import { INCIDENT_CLASSES } from "../src/types";
import { FixtureService, makeRecord } from "./fixtureService";

function makeWorld(n = 30) {
  const service = new FixtureService(
    Array.from({ length: n }, (_, i) => makeRecord(`r${String(i).padStart(3, "0")}`, i + 1)),
  );
  const api = new ApiClient("", service.fetch);
  const session = new ReviewSession(api, new OfflineQueue(new MemoryStorage()), {
    curatorId: "tester",
  });
  return { service, api, session };
}

describe("review session round trip", () => {
  it("20 scripted decisions leave exactly 20 audit entries with correct labels", async () => {
    const { service, session } = makeWorld(30);
    await session.start();

    // accept 2 of each incident class via digits 1..8 (16 decisions),
    // reject 3 with distinct reasons, accept 1 negative = 20 decisions
    const script: string[] = [];
    for (let digit = 1; digit <= 8; digit++) script.push(String(digit), String(digit));
    script.push("r", "m", "r", "v", "r", "d", "n");

    const expected: { verdict: string; label: string | null; reason: string | null }[] = [];
    for (let i = 0; i < 16; i++) {
      expected.push({
        verdict: "accept",
        label: INCIDENT_CLASSES[Math.floor(i / 2)],
        reason: null,
      });
    }
    expected.push({ verdict: "reject", label: null, reason: "multi_incident" });
    expected.push({ verdict: "reject", label: null, reason: "bad_viewport" });
    expected.push({ verdict: "reject", label: null, reason: "duplicate" });
    expected.push({ verdict: "accept", label: "negative", reason: null });

    for (const key of script) {
      await session.handleKey(key);
    }

    expect(service.audit).toHaveLength(20);
    expect(session.stats.accepted).toBe(17);
    expect(session.stats.rejected).toBe(3);
    for (let i = 0; i < 20; i++) {
      expect(service.audit[i].verdict).toBe(expected[i].verdict);
      expect(service.audit[i].label).toBe(expected[i].label);
      expect(service.audit[i].reason).toBe(expected[i].reason);
      expect(service.audit[i].curator_id).toBe("tester");
    }
    // zero duplicates: every audited record id is distinct
    const ids = service.audit.map((e) => e.record_id);
    expect(new Set(ids).size).toBe(20);
    // queue order honored: first decisions hit the lowest ranks
    expect(ids.slice(0, 4)).toEqual(["r000", "r001", "r002", "r003"]);
  });

  it("never shows a record twice in one session", async () => {
    const { session } = makeWorld(12);
    await session.start();
    const shown: string[] = [];
    for (let i = 0; i < 12; i++) {
      const current = session.current();
      if (!current) break;
      shown.push(current.record.id);
      await session.handleKey(i % 2 === 0 ? "1" : " ");
    }
    expect(new Set(shown).size).toBe(shown.length);
  });

  it("skipped records get no audit entry", async () => {
    const { service, session } = makeWorld(5);
    await session.start();
    await session.handleKey(" ");
    await session.handleKey("3");
    expect(service.audit).toHaveLength(1);
    expect(session.stats.skipped).toBe(1);
    expect(service.audit[0].record_id).toBe("r001");
  });

  it("failed decision keeps the record current for retry", async () => {
    const { service, session } = makeWorld(3);
    await session.start();
    const firstId = session.current()!.record.id;
    // sabotage: decide the record out-of-band so the version moves on
    service.decideDirect(firstId);
    await session.handleKey("1");
    expect(session.stats.failed).toBe(1);
    expect(session.current()!.record.id).toBe(firstId); // still current
  });

  it("escape cancels the reject submenu", async () => {
    const { service, session } = makeWorld(3);
    await session.start();
    await session.handleKey("r");
    expect(session.inRejectMode).toBe(true);
    await session.handleKey("escape");
    expect(session.inRejectMode).toBe(false);
    expect(service.audit).toHaveLength(0);
  });

  it("exhausts the queue cleanly", async () => {
    const { session } = makeWorld(3);
    await session.start();
    for (let i = 0; i < 5; i++) await session.handleKey("2");
    expect(session.current()).toBeNull();
    await session.handleKey("2"); // no-op on empty queue
  });
});

describe("offline contract", () => {
  it("queues decisions while down, shows backlog, drains on reconnect", async () => {
    const { service, session } = makeWorld(10);
    await session.start();

    service.offline = true;
    await session.handleKey("1");
    await session.handleKey("2");
    await session.handleKey("r");
    await session.handleKey("t");
    expect(session.backlogSize).toBe(3);
    expect(service.audit).toHaveLength(0);

    service.offline = false;
    const drained = await session.reconnect();
    expect(drained).toBe(3);
    expect(session.backlogSize).toBe(0);
    expect(service.audit).toHaveLength(3);
    expect(service.audit.map((e) => e.verdict)).toEqual(["accept", "accept", "reject"]);
    expect(service.records.get("r000")!.curation_status).toBe("accepted");
    expect(service.records.get("r002")!.rejection_reason).toBe("rotated");
  });

  it("partial drain stops at the first failure and preserves order", async () => {
    const { service, session } = makeWorld(6);
    await session.start();
    service.offline = true;
    await session.handleKey("1");
    await session.handleKey("1");
    expect(session.backlogSize).toBe(2);

    // service comes back flaky: the second successful-side POST dies too
    // (offline attempts above threw before reaching the POST counter)
    service.offline = false;
    service.failPosts.add(2);
    const drained = await session.reconnect();
    expect(drained).toBe(1);
    expect(session.backlogSize).toBe(1);

    expect(await session.reconnect()).toBe(1);
    expect(session.backlogSize).toBe(0);
    expect(service.audit).toHaveLength(2);
  });
});
