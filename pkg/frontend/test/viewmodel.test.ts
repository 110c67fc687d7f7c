import { describe, expect, it } from "vitest";

import { parseSseChunk } from "../src/client.js";
import type { SessionEvent, SessionWire } from "../src/types.js";
import {
  emptyView,
  isTerminal,
  pendingApproval,
  reduce,
  viewFromSession,
} from "../src/viewmodel.js";

function event(seq: number, kind: SessionEvent["kind"], payload: Record<string, unknown>): SessionEvent {
  return { session_id: "s1", kind, payload, seq };
}

function okRound(seq: number, index: number, code = "app.player.next()"): SessionEvent[] {
  return [
    event(seq, "iteration_started", { index }),
    event(seq + 1, "response_parsed", {
      index,
      response: { thinking: "advance", action_code: `js:${code}`, final_step: true },
    }),
    event(seq + 2, "verdict", { index, verdict: { decision: "Allow", reasons: [] } }),
    event(seq + 3, "execution_result", {
      index,
      result: { status: "ok", console: ["done"], state_diff: [], duration_ms: 1 },
    }),
  ];
}

describe("reduce", () => {
  it("builds one card per iteration", () => {
    const view = emptyView("s1", "Play the next song");
    for (const e of [...okRound(1, 1), event(5, "status_changed", { status: "succeeded" })]) {
      reduce(view, e);
    }
    expect(view.cards).toHaveLength(1);
    expect(view.cards[0].thinking).toBe("advance");
    expect(view.cards[0].actionTag).toBe("js");
    expect(view.cards[0].actionCode).toBe("app.player.next()");
    expect(view.cards[0].resultStatus).toBe("ok");
    expect(view.cards[0].console).toEqual(["done"]);
    expect(view.status).toBe("succeeded");
    expect(isTerminal(view.status)).toBe(true);
  });

  it("tracks errors per round for multi-round sessions", () => {
    const view = emptyView("s1", "increase the volume slightly");
    const events = [
      event(1, "iteration_started", { index: 1 }),
      event(2, "response_parsed", {
        index: 1,
        response: { thinking: "t", action_code: "js:app.mixer.volume = 1", final_step: true },
      }),
      event(3, "verdict", { index: 1, verdict: { decision: "Allow", reasons: [] } }),
      event(4, "execution_result", {
        index: 1,
        result: {
          status: "runtime_error",
          console: [],
          state_diff: [],
          duration_ms: 1,
          error: { kind: "TypeError-like", message: "Cannot read property 'volume' of undefined" },
        },
      }),
      ...okRound(5, 2),
      event(9, "status_changed", { status: "succeeded" }),
    ];
    for (const e of events) reduce(view, e);
    expect(view.cards).toHaveLength(2);
    expect(view.cards[0].errorKind).toBe("TypeError-like");
    expect(view.cards[1].resultStatus).toBe("ok");
  });

  it("flags a resync on any forward seq gap", () => {
    const view = emptyView("s1");
    reduce(view, event(1, "iteration_started", { index: 1 }));
    reduce(view, event(3, "status_changed", { status: "succeeded" }));
    expect(view.needsResync).toBe(true);
    // the gapped event was not applied
    expect(view.status).toBe("running");
  });

  it("skips replayed events idempotently", () => {
    const view = emptyView("s1");
    for (const e of okRound(1, 1)) reduce(view, e);
    const replayed = event(2, "response_parsed", {
      index: 1,
      response: { thinking: "tampered", action_code: "js:x", final_step: false },
    });
    reduce(view, replayed);
    expect(view.needsResync).toBe(false);
    expect(view.cards[0].thinking).toBe("advance"); // unchanged
    expect(view.lastSeq).toBe(4);
  });

  it("records protocol errors as cards", () => {
    const view = emptyView("s1");
    reduce(view, event(1, "iteration_started", { index: 1 }));
    reduce(view, event(2, "response_parsed", { index: 1, parse_error: "no JSON object" }));
    expect(view.cards[0].parseError).toContain("no JSON");
  });
});

describe("pendingApproval", () => {
  it("is visible exactly while awaiting approval", () => {
    const view = emptyView("s1", "Close all other tabs");
    const events = [
      event(1, "iteration_started", { index: 1 }),
      event(2, "response_parsed", {
        index: 1,
        response: { thinking: "t", action_code: "js:app.editor.closeOtherTabs()", final_step: true },
      }),
      event(3, "verdict", {
        index: 1,
        verdict: { decision: "NeedsApproval", reasons: [{ reason: "closing tabs is destructive", at: "1:1" }] },
      }),
      event(4, "status_changed", { status: "awaiting_approval" }),
    ];
    for (const e of events) reduce(view, e);
    const pending = pendingApproval(view);
    expect(pending).not.toBeNull();
    expect(pending!.code).toContain("closeOtherTabs");
    expect(pending!.reasons[0]).toContain("destructive");

    reduce(view, event(5, "status_changed", { status: "running" }));
    expect(pendingApproval(view)).toBeNull();
  });
});

describe("viewFromSession", () => {
  it("rebuilds cards from a full projection (resync path)", () => {
    const session: SessionWire = {
      id: "s1",
      instruction: "task",
      fixture: "default",
      status: "succeeded",
      pre_session_snapshot: 1,
      failure_reason: null,
      salient: false,
      state_hash: "h",
      iterations: [
        {
          index: 1,
          prompt_digest: "d",
          response: { thinking: "t", action_code: "js:1+1", final_step: true },
          parse_error: null,
          verdict: { decision: "Allow", reasons: [] },
          result: { status: "ok", console: ["2"], state_diff: [], duration_ms: 1 },
          verification: null,
          snapshot_id: 2,
          approval: null,
          notes: [],
        },
      ],
    };
    const view = viewFromSession(session, 7);
    expect(view.cards).toHaveLength(session.iterations.length);
    expect(view.lastSeq).toBe(7);
    expect(view.status).toBe("succeeded");
    expect(view.cards[0].console).toEqual(["2"]);
  });
});

describe("parseSseChunk", () => {
  it("decodes id+data chunks", () => {
    const parsed = parseSseChunk('id: 4\ndata: {"session_id":"s","kind":"status_changed","payload":{"status":"failed"},"seq":4}');
    expect(parsed).not.toBeNull();
    expect(parsed!.seq).toBe(4);
    expect(parsed!.kind).toBe("status_changed");
  });

  it("ignores chunks without data lines", () => {
    expect(parseSseChunk(": keepalive")).toBeNull();
  });
});
