import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  highlightJs,
  renderApprovalDialog,
  renderAuditTimeline,
  renderCard,
  renderHostView,
  renderTrace,
} from "../src/render.js";
import type { AuditEntryWire, HostStateWire } from "../src/types.js";
import { emptyView } from "../src/viewmodel.js";

describe("escapeHtml", () => {
  it("neutralizes markup in model output", () => {
    expect(escapeHtml('<script>alert("x")</script>')).not.toContain("<script>");
  });
});

describe("renderCard", () => {
  it("shows thinking, highlighted code, badges, and console", () => {
    const html = renderCard({
      index: 2,
      thinking: "bump the volume",
      actionTag: "js",
      actionCode: "let v = app.player.volume;",
      verdict: { decision: "Allow", reasons: [] },
      resultStatus: "ok",
      console: ["Volume increased to 0.6"],
    });
    expect(html).toContain("Round 2");
    expect(html).toContain("bump the volume");
    expect(html).toContain('<span class="kw">let</span>');
    expect(html).toContain("Volume increased to 0.6");
    expect(html).toContain("badge-ok");
  });

  it("renders deny verdicts with reasons and no result section", () => {
    const html = renderCard({
      index: 1,
      actionTag: "js",
      actionCode: "fetch('x')",
      verdict: { decision: "Deny", reasons: [{ reason: "network access is not permitted", at: "1:1" }] },
      console: [],
    });
    expect(html).toContain("Deny");
    expect(html).toContain("network access is not permitted");
    expect(html).not.toContain("console");
  });

  it("renders error rounds with kind and message", () => {
    const html = renderCard({
      index: 1,
      actionTag: "js",
      actionCode: "app.mixer.volume = 1",
      resultStatus: "runtime_error",
      errorKind: "TypeError-like",
      errorMessage: "Cannot read property 'volume' of undefined",
      console: [],
    });
    expect(html).toContain("TypeError-like");
    expect(html).toContain("Cannot read property &#39;volume&#39; of undefined");
  });
});

describe("renderTrace", () => {
  it("shows a spinner for fresh running sessions with zero cards", () => {
    const html = renderTrace(emptyView("s1", "Play the next song"));
    expect(html).toContain("spinner");
    expect(html).not.toContain("<article");
  });
});

describe("renderApprovalDialog", () => {
  it("is empty without a pending approval", () => {
    expect(renderApprovalDialog(null)).toBe("");
  });

  it("shows code, reasons, and both buttons", () => {
    const html = renderApprovalDialog({
      code: "app.editor.closeOtherTabs()",
      reasons: ["closing tabs is destructive"],
    });
    expect(html).toContain("closeOtherTabs");
    expect(html).toContain("destructive");
    expect(html).toContain("approve-grant");
    expect(html).toContain("approve-deny");
  });
});

const HOST: HostStateWire = {
  player: {
    volume: 0.5,
    queue: ["t1", "t2"],
    current_index: 0,
    favorites: ["t2"],
    history: [["t1", 1]],
  },
  library: {
    t1: { id: "t1", title: "Song One", artist: "Artist A", duration: 100 },
    t2: { id: "t2", title: "Song Two", artist: "Artist B", duration: 120 },
  },
  editor: { tabs: [["tab-1", "doc-1"], ["tab-2", "doc-2"]], active_tab: "tab-2" },
  documents: {
    "doc-1": { id: "doc-1", title: "Plan", paragraphs: ["alpha"], font_size: 14 },
    "doc-2": { id: "doc-2", title: "Notes", paragraphs: ["beta", "gamma"], font_size: 16 },
  },
  current_route: "editor",
  logical_clock: 9,
};

describe("renderHostView", () => {
  it("projects player and editor state", () => {
    const html = renderHostView(HOST);
    expect(html).toContain("Song One");
    expect(html).toContain("50%");
    expect(html).toContain("route: editor");
    expect(html).toContain("Notes");
    expect(html).toContain("font-size:16px");
    expect(html).toContain("beta");
    // the active tab is marked
    expect(html).toMatch(/tab active[^>]*data-tab="tab-2"/);
  });
});

describe("renderAuditTimeline", () => {
  it("renders one row per entry with a rollback control", () => {
    const entries: AuditEntryWire[] = [
      {
        seq: 1,
        timestamp: 0,
        session_id: "s1",
        iteration_index: 1,
        code_hash: "h",
        verdict_decision: "Allow",
        result_status: "ok",
        snapshot_id: 3,
        state_diff: [{ path: "player/volume", before: 0.5, after: 0.6 }],
      },
    ];
    const html = renderAuditTimeline(entries);
    expect(html).toContain("<td>1</td>");
    expect(html).toContain("1 change(s)");
    expect(html).toContain('data-snapshot="3"');
    expect(html).toContain("rollback-btn");
  });
});

describe("highlightJs", () => {
  it("escapes before highlighting", () => {
    const html = highlightJs("if (a < b) { return '<x>'; }");
    expect(html).not.toContain("<x>");
    expect(html).toContain('<span class="kw">if</span>');
  });
});
