/** HTML-string renderers for the trace panel, host view, and audit drawer.
 *
 * Pure string builders so they are testable without a DOM; app.ts assigns
 * the output to innerHTML and wires event handlers by element id.
 */

import type { AuditEntryWire, HostStateWire } from "./types.js";
import type { PendingApproval, SessionView, TraceCard } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const KEYWORDS =
  /\b(const|let|var|function|return|if|else|while|for|of|new|try|catch|finally|throw|true|false|null|undefined|typeof)\b/g;

/** Minimal keyword/string/comment highlighter for action code. */
export function highlightJs(source: string): string {
  const escaped = escapeHtml(source);
  return escaped
    .replace(/(&#39;(?:[^&]|&(?!#39;))*?&#39;)/g, '<span class="str">$1</span>')
    .replace(/(\/\/[^\n]*)/g, '<span class="cmt">$1</span>')
    .replace(KEYWORDS, '<span class="kw">$1</span>');
}

function badge(text: string, flavor: string): string {
  return `<span class="badge badge-${flavor}">${escapeHtml(text)}</span>`;
}

function verdictBadge(card: TraceCard): string {
  if (card.verdict === undefined) return "";
  const flavor = { Allow: "ok", Deny: "deny", NeedsApproval: "warn" }[card.verdict.decision];
  return badge(card.verdict.decision, flavor ?? "warn");
}

function statusBadge(status: string | undefined): string {
  if (!status) return "";
  const flavor = status === "ok" ? "ok" : status === "denied" ? "deny" : "err";
  return badge(status, flavor);
}

export function renderCard(card: TraceCard): string {
  const parts: string[] = [`<article class="card" data-index="${card.index}">`];
  parts.push(`<header>Round ${card.index} ${verdictBadge(card)} ${statusBadge(card.resultStatus)}</header>`);
  if (card.thinking) {
    parts.push(`<p class="thinking">${escapeHtml(card.thinking)}</p>`);
  }
  if (card.parseError) {
    parts.push(`<p class="error">Unparseable response: ${escapeHtml(card.parseError)}</p>`);
  }
  if (card.actionTag === "N/A") {
    parts.push(`<p class="error">Not possible: ${escapeHtml(card.actionCode ?? "")}</p>`);
  } else if (card.actionCode !== undefined) {
    parts.push(`<pre class="code">${highlightJs(card.actionCode)}</pre>`);
  }
  if (card.syntaxError) {
    parts.push(`<p class="error">SyntaxError: ${escapeHtml(card.syntaxError)}</p>`);
  }
  if (card.verdict && card.verdict.decision !== "Allow") {
    const reasons = card.verdict.reasons.map((r) => `${r.reason} (${r.at})`).join("; ");
    parts.push(`<p class="reasons">${escapeHtml(reasons)}</p>`);
  }
  if (card.errorMessage) {
    parts.push(`<p class="error">${escapeHtml(card.errorKind ?? "")}: ${escapeHtml(card.errorMessage)}</p>`);
  }
  if (card.console.length > 0) {
    parts.push(`<pre class="console">${escapeHtml(card.console.join("\n"))}</pre>`);
  }
  if (card.verification) {
    const outcome = card.verification.outcome ? "PASS" : "FAIL";
    parts.push(`<p class="verify verify-${outcome.toLowerCase()}">verification: ${outcome}</p>`);
  }
  parts.push("</article>");
  return parts.join("\n");
}

export function renderTrace(view: SessionView): string {
  const header =
    `<div class="trace-head"><strong>${escapeHtml(view.instruction)}</strong> ` +
    badge(view.status, isErrorStatus(view.status) ? "err" : view.status === "succeeded" ? "ok" : "warn") +
    "</div>";
  const cards = view.cards.map(renderCard).join("\n");
  const spinner = view.status === "running" ? '<div class="spinner">running...</div>' : "";
  const failure = view.failureReason
    ? `<p class="error">${escapeHtml(view.failureReason)}</p>`
    : "";
  return header + cards + spinner + failure;
}

function isErrorStatus(status: string): boolean {
  return status === "failed" || status === "rolled_back";
}

export function renderApprovalDialog(pending: PendingApproval | null): string {
  if (pending === null) return "";
  const reasons = pending.reasons.map((r) => `<li>${escapeHtml(r)}</li>`).join("");
  return (
    '<div class="approval" id="approval-dialog">' +
    "<h3>Approval required</h3>" +
    `<pre class="code">${highlightJs(pending.code)}</pre>` +
    `<ul>${reasons}</ul>` +
    '<button id="approve-grant">Approve</button>' +
    '<button id="approve-deny">Deny</button>' +
    "</div>"
  );
}

export function renderHostView(state: HostStateWire): string {
  const current =
    state.player.current_index !== null
      ? state.library[state.player.queue[state.player.current_index]]
      : null;
  const playing = current
    ? `${escapeHtml(current.title)} - ${escapeHtml(current.artist)}`
    : "(nothing playing)";
  const volumePct = Math.round(state.player.volume * 100);
  const tabs = state.editor.tabs
    .map(([tabId, docId]) => {
      const doc = state.documents[docId];
      const active = tabId === state.editor.active_tab ? " active" : "";
      return `<span class="tab${active}" data-tab="${escapeHtml(tabId)}">${escapeHtml(doc.title)}</span>`;
    })
    .join("");
  const activeDoc = state.documents[
    state.editor.tabs.find(([tabId]) => tabId === state.editor.active_tab)?.[1] ?? ""
  ];
  const paragraphs = (activeDoc?.paragraphs ?? [])
    .map((p) => `<p>${escapeHtml(p)}</p>`)
    .join("");
  return (
    `<div class="route">route: ${escapeHtml(state.current_route)}</div>` +
    '<section class="player">' +
    `<div>Now playing: ${playing}</div>` +
    `<div>Volume: <meter min="0" max="100" value="${volumePct}"></meter> ${volumePct}%</div>` +
    `<div>${state.player.queue.length} queued, ${state.player.favorites.length} favorites, ` +
    `${state.player.history.length} history entries</div>` +
    "</section>" +
    '<section class="editor">' +
    `<div class="tabs">${tabs}</div>` +
    `<div class="doc" style="font-size:${activeDoc?.font_size ?? 14}px">${paragraphs}</div>` +
    "</section>"
  );
}

export function renderAuditTimeline(entries: AuditEntryWire[]): string {
  const rows = entries
    .map(
      (e) =>
        `<tr data-snapshot="${e.snapshot_id}"><td>${e.seq}</td>` +
        `<td>${escapeHtml(e.session_id)}</td><td>${e.iteration_index}</td>` +
        `<td>${escapeHtml(e.verdict_decision)}</td><td>${escapeHtml(e.result_status)}</td>` +
        `<td>${e.state_diff.length} change(s)</td>` +
        `<td><button class="rollback-btn" data-snapshot="${e.snapshot_id}">rollback</button></td></tr>`,
    )
    .join("");
  return (
    "<table><thead><tr><th>seq</th><th>session</th><th>iter</th>" +
    "<th>verdict</th><th>result</th><th>diff</th><th></th></tr></thead>" +
    `<tbody>${rows}</tbody></table>`
  );
}
