/** Browser entry point: wires the chat panel, live trace, approval dialog,
 * host view, and audit drawer to the service API. Served at /ui by the
 * agent service itself, so the API base is the page origin.
 */

import { ServiceClient } from "./client.js";
import {
  emptyView,
  isTerminal,
  pendingApproval,
  reduce,
  viewFromSession,
  type SessionView,
} from "./viewmodel.js";
import {
  renderApprovalDialog,
  renderAuditTimeline,
  renderHostView,
  renderTrace,
} from "./render.js";

const client = new ServiceClient(window.location.origin);

let view: SessionView | null = null;
let streamAbort: AbortController | null = null;

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found;
}

function paint(): void {
  if (view !== null) {
    el("trace").innerHTML = renderTrace(view);
    el("approval").innerHTML = renderApprovalDialog(pendingApproval(view));
    const grant = document.getElementById("approve-grant");
    const deny = document.getElementById("approve-deny");
    grant?.addEventListener("click", () => decide(true));
    deny?.addEventListener("click", () => decide(false));
  }
  void refreshHost();
  void refreshAudit();
}

async function refreshHost(): Promise<void> {
  const envelope = await client.getState();
  el("host").innerHTML = renderHostView(envelope.state);
}

async function refreshAudit(): Promise<void> {
  const entries = await client.getAudit();
  el("audit").innerHTML = renderAuditTimeline(entries.slice(-40));
  for (const button of document.querySelectorAll<HTMLButtonElement>(".rollback-btn")) {
    button.addEventListener("click", () => {
      void rollbackTo(Number(button.dataset.snapshot));
    });
  }
}

async function rollbackTo(snapshotId: number): Promise<void> {
  if (view === null) return;
  try {
    await client.rollback(view.id, snapshotId);
  } catch (error) {
    el("notice").textContent = `rollback failed: ${String(error)}`;
    return;
  }
  paint();
}

async function decide(grant: boolean): Promise<void> {
  if (view === null) return;
  try {
    await client.approve(view.id, grant);
  } catch (error) {
    // the session may have moved on; refresh instead of blocking
    el("notice").textContent = `stale decision: ${String(error)}`;
  }
  await resubscribe();
}

async function resubscribe(): Promise<void> {
  if (view === null) return;
  const session = await client.getSession(view.id);
  view = viewFromSession(session, view.lastSeq);
  paint();
  if (!isTerminal(view.status)) {
    void subscribe(view.id);
  }
}

async function subscribe(sessionId: string): Promise<void> {
  streamAbort?.abort();
  streamAbort = new AbortController();
  el("notice").textContent = "";
  try {
    await client.streamEvents(
      sessionId,
      (event) => {
        if (view === null || view.id !== sessionId) return;
        reduce(view, event);
        if (view.needsResync) {
          // gap detected: drop the stream and rebuild from the projection
          streamAbort?.abort();
          void resubscribe();
          return;
        }
        paint();
      },
      streamAbort.signal,
    );
  } catch {
    el("notice").textContent = "stream lost; resubscribing";
    await resubscribe();
  }
  paint();
}

async function submit(): Promise<void> {
  const input = el("instruction") as HTMLInputElement;
  const instruction = input.value.trim();
  if (!instruction) return;
  input.value = "";
  const id = await client.createSession(instruction);
  view = emptyView(id, instruction);
  paint();
  void subscribe(id);
}

export function start(): void {
  el("send").addEventListener("click", () => void submit());
  (el("instruction") as HTMLInputElement).addEventListener("keydown", (event) => {
    if (event.key === "Enter") void submit();
  });
  paint();
  window.setInterval(() => {
    if (view === null || isTerminal(view.status)) void refreshHost();
  }, 3000);
}

start();
