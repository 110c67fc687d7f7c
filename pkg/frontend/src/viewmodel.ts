/** Session view-model: a pure reducer over the service's event stream.
 *
 * The UI never mutates host state client-side; it folds events into this
 * projection and renders it. Seq gaplessness is asserted here: a gap flips
 * needsResync and the caller re-seeds the view from GET /sessions/{id}.
 */

import type {
  AgentResponseWire,
  ExecutionResultWire,
  SessionEvent,
  SessionStatus,
  SessionWire,
  VerdictWire,
} from "./types.js";

export interface TraceCard {
  index: number;
  thinking?: string;
  actionCode?: string; // raw "js:" / "N/A:" payload with the tag stripped
  actionTag?: "js" | "N/A";
  finalStep?: boolean;
  parseError?: string;
  verdict?: VerdictWire;
  syntaxError?: string;
  resultStatus?: string;
  errorKind?: string;
  errorMessage?: string;
  console: string[];
  verification?: { outcome: boolean; console: string[] };
}

export interface PendingApproval {
  code: string;
  reasons: string[];
}

export interface SessionView {
  id: string;
  instruction: string;
  status: SessionStatus;
  cards: TraceCard[];
  lastSeq: number;
  needsResync: boolean;
  failureReason?: string;
}

export function emptyView(id: string, instruction = ""): SessionView {
  return { id, instruction, status: "running", cards: [], lastSeq: 0, needsResync: false };
}

function splitActionCode(raw: string): { tag: "js" | "N/A"; body: string } | null {
  if (raw.startsWith("js:")) return { tag: "js", body: raw.slice(3) };
  if (raw.startsWith("N/A:")) return { tag: "N/A", body: raw.slice(4) };
  return null;
}

function card(view: SessionView, index: number): TraceCard {
  let found = view.cards.find((c) => c.index === index);
  if (!found) {
    found = { index, console: [] };
    view.cards.push(found);
    view.cards.sort((a, b) => a.index - b.index);
  }
  return found;
}

/** Fold one event into the view (returns the same object, mutated).
 *
 * Streams replay from seq 1 on every subscription, so events at or below
 * lastSeq are skipped idempotently; only a forward jump is a gap.
 */
export function reduce(view: SessionView, event: SessionEvent): SessionView {
  if (event.seq <= view.lastSeq) {
    return view;
  }
  if (event.seq !== view.lastSeq + 1) {
    view.needsResync = true;
    return view;
  }
  view.lastSeq = event.seq;
  const payload = event.payload;
  switch (event.kind) {
    case "iteration_started": {
      card(view, payload.index as number);
      break;
    }
    case "response_parsed": {
      const target = card(view, payload.index as number);
      if (typeof payload.parse_error === "string") {
        target.parseError = payload.parse_error;
        break;
      }
      const response = payload.response as AgentResponseWire | undefined;
      if (response) {
        target.thinking = response.thinking;
        target.finalStep = response.final_step;
        const split = splitActionCode(response.action_code);
        if (split) {
          target.actionTag = split.tag;
          target.actionCode = split.body;
        }
      }
      break;
    }
    case "verdict": {
      const target = card(view, payload.index as number);
      if (typeof payload.syntax_error === "string") {
        target.syntaxError = payload.syntax_error;
      } else if (payload.verdict) {
        target.verdict = payload.verdict as VerdictWire;
      }
      break;
    }
    case "execution_result": {
      const target = card(view, payload.index as number);
      if (payload.verification) {
        const verification = payload.verification as { outcome: boolean; console: string[] };
        target.verification = verification;
        break;
      }
      const result = payload.result as ExecutionResultWire | undefined;
      if (result) {
        target.resultStatus = result.status;
        target.console = result.console;
        if (result.error) {
          target.errorKind = result.error.kind;
          target.errorMessage = result.error.message;
        }
      }
      break;
    }
    case "status_changed": {
      view.status = payload.status as SessionStatus;
      break;
    }
  }
  return view;
}

/** Rebuild a view from a full session projection (resync path). */
export function viewFromSession(session: SessionWire, lastSeq = 0): SessionView {
  const view = emptyView(session.id, session.instruction);
  view.status = session.status;
  view.lastSeq = lastSeq;
  view.failureReason = session.failure_reason ?? undefined;
  for (const iteration of session.iterations) {
    const target = card(view, iteration.index);
    if (iteration.parse_error !== null) target.parseError = iteration.parse_error;
    if (iteration.response) {
      target.thinking = iteration.response.thinking;
      target.finalStep = iteration.response.final_step;
      const split = splitActionCode(iteration.response.action_code);
      if (split) {
        target.actionTag = split.tag;
        target.actionCode = split.body;
      }
    }
    if (iteration.verdict) target.verdict = iteration.verdict;
    if (iteration.result) {
      target.resultStatus = iteration.result.status;
      target.console = iteration.result.console;
      if (iteration.result.error) {
        target.errorKind = iteration.result.error.kind;
        target.errorMessage = iteration.result.error.message;
      }
    }
    if (iteration.verification) {
      target.verification = { outcome: iteration.verification[1], console: [] };
    }
  }
  return view;
}

/** The approval dialog is visible exactly when the session awaits approval. */
export function pendingApproval(view: SessionView): PendingApproval | null {
  if (view.status !== "awaiting_approval") return null;
  const last = view.cards[view.cards.length - 1];
  if (!last) return null;
  return {
    code: last.actionCode ?? "",
    reasons: (last.verdict?.reasons ?? []).map((r) => r.reason),
  };
}

export function isTerminal(status: SessionStatus): boolean {
  return status === "succeeded" || status === "failed" || status === "rolled_back";
}
