/** Wire types mirrored from the agent service API. */

export type SessionStatus =
  | "running"
  | "awaiting_approval"
  | "awaiting_user"
  | "succeeded"
  | "failed"
  | "rolled_back";

export type ResultStatus =
  | "ok"
  | "runtime_error"
  | "denied"
  | "timeout"
  | "resource_exhausted";

export interface AgentResponseWire {
  thinking: string;
  action_code: string; // "js:<code>" or "N/A:<reasons>"
  final_step: boolean;
}

export interface VerdictWire {
  decision: "Allow" | "Deny" | "NeedsApproval";
  reasons: { reason: string; at: string }[];
}

export interface ErrorWire {
  kind: string;
  message: string;
}

export interface ExecutionResultWire {
  status: ResultStatus;
  console: string[];
  state_diff: { path: string; before?: unknown; after?: unknown }[];
  duration_ms: number;
  return_value?: unknown;
  error?: ErrorWire;
}

export interface IterationWire {
  index: number;
  prompt_digest: string;
  response: AgentResponseWire | null;
  parse_error: string | null;
  verdict: VerdictWire | null;
  result: ExecutionResultWire | null;
  verification: [string, boolean] | null;
  snapshot_id: number | null;
  approval: boolean | null;
  notes: string[];
}

export interface SessionWire {
  id: string;
  instruction: string;
  fixture: string;
  status: SessionStatus;
  iterations: IterationWire[];
  pre_session_snapshot: number;
  failure_reason: string | null;
  salient: boolean;
  state_hash: string;
}

export interface SessionEvent {
  session_id: string;
  kind:
    | "iteration_started"
    | "response_parsed"
    | "verdict"
    | "execution_result"
    | "status_changed";
  payload: Record<string, unknown>;
  seq: number;
}

export interface TrackWire {
  id: string;
  title: string;
  artist: string;
  duration: number;
}

export interface HostStateWire {
  player: {
    volume: number;
    queue: string[];
    current_index: number | null;
    favorites: string[];
    history: [string, number][];
  };
  library: Record<string, TrackWire>;
  editor: { tabs: [string, string][]; active_tab: string };
  documents: Record<string, { id: string; title: string; paragraphs: string[]; font_size: number }>;
  current_route: string;
  logical_clock: number;
}

export interface StateEnvelope {
  state: HostStateWire;
  hash: string;
  route: string;
}

export interface AuditEntryWire {
  seq: number;
  timestamp: number;
  session_id: string;
  iteration_index: number;
  code_hash: string;
  verdict_decision: string;
  result_status: string;
  snapshot_id: number;
  state_diff: { path: string; before?: unknown; after?: unknown }[];
}
