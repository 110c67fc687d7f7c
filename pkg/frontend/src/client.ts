/** HTTP + SSE client for the agent service.
 *
 * fetch-based throughout so the same code runs in the browser and under
 * node (the e2e test drives a real service through this module).
 */

import type { AuditEntryWire, SessionEvent, SessionWire, StateEnvelope } from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ServiceError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ServiceClient {
  constructor(public baseUrl: string) {}

  async createSession(
    instruction: string,
    options: { fixture?: string; maxIterations?: number } = {},
  ): Promise<string> {
    const body: Record<string, unknown> = { instruction };
    if (options.fixture !== undefined) body.fixture = options.fixture;
    if (options.maxIterations !== undefined) body.max_iterations = options.maxIterations;
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await expectJson<{ id: string }>(response);
    return payload.id;
  }

  async getSession(id: string): Promise<SessionWire> {
    return expectJson(await fetch(`${this.baseUrl}/sessions/${id}`));
  }

  async approve(id: string, grant: boolean): Promise<{ status: string }> {
    const response = await fetch(`${this.baseUrl}/sessions/${id}/approve`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ grant }),
    });
    return expectJson(response);
  }

  async sendFeedback(id: string, text: string, accomplished: boolean): Promise<{ status: string }> {
    const response = await fetch(`${this.baseUrl}/sessions/${id}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, accomplished }),
    });
    return expectJson(response);
  }

  async rollback(id: string, snapshotId?: number): Promise<{ snapshot_id: number; state_hash: string }> {
    const response = await fetch(`${this.baseUrl}/sessions/${id}/rollback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(snapshotId === undefined ? {} : { snapshot_id: snapshotId }),
    });
    return expectJson(response);
  }

  async getState(): Promise<StateEnvelope> {
    return expectJson(await fetch(`${this.baseUrl}/state`));
  }

  async getAudit(sessionId?: string): Promise<AuditEntryWire[]> {
    const query = sessionId ? `?session=${encodeURIComponent(sessionId)}` : "";
    const payload = await expectJson<{ entries: AuditEntryWire[] }>(
      await fetch(`${this.baseUrl}/audit${query}`),
    );
    return payload.entries;
  }

  /** Subscribe to a session's event stream; resolves when the stream closes. */
  async streamEvents(
    id: string,
    onEvent: (event: SessionEvent) => void,
    signal?: AbortSignal,
  ): Promise<void> {
    const response = await fetch(`${this.baseUrl}/sessions/${id}/events`, { signal });
    if (!response.ok || response.body === null) {
      throw new ServiceError(response.status, `cannot stream events for ${id}`);
    }
    for await (const event of parseSse(response.body)) {
      onEvent(event);
    }
  }
}

/** Parse an SSE byte stream into session events. */
export async function* parseSse(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<SessionEvent> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary !== -1) {
        const chunk = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const event = parseSseChunk(chunk);
        if (event !== null) yield event;
        boundary = buffer.indexOf("\n\n");
      }
    }
  } finally {
    reader.releaseLock();
  }
}

export function parseSseChunk(chunk: string): SessionEvent | null {
  const dataLines = chunk
    .split("\n")
    .filter((line) => line.startsWith("data: "))
    .map((line) => line.slice("data: ".length));
  if (dataLines.length === 0) return null;
  return JSON.parse(dataLines.join("\n")) as SessionEvent;
}
