/**
 * Thin client for the homegate service, including a fetch-based
 * server-sent-events subscriber that resumes from the last seen id.
 */

import type { ServerEvent } from "./state.js";

export interface InstructionResult {
  outcome: string;
  final: string;
  feedback: string;
  question: string | null;
  options: string[];
  usage: Record<string, number>;
  state_version: number;
}

export interface SessionStatePayload {
  session_id: string;
  version: number;
  rendered: string;
  structured: Record<string, unknown>;
}

export interface EventSubscription {
  close(): void;
}

export interface SubscribeOptions {
  lastEventId?: number;
  onEvent: (event: ServerEvent) => void;
  onStatus?: (status: "open" | "reconnecting" | "closed") => void;
  /** Delay before reconnect attempts, in milliseconds. */
  retryDelayMs?: number;
}

export class ServiceClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      const body = await response.text();
      throw new ServiceError(response.status, body);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createHome(document: Record<string, unknown>): Promise<{ home_id: string }> {
    return this.post("/homes", document);
  }

  createSession(homeId: string): Promise<{ session_id: string }> {
    return this.post("/sessions", { home_id: homeId });
  }

  sessionState(sessionId: string): Promise<SessionStatePayload> {
    return this.request(`/sessions/${sessionId}/state`);
  }

  sendInstruction(sessionId: string, text: string): Promise<InstructionResult> {
    return this.post(`/sessions/${sessionId}/instruction`, { text });
  }

  sendClarification(sessionId: string, answer: string): Promise<InstructionResult> {
    return this.post(`/sessions/${sessionId}/clarify`, { answer });
  }

  usage(): Promise<Record<string, number>> {
    return this.request("/usage");
  }

  /**
   * Subscribe to the session event stream.  On any interruption the
   * subscription reconnects with `Last-Event-ID`, so no event is ever
   * missed or delivered twice.
   */
  subscribeEvents(sessionId: string, options: SubscribeOptions): EventSubscription {
    const controller = { closed: false, abort: new AbortController() };
    let lastEventId = options.lastEventId ?? 0;
    const retryDelay = options.retryDelayMs ?? 500;

    const connect = async (): Promise<void> => {
      while (!controller.closed) {
        try {
          const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/events`, {
            headers: lastEventId > 0 ? { "Last-Event-ID": String(lastEventId) } : {},
            signal: controller.abort.signal,
          });
          if (!response.ok || response.body === null) {
            throw new ServiceError(response.status, "event stream unavailable");
          }
          options.onStatus?.("open");
          for await (const event of parseSseStream(response.body)) {
            if (controller.closed) {
              return;
            }
            if (event.id > lastEventId) {
              lastEventId = event.id;
              options.onEvent(event);
            }
          }
        } catch (error) {
          if (controller.closed) {
            return;
          }
        }
        if (controller.closed) {
          return;
        }
        options.onStatus?.("reconnecting");
        await sleep(retryDelay);
      }
    };

    void connect();
    return {
      close() {
        controller.closed = true;
        controller.abort.abort();
      },
    };
  }
}

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    body: string,
  ) {
    super(`service error ${status}: ${body}`);
  }
}

/** Incremental SSE parser over a byte stream (id/event/data fields). */
export async function* parseSseStream(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<ServerEvent> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    while (true) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary !== -1) {
        const block = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const event = parseSseBlock(block);
        if (event !== null) {
          yield event;
        }
        boundary = buffer.indexOf("\n\n");
      }
    }
  } finally {
    reader.releaseLock();
  }
}

function parseSseBlock(block: string): ServerEvent | null {
  let id = 0;
  let kind = "";
  let data = "";
  for (const line of block.split("\n")) {
    if (line.startsWith("id: ")) {
      id = Number(line.slice(4));
    } else if (line.startsWith("event: ")) {
      kind = line.slice(7);
    } else if (line.startsWith("data: ")) {
      data += line.slice(6);
    }
    // comment lines (": keepalive") fall through on purpose
  }
  if (!kind || !id) {
    return null;
  }
  return { id, kind, payload: data ? JSON.parse(data) : {} };
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
