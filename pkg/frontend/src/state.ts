/**
 * Console state and the pure event fold.
 *
 * The console never simulates anything: every device value on screen comes
 * from the service (the initial snapshot fetch, then `executed` events),
 * and events apply strictly in sequence-number order, at most once.
 */

export type AttributeValue = string | number | boolean;

export interface DeviceView {
  type: string;
  attributes: Record<string, AttributeValue>;
}

export type HomeView = Record<string, Record<string, DeviceView>>;

export interface VerificationBadge {
  action: string;
  passed: boolean;
  failureReason: string | null;
}

export type ChatEntry =
  | { kind: "user"; text: string }
  | { kind: "agent"; tone: "success" | "info" | "rejected" | "error"; text: string }
  | { kind: "actions"; badges: VerificationBadge[] }
  | { kind: "clarification"; question: string; options: string[]; answered: boolean };

export type ConnectionStatus = "connecting" | "open" | "reconnecting" | "closed";

export interface ConsoleState {
  connection: ConnectionStatus;
  home: HomeView;
  transcript: ChatEntry[];
  pendingClarification: { question: string; options: string[] } | null;
  lastEventId: number;
  stateVersion: number;
}

export interface ServerEvent {
  id: number;
  kind: string;
  payload: Record<string, unknown>;
}

export function initialState(): ConsoleState {
  return {
    connection: "connecting",
    home: {},
    transcript: [],
    pendingClarification: null,
    lastEventId: 0,
    stateVersion: 0,
  };
}

/** Snapshot document (service "structured" field) -> dashboard view. */
export function homeFromSnapshot(structured: Record<string, unknown>): HomeView {
  const home: HomeView = {};
  const rooms = (structured["rooms"] ?? {}) as Record<string, Record<string, unknown>>;
  for (const [room, devices] of Object.entries(rooms)) {
    home[room] = {};
    for (const [deviceId, raw] of Object.entries(devices)) {
      const device = raw as { type?: string; attributes?: Record<string, AttributeValue> };
      home[room][deviceId] = {
        type: device.type ?? "",
        attributes: { ...(device.attributes ?? {}) },
      };
    }
  }
  return home;
}

export function withHome(state: ConsoleState, home: HomeView, version: number): ConsoleState {
  return { ...state, home, stateVersion: version };
}

export function withConnection(state: ConsoleState, connection: ConnectionStatus): ConsoleState {
  return { ...state, connection };
}

export function withUserMessage(state: ConsoleState, text: string): ConsoleState {
  return { ...state, transcript: [...state.transcript, { kind: "user", text }] };
}

/** The user answered (or dismissed) the pending clarification. */
export function withClarificationAnswered(state: ConsoleState, answer: string): ConsoleState {
  const transcript = state.transcript.map((entry) =>
    entry.kind === "clarification" && !entry.answered ? { ...entry, answered: true } : entry,
  );
  if (answer) {
    transcript.push({ kind: "user", text: answer });
  }
  return { ...state, transcript, pendingClarification: null };
}

/** Fold one server event; stale or duplicate sequence numbers are no-ops. */
export function applyServerEvent(state: ConsoleState, event: ServerEvent): ConsoleState {
  if (event.id <= state.lastEventId) {
    return state;
  }
  const next: ConsoleState = { ...state, lastEventId: event.id };
  const payload = event.payload;
  switch (event.kind) {
    case "analysis":
      return next;
    case "verification": {
      const results = (payload["results"] ?? []) as Array<{
        action: string;
        passed: boolean;
        failure_reason: string | null;
      }>;
      const badges: VerificationBadge[] = results.map((r) => ({
        action: r.action,
        passed: r.passed,
        failureReason: r.failure_reason,
      }));
      next.transcript = [...state.transcript, { kind: "actions", badges }];
      return next;
    }
    case "executed": {
      const room = String(payload["room"]);
      const device = String(payload["device"]);
      const attributes = (payload["attributes"] ?? {}) as Record<string, AttributeValue>;
      const home: HomeView = { ...state.home };
      const devices = { ...(home[room] ?? {}) };
      const existing = devices[device] ?? { type: "", attributes: {} };
      devices[device] = { ...existing, attributes: { ...attributes } };
      home[room] = devices;
      next.home = home;
      next.stateVersion = Number(payload["state_version"] ?? state.stateVersion);
      return next;
    }
    case "rejected": {
      const text = `${payload["feedback"] ?? "Rejected."} ${payload["final"] ?? ""}`.trim();
      next.transcript = [...state.transcript, { kind: "agent", tone: "rejected", text }];
      return next;
    }
    case "clarification_request": {
      const question = String(payload["question"] ?? "Which device?");
      const options = ((payload["options"] ?? []) as unknown[]).map(String);
      next.transcript = [
        ...state.transcript,
        { kind: "clarification", question, options, answered: false },
      ];
      next.pendingClarification = { question, options };
      return next;
    }
    case "feedback": {
      const message = String(payload["message"] ?? "");
      const errors = (payload["error_set"] ?? []) as unknown[];
      const tone = errors.length === 0 ? "success" : "info";
      next.transcript = [...state.transcript, { kind: "agent", tone, text: message }];
      return next;
    }
    default:
      return next;
  }
}

/** The free-text box locks while a clarification is waiting for the user. */
export function inputDisabled(state: ConsoleState): boolean {
  return state.pendingClarification !== null;
}
