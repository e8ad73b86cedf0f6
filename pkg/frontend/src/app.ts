/**
 * The console controller: one session, one event subscription, one state.
 *
 * Views subscribe to state changes; everything they show is folded from
 * service responses and events, never computed locally.
 */

import { ServiceClient, type EventSubscription } from "./api.js";
import {
  applyServerEvent,
  homeFromSnapshot,
  initialState,
  withClarificationAnswered,
  withConnection,
  withHome,
  withUserMessage,
  type ConsoleState,
  type ServerEvent,
} from "./state.js";

export type StateListener = (state: ConsoleState) => void;

export class ConsoleApp {
  private state: ConsoleState = initialState();
  private listeners: StateListener[] = [];
  private subscription: EventSubscription | null = null;

  constructor(
    private readonly client: ServiceClient,
    readonly sessionId: string,
  ) {}

  getState(): ConsoleState {
    return this.state;
  }

  onChange(listener: StateListener): void {
    this.listeners.push(listener);
  }

  private setState(state: ConsoleState): void {
    this.state = state;
    for (const listener of this.listeners) {
      listener(state);
    }
  }

  /** Fetch the initial dashboard and start following events. */
  async connect(): Promise<void> {
    const snapshot = await this.client.sessionState(this.sessionId);
    this.setState(
      withHome(this.state, homeFromSnapshot(snapshot.structured), snapshot.version),
    );
    this.subscription = this.client.subscribeEvents(this.sessionId, {
      lastEventId: this.state.lastEventId,
      onEvent: (event: ServerEvent) => this.setState(applyServerEvent(this.state, event)),
      onStatus: (status) => this.setState(withConnection(this.state, status)),
    });
  }

  async sendInstruction(text: string): Promise<void> {
    this.setState(withUserMessage(this.state, text));
    await this.client.sendInstruction(this.sessionId, text);
  }

  async sendClarification(answer: string): Promise<void> {
    this.setState(withClarificationAnswered(this.state, answer));
    await this.client.sendClarification(this.sessionId, answer);
  }

  close(): void {
    this.subscription?.close();
    this.setState(withConnection(this.state, "closed"));
  }
}
