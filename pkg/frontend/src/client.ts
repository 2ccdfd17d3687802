import type { Command, CommandResult, MapSnapshot, ServerEvent, ServerState } from './types.js';

type WebSocketLike = {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
};

export interface ClientOptions {
  baseUrl: string;
  fetchFn?: typeof fetch;
  webSocketCtor?: new (url: string) => WebSocketLike;
  reconnectDelayMs?: number;
}

export interface EventSocketHandlers {
  onEvent: (event: ServerEvent) => void;
  onOpen?: () => void;
  onDown?: () => void;
}

/** Typed client for the map service; also guards against double-sending the
 * same command while one is still in flight (one user gesture, one POST). */
export class MapApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;
  private readonly wsCtor: new (url: string) => WebSocketLike;
  private readonly reconnectDelayMs: number;
  private readonly inflight = new Map<string, Promise<CommandResult>>();
  private socket: WebSocketLike | null = null;
  private closed = false;

  constructor(options: ClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, '');
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
    this.wsCtor =
      options.webSocketCtor ??
      ((globalThis as { WebSocket?: new (url: string) => WebSocketLike }).WebSocket as new (
        url: string,
      ) => WebSocketLike);
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
  }

  async getMap(): Promise<MapSnapshot> {
    const res = await this.fetchFn(`${this.baseUrl}/map`);
    return (await res.json()) as MapSnapshot;
  }

  async getState(): Promise<ServerState> {
    const res = await this.fetchFn(`${this.baseUrl}/state`);
    return (await res.json()) as ServerState;
  }

  sendCommand(command: Command): Promise<CommandResult> {
    const key = JSON.stringify(command);
    const pending = this.inflight.get(key);
    if (pending) {
      return pending;
    }
    const request = this.fetchFn(`${this.baseUrl}/command`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: key,
    })
      .then(async (res) => (await res.json()) as CommandResult)
      .finally(() => this.inflight.delete(key));
    this.inflight.set(key, request);
    return request;
  }

  /** Connect to /events and keep reconnecting until closed. */
  openEvents(handlers: EventSocketHandlers): void {
    const wsUrl = this.baseUrl.replace(/^http/, 'ws') + '/events';
    const connect = () => {
      if (this.closed) {
        return;
      }
      const socket = new this.wsCtor(wsUrl);
      this.socket = socket;
      socket.onopen = () => handlers.onOpen?.();
      socket.onmessage = (message) => {
        try {
          handlers.onEvent(JSON.parse(String(message.data)) as ServerEvent);
        } catch {
          // Non-JSON frames are ignored.
        }
      };
      const down = () => {
        if (this.socket !== socket) {
          return;
        }
        this.socket = null;
        handlers.onDown?.();
        setTimeout(connect, this.reconnectDelayMs);
      };
      socket.onclose = down;
      socket.onerror = () => socket.close();
    };
    connect();
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }
}
