// Reconnecting WebSocket with exponential backoff. The constructor takes
// a socket factory and timer hooks so tests can drive it with fakes.

export interface WebSocketLike {
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => WebSocketLike;

export interface SocketHandlers {
  onOpen: () => void;
  onClose: () => void;
  onMessage: (raw: string) => void;
}

const BACKOFF_BASE_MS = 500;
const BACKOFF_CAP_MS = 8000;

export class ReconnectingSocket {
  private ws: WebSocketLike | null = null;
  private attempts = 0;
  private stopped = false;

  constructor(
    private url: string,
    private handlers: SocketHandlers,
    private factory: SocketFactory = (url) => new WebSocket(url) as unknown as WebSocketLike,
    private schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  connect(): void {
    if (this.stopped) return;
    const ws = this.factory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempts = 0;
      this.handlers.onOpen();
    };
    ws.onmessage = (ev) => this.handlers.onMessage(ev.data);
    ws.onerror = () => {
      /* close follows; backoff handled there */
    };
    ws.onclose = () => {
      this.ws = null;
      this.handlers.onClose();
      if (!this.stopped) {
        this.schedule(() => this.connect(), this.nextDelay());
      }
    };
  }

  nextDelay(): number {
    const delay = Math.min(BACKOFF_BASE_MS * 2 ** this.attempts, BACKOFF_CAP_MS);
    this.attempts += 1;
    return delay;
  }

  send(payload: string): boolean {
    if (this.ws === null) return false;
    this.ws.send(payload);
    return true;
  }

  stop(): void {
    this.stopped = true;
    this.ws?.close();
  }
}
