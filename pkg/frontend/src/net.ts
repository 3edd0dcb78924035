import type { ErrorMessage, HelloMessage, StateMessage } from "./protocol";
import { parseServerMessage, steerMessage } from "./protocol";

// Narrow socket surface shared by the browser WebSocket and the ws
// package, so tests can inject either.
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionHandlers {
  onHello?: (msg: HelloMessage) => void;
  onState?: (msg: StateMessage) => void;
  onError?: (msg: ErrorMessage) => void;
  onOpen?: () => void;
  onClose?: () => void;
}

export class SessionSocket {
  constructor(private readonly socket: SocketLike, handlers: SessionHandlers) {
    socket.onopen = () => handlers.onOpen?.();
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      if (msg === null) return; // not ours; ignore
      if (msg.type === "hello") handlers.onHello?.(msg);
      else if (msg.type === "state") handlers.onState?.(msg);
      else handlers.onError?.(msg);
    };
    socket.onclose = () => handlers.onClose?.();
    socket.onerror = () => {
      // onclose carries the user-visible transition
    };
  }

  private sendJson(obj: object): void {
    this.socket.send(JSON.stringify(obj));
  }

  steer(normalized: number, clientTs?: number): void {
    this.sendJson(steerMessage(normalized, clientTs));
  }

  setSpeed(v: number): void {
    this.sendJson({ type: "set_speed", v });
  }

  start(): void {
    this.sendJson({ type: "start" });
  }

  stop(): void {
    this.sendJson({ type: "stop" });
  }

  reset(): void {
    this.sendJson({ type: "reset" });
  }

  step(n = 1): void {
    this.sendJson({ type: "step", n });
  }

  close(): void {
    this.socket.close();
  }
}

export interface SessionOptions {
  scenario?: string | object;
  mode?: "live" | "sim";
  assisted?: boolean;
}

export class BridgeClient {
  constructor(
    private readonly baseUrl: string,
    private readonly factory: SocketFactory = (url) =>
      new WebSocket(url) as unknown as SocketLike,
  ) {}

  private async getJson(path: string): Promise<any> {
    const res = await fetch(this.baseUrl + path);
    if (!res.ok) throw new Error(`${path} failed: ${res.status}`);
    return res.json();
  }

  async health(): Promise<{ status: string; version: number; sessions: number }> {
    return this.getJson("/health");
  }

  async scenarios(): Promise<string[]> {
    const body = await this.getJson("/scenarios");
    return body.builtin ?? [];
  }

  async openSession(opts: SessionOptions = {}): Promise<string> {
    const res = await fetch(this.baseUrl + "/session", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(opts),
    });
    const body = await res.json();
    if (!res.ok) throw new Error(body.detail ?? `session open failed: ${res.status}`);
    return body.session;
  }

  async closeSession(id: string): Promise<void> {
    await fetch(`${this.baseUrl}/session/${id}`, { method: "DELETE" });
  }

  connect(sessionId: string, handlers: SessionHandlers): SessionSocket {
    const wsUrl = this.baseUrl.replace(/^http/, "ws") + `/ws/${sessionId}`;
    return new SessionSocket(this.factory(wsUrl), handlers);
  }
}
