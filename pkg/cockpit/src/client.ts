// WebSocket client for a single backend session. The WebSocket constructor is
// injected so the same class runs in the browser (native) and under vitest
// (the ws package).

import { FrameBuilder } from "./controls.js";
import {
  decodeEnvelope,
  encodeEnvelope,
  ProtocolError,
  type Envelope,
  type Validator,
} from "./protocol.js";
import { CockpitState } from "./state.js";

interface WebSocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(event: string, handler: (ev: any) => void): void;
}

type WebSocketCtor = new (url: string) => WebSocketLike;

export interface ClientOptions {
  webSocket?: WebSocketCtor;
  onUpdate?: (state: CockpitState) => void;
}

export class CockpitClient {
  readonly state = new CockpitState();
  readonly frames: FrameBuilder;
  invalidInbound = 0;
  received: Envelope[] = [];

  private ws: WebSocketLike | null = null;
  private readonly ctor: WebSocketCtor;
  private readonly onUpdate?: (state: CockpitState) => void;

  constructor(
    private readonly url: string,
    public readonly session: string,
    private readonly validator: Validator,
    options: ClientOptions = {},
  ) {
    this.frames = new FrameBuilder(session);
    this.ctor = options.webSocket ?? (globalThis as any).WebSocket;
    this.onUpdate = options.onUpdate;
    if (!this.ctor) {
      throw new Error("no WebSocket implementation available");
    }
  }

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const ws = new this.ctor(`${this.url}/session/${this.session}`);
      ws.addEventListener("open", () => {
        this.ws = ws;
        resolve();
      });
      ws.addEventListener("error", (ev: any) => reject(ev?.error ?? new Error("connect failed")));
      ws.addEventListener("message", (ev: any) => this.onMessage(String(ev.data)));
    });
  }

  private onMessage(raw: string): void {
    let env: Envelope;
    try {
      env = decodeEnvelope(raw, this.validator);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.invalidInbound += 1;
        return;
      }
      throw err;
    }
    this.received.push(env);
    this.state.apply(env);
    this.onUpdate?.(this.state);
  }

  send(env: Envelope): void {
    if (!this.ws) {
      throw new Error("not connected");
    }
    this.ws.send(encodeEnvelope(env, this.validator));
  }

  open(tMs = 0): void {
    this.send(this.frames.sessionControl(tMs, "open"));
  }

  closeSession(tMs: number): void {
    this.send(this.frames.sessionControl(tMs, "close"));
  }

  disconnect(): void {
    this.ws?.close();
    this.ws = null;
  }

  /** Poll until the predicate holds on the state or the timeout passes. */
  async waitFor(predicate: (state: CockpitState) => boolean, timeoutMs = 10_000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
      if (predicate(this.state)) {
        return;
      }
      await new Promise((r) => setTimeout(r, 20));
    }
    throw new Error("timed out waiting for cockpit state condition");
  }
}
