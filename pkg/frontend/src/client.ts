// Control stream client: owns the WebSocket, correlates command acks, and
// reconnects on unexpected drops. The server replays a full SNAPSHOT on
// every (re)connect, so no frames need buffering across gaps.

import type { AckFrame, Command, Frame } from "./protocol.js";
import { parseFrame } from "./protocol.js";
import type { Connection } from "./viewmodel.js";

export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((event?: unknown) => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

export interface ClientOptions {
  url: string;
  onFrame: (frame: Frame) => void;
  onConnection?: (state: Connection) => void;
  socketFactory?: SocketFactory;
  reconnectDelayMs?: number;
}

interface Pending {
  resolve: (ack: AckFrame) => void;
  reject: (err: Error) => void;
}

export class ControlClient {
  private readonly opts: ClientOptions;
  private readonly factory: SocketFactory;
  private socket: SocketLike | null = null;
  private pending = new Map<string, Pending>();
  private nextId = 1;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(opts: ClientOptions) {
    this.opts = opts;
    this.factory =
      opts.socketFactory ??
      ((url) => new WebSocket(url) as unknown as SocketLike);
  }

  connect(): void {
    if (this.closed) {
      return;
    }
    const socket = this.factory(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      this.opts.onConnection?.("CONNECTED");
    };
    socket.onmessage = (event) => {
      this.handleRaw(String(event.data));
    };
    socket.onerror = () => {
      // The close handler does the cleanup; errors always close the socket.
    };
    socket.onclose = () => {
      if (this.socket !== socket) {
        return;
      }
      this.socket = null;
      this.failPending("connection lost");
      if (!this.closed) {
        this.opts.onConnection?.("RECONNECTING");
        this.timer = setTimeout(
          () => this.connect(),
          this.opts.reconnectDelayMs ?? 1000,
        );
      }
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.failPending("client closed");
    this.socket?.close();
    this.socket = null;
  }

  get connected(): boolean {
    return this.socket !== null && this.socket.readyState === OPEN;
  }

  // Sends one command and resolves with its ack (ok or not). Commands sent
  // while disconnected are rejected immediately rather than queued.
  send(cmd: Command): Promise<AckFrame> {
    if (!this.connected || this.socket === null) {
      return Promise.reject(new Error(`not connected; ${cmd.cmd} dropped`));
    }
    const id = `c${this.nextId++}`;
    const promise = new Promise<AckFrame>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.socket.send(JSON.stringify({ ...cmd, id }));
    return promise;
  }

  private handleRaw(raw: string): void {
    let frame: Frame;
    try {
      frame = parseFrame(raw);
    } catch {
      return;
    }
    if (frame.kind === "ACK" && typeof frame.id === "string") {
      const waiter = this.pending.get(frame.id);
      if (waiter) {
        this.pending.delete(frame.id);
        waiter.resolve(frame);
      }
    }
    this.opts.onFrame(frame);
  }

  private failPending(reason: string): void {
    const waiters = [...this.pending.values()];
    this.pending.clear();
    for (const waiter of waiters) {
      waiter.reject(new Error(reason));
    }
  }
}
