// Listening endpoint for one solver connection. The solver dials in,
// sends hello, and streams its run; we answer the handshake, feed every
// event to the session model, and write commands back.
//
// The socket reader never waits on rendering: lines are split off the
// buffer and dispatched synchronously to the session fold (cheap), and
// hosts subscribe to onEvent for their own (possibly slow) drawing,
// which they are expected to debounce.

import * as net from "node:net";

import { PROTOCOL_VERSION, WireMessage, decode, encode } from "./protocol.js";
import { SessionModel } from "./session.js";

export interface DebuggerServerOptions {
  port?: number;
  host?: string;
  onEvent?: (msg: WireMessage) => void;
  onConnect?: (model: string) => void;
  onClose?: () => void;
}

export class DebuggerServer {
  readonly session = new SessionModel();
  private server: net.Server;
  private socket: net.Socket | null = null;
  private buffer = "";
  private opts: DebuggerServerOptions;
  modelName: string | null = null;
  private helloSeen = false;

  constructor(opts: DebuggerServerOptions = {}) {
    this.opts = opts;
    this.server = net.createServer((socket) => this.accept(socket));
    this.session.attachSender((name, payload, seq) => {
      this.write({ type: "command", name, run_id: 0, seq, payload });
    });
  }

  listen(): Promise<number> {
    return new Promise((resolve, reject) => {
      this.server.once("error", reject);
      this.server.listen(this.opts.port ?? 0, this.opts.host ?? "127.0.0.1", () => {
        const addr = this.server.address() as net.AddressInfo;
        resolve(addr.port);
      });
    });
  }

  private accept(socket: net.Socket): void {
    if (this.socket !== null) {
      socket.destroy(); // one solver at a time
      return;
    }
    this.socket = socket;
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => this.onData(chunk));
    socket.on("close", () => {
      this.socket = null;
      if (this.opts.onClose) this.opts.onClose();
    });
    socket.on("error", () => {
      /* close follows */
    });
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let nl: number;
    while ((nl = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line.trim().length === 0) continue;
      this.onLine(line);
    }
  }

  private onLine(line: string): void {
    let msg: WireMessage;
    try {
      msg = decode(line);
    } catch {
      this.socket?.destroy();
      return;
    }
    if (!this.helloSeen) {
      this.handshake(msg);
      return;
    }
    this.session.feed(msg);
    if (this.opts.onEvent) this.opts.onEvent(msg);
  }

  private handshake(msg: WireMessage): void {
    if (msg.type !== "command" || msg.name !== "hello") {
      this.write({
        type: "event",
        name: "error",
        run_id: 0,
        seq: 0,
        payload: { command: msg.name, message: "expected hello" },
      });
      this.socket?.end();
      return;
    }
    const version = msg.payload.protocol_version;
    if (version !== PROTOCOL_VERSION) {
      this.write({
        type: "event",
        name: "error",
        run_id: 0,
        seq: 0,
        payload: {
          command: "hello",
          message: `protocol version ${JSON.stringify(version)} != ${PROTOCOL_VERSION}`,
        },
      });
      this.socket?.end();
      return;
    }
    this.helloSeen = true;
    this.modelName = String(msg.payload.model ?? "");
    this.write({
      type: "event",
      name: "ack",
      run_id: 0,
      seq: 0,
      payload: { command: "hello" },
    });
    if (this.opts.onConnect) this.opts.onConnect(this.modelName);
  }

  private write(msg: WireMessage): void {
    if (this.socket && !this.socket.destroyed) {
      this.socket.write(encode(msg));
    }
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      this.socket?.destroy();
      this.server.close(() => resolve());
    });
  }
}
