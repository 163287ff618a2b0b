// Session model: folds the solver's event stream into the view models
// and mirrors the solver-side command state machine so the toolbar can
// enable exactly the commands the solver would accept.

import {
  Json,
  NodePath,
  SessionStateKind,
  TOOLBAR_COMMANDS,
  WireMessage,
  commandLegal,
} from "./protocol.js";
import { SpyModel } from "./spyModel.js";
import { StackModel } from "./stackModel.js";
import { TreeModel } from "./treeModel.js";

export interface PauseLocation {
  state: SessionStateKind;
  path: NodePath;
  eventSeq: number | null;
  trigger: string;
}

export interface PendingCommand {
  name: string;
  seq: number;
  status: "pending" | "acked" | "rejected";
  message?: string;
}

export type SendFn = (name: string, payload: { [key: string]: Json }, seq: number) => void;

export class SessionModel {
  tree = new TreeModel();
  spy = new SpyModel();
  stack = new StackModel();

  state: SessionStateKind = "idle";
  runId = 0;
  header: { [key: string]: Json } | null = null;
  summary: { [key: string]: Json } | null = null;
  solutions: Array<{ [key: string]: Json }> = [];
  lastPause: PauseLocation | null = null;
  breakpoints = new Set<string>();

  resyncRequested = false;
  onResync: (() => void) | null = null;

  private expectedSeq = 1;
  private commandSeq = 0;
  pending = new Map<number, PendingCommand>();
  private send: SendFn | null = null;

  attachSender(send: SendFn): void {
    this.send = send;
  }

  // -- outbound ------------------------------------------------------------

  canSend(command: string): boolean {
    return commandLegal(this.state, command);
  }

  toolbar(): Record<string, boolean> {
    const enabled: Record<string, boolean> = {};
    for (const cmd of TOOLBAR_COMMANDS) {
      enabled[cmd] = this.canSend(cmd);
    }
    return enabled;
  }

  sendCommand(name: string, payload: { [key: string]: Json } = {}): number {
    this.commandSeq += 1;
    const seq = this.commandSeq;
    this.pending.set(seq, { name, seq, status: "pending" });
    if (name === "set_breakpoint" && Array.isArray(payload.path)) {
      this.breakpoints.add((payload.path as number[]).join("."));
    }
    if (name === "clear_breakpoint" && Array.isArray(payload.path)) {
      this.breakpoints.delete((payload.path as number[]).join("."));
    }
    if (this.send) {
      this.send(name, payload, seq);
    }
    return seq;
  }

  // -- inbound -------------------------------------------------------------

  feed(msg: WireMessage): void {
    if (msg.type !== "event") return;
    this.checkSeq(msg);
    const payload = msg.payload;
    switch (msg.name) {
      case "run_start": {
        this.header = payload;
        this.runId = msg.run_id;
        break;
      }
      case "state":
        this.applyState(msg);
        break;
      case "node_created":
      case "node_visit":
      case "node_done":
        this.tree.apply(msg.name, payload);
        break;
      case "frame_push":
        this.stack.push(payload);
        break;
      case "frame_pop":
        this.stack.pop();
        break;
      case "prop_event":
        this.spy.append(payload);
        break;
      case "solution":
        this.solutions.push(payload);
        break;
      case "run_done":
        this.summary = payload;
        break;
      case "ack":
      case "error": {
        const seq = Number(payload.command_seq ?? -1);
        const entry = this.pending.get(seq);
        if (entry) {
          entry.status = msg.name === "ack" ? "acked" : "rejected";
          if (msg.name === "error") entry.message = String(payload.message ?? "");
        }
        break;
      }
      default:
        // unknown event kinds are ignored so newer solvers stay usable
        break;
    }
  }

  feedLine(line: string, decodeFn: (line: string) => WireMessage): void {
    this.feed(decodeFn(line));
  }

  private checkSeq(msg: WireMessage): void {
    if (msg.name === "state" && msg.run_id > this.runId) {
      // a new run begins; its event seq starts over at 1
      this.expectedSeq = 1;
    }
    if (msg.seq !== this.expectedSeq) {
      this.resyncRequested = true;
      if (this.onResync) this.onResync();
    }
    this.expectedSeq = msg.seq + 1;
  }

  private applyState(msg: WireMessage): void {
    const payload = msg.payload;
    const next = payload.state as SessionStateKind;
    const trigger = String(payload.trigger ?? "");
    if (trigger === "restart" || (next === "running_free" && msg.run_id > this.runId)) {
      // rerun: everything known so far turns white, the spy and the
      // stack start over, and the new stream recolors the tree
      this.tree.repaintWhite();
      this.spy.reset();
      this.stack.reset();
      this.solutions = [];
      this.summary = null;
      this.runId = msg.run_id;
    }
    this.state = next;
    if (next === "paused_at_node" || next === "paused_at_event") {
      this.lastPause = {
        state: next,
        path: (payload.path as number[]) ?? [],
        eventSeq: typeof payload.event_seq === "number" ? payload.event_seq : null,
        trigger,
      };
      const pausePath = (payload.path as number[]) ?? [];
      this.tree.currentKey = pausePath.join(".");
    }
  }
}
