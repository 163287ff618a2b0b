// Wire protocol shared with the solver: one JSON object per line,
// canonical encoding (sorted keys, compact separators) so every message
// has exactly one byte representation.

export const PROTOCOL_VERSION = 1;

export type Json = null | boolean | number | string | Json[] | { [key: string]: Json };

export interface WireMessage {
  type: "event" | "command";
  name: string;
  run_id: number;
  seq: number;
  payload: { [key: string]: Json };
}

export class ProtocolError extends Error {}

function sortedStringify(value: Json): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(sortedStringify).join(",") + "]";
  }
  const keys = Object.keys(value).sort();
  const parts = keys.map((k) => JSON.stringify(k) + ":" + sortedStringify(value[k] as Json));
  return "{" + parts.join(",") + "}";
}

export function encode(msg: WireMessage): string {
  const body: { [key: string]: Json } = {
    type: msg.type,
    name: msg.name,
    run_id: msg.run_id,
    seq: msg.seq,
    payload: msg.payload,
  };
  return sortedStringify(body) + "\n";
}

export function decode(line: string): WireMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`not JSON: ${String(err)}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("message must be a JSON object");
  }
  const obj = raw as { [key: string]: unknown };
  for (const field of ["type", "name", "run_id", "seq", "payload"]) {
    if (!(field in obj)) {
      throw new ProtocolError(`missing field ${field}`);
    }
  }
  if (obj.type !== "event" && obj.type !== "command") {
    throw new ProtocolError(`unknown message type ${String(obj.type)}`);
  }
  if (typeof obj.name !== "string" || typeof obj.run_id !== "number" || typeof obj.seq !== "number") {
    throw new ProtocolError("name/run_id/seq have wrong types");
  }
  if (typeof obj.payload !== "object" || obj.payload === null || Array.isArray(obj.payload)) {
    throw new ProtocolError("payload must be an object");
  }
  return {
    type: obj.type,
    name: obj.name,
    run_id: obj.run_id,
    seq: obj.seq,
    payload: obj.payload as { [key: string]: Json },
  };
}

// -- session state machine (UI-side mirror) --------------------------------

export type SessionStateKind =
  | "idle"
  | "running_free"
  | "paused_at_node"
  | "paused_at_event"
  | "finished";

export const STATE_TITLES: Record<SessionStateKind, string> = {
  idle: "Idle",
  running_free: "RunningFree",
  paused_at_node: "PausedAtNode",
  paused_at_event: "PausedAtEvent",
  finished: "Finished",
};

const ANYTIME = ["set_breakpoint", "clear_breakpoint"];
const STEPPING = ["step_into", "step_over", "step_out", "skip_step", "continue"];

export const LEGAL_COMMANDS: Record<SessionStateKind, readonly string[]> = {
  idle: ANYTIME,
  running_free: [...ANYTIME, "break_now"],
  paused_at_node: [...ANYTIME, ...STEPPING, "restart"],
  paused_at_event: [...ANYTIME, ...STEPPING, "restart"],
  finished: [...ANYTIME, "restart"],
};

export function commandLegal(state: SessionStateKind, command: string): boolean {
  return LEGAL_COMMANDS[state].includes(command);
}

export const TOOLBAR_COMMANDS = [
  "step_into",
  "step_over",
  "step_out",
  "skip_step",
  "break_now",
  "continue",
  "restart",
] as const;

export type NodePath = readonly number[];

export function pathKey(path: NodePath): string {
  return path.join(".");
}

export function parentKey(path: NodePath): string | null {
  return path.length === 0 ? null : path.slice(0, -1).join(".");
}
