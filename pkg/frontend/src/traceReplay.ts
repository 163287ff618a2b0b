// Post-mortem browsing: a saved trace file holds kind-tagged records,
// one JSON object per line. Converting each record to its wire-event
// twin lets the same view models serve both live and saved runs; the
// toolbar stays dead because there is no session to command.

import * as fs from "node:fs";

import { Json, ProtocolError, WireMessage, decode } from "./protocol.js";

type Record_ = { [key: string]: Json };

function rest(record: Record_, ...drop: string[]): { [key: string]: Json } {
  const out: { [key: string]: Json } = {};
  for (const [k, v] of Object.entries(record)) {
    if (!drop.includes(k)) out[k] = v;
  }
  return out;
}

/** Convert trace-file records to the event stream they would have been. */
export function traceToEvents(records: Record_[]): WireMessage[] {
  const events: WireMessage[] = [];
  let runId = 1;
  let seq = 0;
  const push = (name: string, payload: { [key: string]: Json }): void => {
    seq += 1;
    events.push({ type: "event", name, run_id: runId, seq, payload });
  };
  for (const record of records) {
    const kind = record.kind;
    if (kind === "header") {
      if (typeof record.run_id === "number") runId = record.run_id;
      push("run_start", rest(record, "kind", "ts"));
    } else if (kind === "node") {
      const ev = record.ev;
      if (ev === "created") {
        push("node_created", { path: record.path ?? [], label: record.label ?? "" });
      } else if (ev === "visit") {
        push("node_visit", { path: record.path ?? [], order: record.order ?? 0 });
      } else if (ev === "done") {
        push("node_done", {
          path: record.path ?? [],
          state: record.state ?? "",
          stats: record.stats ?? {},
        });
      } else {
        throw new ProtocolError(`unknown node record ev: ${String(ev)}`);
      }
    } else if (kind === "frame") {
      if (record.ev === "push") {
        push("frame_push", {
          name: record.name ?? "",
          value: record.value ?? null,
          depth: record.depth ?? 0,
        });
      } else {
        push("frame_pop", {});
      }
    } else if (kind === "prop") {
      push("prop_event", rest(record, "kind", "ts"));
    } else if (kind === "solution") {
      push("solution", {
        path: record.path ?? [],
        objective: record.objective ?? null,
        assignments: record.assignments ?? {},
      });
    } else if (kind === "summary") {
      push("run_done", rest(record, "kind", "ts"));
    } else {
      throw new ProtocolError(`unknown trace record kind: ${String(kind)}`);
    }
  }
  return events;
}

export function loadTraceFile(path: string): WireMessage[] {
  const text = fs.readFileSync(path, "utf-8");
  const records: Record_[] = [];
  let lineno = 0;
  for (const line of text.split("\n")) {
    lineno += 1;
    if (line.trim().length === 0) continue;
    let parsed: Json;
    try {
      parsed = JSON.parse(line) as Json;
    } catch {
      throw new ProtocolError(`line ${lineno}: not valid JSON`);
    }
    if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
      throw new ProtocolError(`line ${lineno}: record must be an object`);
    }
    records.push(parsed);
  }
  return traceToEvents(records);
}

/** Load a saved wire-event stream (one encoded envelope per line). */
export function loadEventFile(path: string): WireMessage[] {
  const text = fs.readFileSync(path, "utf-8");
  const events: WireMessage[] = [];
  for (const line of text.split("\n")) {
    if (line.trim().length === 0) continue;
    events.push(decode(line));
  }
  return events;
}
