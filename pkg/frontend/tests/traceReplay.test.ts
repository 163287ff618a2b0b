import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { ProtocolError } from "../src/protocol.js";
import { SessionModel } from "../src/session.js";
import { loadTraceFile, traceToEvents } from "../src/traceReplay.js";

const TRACE = fileURLToPath(new URL("./fixtures/golomb5.trace.jsonl", import.meta.url));

describe("trace file conversion", () => {
  it("turns records into a well-formed event stream", () => {
    const events = loadTraceFile(TRACE);
    expect(events[0]!.name).toBe("run_start");
    expect(events[events.length - 1]!.name).toBe("run_done");
    events.forEach((msg, i) => {
      expect(msg.type).toBe("event");
      expect(msg.seq).toBe(i + 1);
      expect(msg.run_id).toBe(1);
    });
  });

  it("drops the kind tag but keeps every other header field", () => {
    const events = loadTraceFile(TRACE);
    const header = events[0]!.payload;
    expect(header.kind).toBeUndefined();
    expect(header.model).toBe("golomb5");
    expect(header.version).toBe(1);
  });

  it("feeds the same final picture as the live stream", () => {
    const session = new SessionModel();
    for (const msg of loadTraceFile(TRACE)) session.feed(msg);
    expect(session.resyncRequested).toBe(false);
    expect(session.tree.stateCounts()).toEqual({ blue: 5, green: 2, red: 4 });
    expect(session.summary!.best_objective).toBe(11);
    expect(session.summary!.outcome).toBe("optimal");
    expect(session.stack.frames.length).toBe(0);
  });

  it("rejects unknown record kinds", () => {
    expect(() => traceToEvents([{ kind: "mystery" }])).toThrow(ProtocolError);
    expect(() => traceToEvents([{ kind: "node", ev: "hm", path: [] }])).toThrow(
      /unknown node record/,
    );
  });

  it("reports the line of a malformed record", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trace-"));
    const file = path.join(dir, "bad.jsonl");
    fs.writeFileSync(file, '{"kind":"header","version":1}\nnot json\n');
    expect(() => loadTraceFile(file)).toThrow(/line 2/);
    fs.rmSync(dir, { recursive: true });
  });
});
