// Entry point. Two modes:
//
//   node dist/main.js --port 8642 [--out DIR]
//     Listen for a solver, follow the run, and write the current tree
//     SVG plus text panels after every event batch.
//
//   node dist/main.js --trace FILE [--events FILE] [--out DIR]
//     Open a saved run for post-mortem browsing and emit the final
//     views once. No toolbar: there is no session to command.

import * as fs from "node:fs";
import * as path from "node:path";

import { renderSpy, renderStack, renderToolbar, renderTreeSVG } from "./render.js";
import { DebuggerServer } from "./server.js";
import { SessionModel } from "./session.js";
import { loadEventFile, loadTraceFile } from "./traceReplay.js";
import { TreeMode } from "./treeModel.js";

interface Options {
  port: number | null;
  trace: string | null;
  events: string | null;
  out: string;
  mode: TreeMode;
  scaling: "sqrt" | "linear";
}

function usage(): never {
  process.stderr.write(
    "usage: main.js (--port N | --trace FILE | --events FILE)" +
      " [--out DIR] [--christmas] [--scaling sqrt|linear]\n",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): Options {
  const opts: Options = {
    port: null,
    trace: null,
    events: null,
    out: ".",
    mode: "plain",
    scaling: "sqrt",
  };
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    const next = (): string => {
      i += 1;
      const v = argv[i];
      if (v === undefined) usage();
      return v;
    };
    if (arg === "--port") {
      const port = Number(next());
      if (!Number.isInteger(port) || port < 0 || port > 65535) usage();
      opts.port = port;
    } else if (arg === "--trace") {
      opts.trace = next();
    } else if (arg === "--events") {
      opts.events = next();
    } else if (arg === "--out") {
      opts.out = next();
    } else if (arg === "--christmas") {
      opts.mode = "christmas";
    } else if (arg === "--scaling") {
      const s = next();
      if (s !== "sqrt" && s !== "linear") usage();
      opts.scaling = s;
    } else {
      usage();
    }
  }
  const sources = [opts.port, opts.trace, opts.events].filter((v) => v !== null);
  if (sources.length !== 1) usage();
  return opts;
}

function writeViews(session: SessionModel, opts: Options, withToolbar: boolean): void {
  session.tree.mode = opts.mode;
  session.tree.scaling = opts.scaling;
  fs.mkdirSync(opts.out, { recursive: true });
  fs.writeFileSync(path.join(opts.out, "tree.svg"), renderTreeSVG(session.tree));
  fs.writeFileSync(path.join(opts.out, "stack.txt"), renderStack(session.stack) + "\n");
  fs.writeFileSync(path.join(opts.out, "spy.txt"), renderSpy(session.spy) + "\n");
  if (withToolbar) {
    fs.writeFileSync(path.join(opts.out, "toolbar.txt"), renderToolbar(session) + "\n");
  }
}

function replay(opts: Options): void {
  const file = opts.trace ?? opts.events;
  if (file === null) usage();
  const events = opts.trace !== null ? loadTraceFile(opts.trace) : loadEventFile(file);
  const session = new SessionModel();
  for (const msg of events) session.feed(msg);
  writeViews(session, opts, false);
  const summary = session.summary;
  const outcome = summary !== null ? String(summary.outcome ?? "?") : "(no summary)";
  process.stdout.write(`replayed ${events.length} events, outcome: ${outcome}\n`);
}

async function live(opts: Options): Promise<void> {
  let dirty = false;
  const server = new DebuggerServer({
    port: opts.port ?? 0,
    onEvent: () => {
      dirty = true;
    },
    onConnect: (model) => process.stdout.write(`solver connected: ${model}\n`),
    onClose: () => process.stdout.write("solver disconnected\n"),
  });
  const port = await server.listen();
  process.stdout.write(`listening on ${port}, views in ${opts.out}\n`);
  const timer = setInterval(() => {
    if (!dirty) return;
    dirty = false;
    writeViews(server.session, opts, true);
  }, 200);
  await new Promise<void>((resolve) => {
    process.on("SIGINT", () => resolve());
    process.on("SIGTERM", () => resolve());
  });
  clearInterval(timer);
  await server.close();
}

export async function main(argv: string[]): Promise<void> {
  const opts = parseArgs(argv);
  if (opts.port !== null) {
    await live(opts);
  } else {
    replay(opts);
  }
}

const invoked = process.argv[1];
if (invoked !== undefined && path.resolve(invoked) === new URL(import.meta.url).pathname) {
  main(process.argv.slice(2)).catch((err) => {
    process.stderr.write(String(err) + "\n");
    process.exit(1);
  });
}
