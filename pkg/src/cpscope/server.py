"""Debugger session: execution control, solver-side client, GUI-side endpoint.

Two contexts cooperate. The solver thread produces events and yields at
checkpoints (each node-visit start, each propagation event); the network
context owns the socket. They meet in two thread-safe queues: commands
in, events out. The event queue is bounded; a slow consumer blocks the
solver rather than losing anything.

SessionControl is the state machine. It is total over commands: anything
not legal in the current state earns an error reply naming the state,
and nothing else happens.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
from dataclasses import replace
from enum import Enum, auto

from .events import PropagationEvent
from .protocol import (
    PROTOCOL_VERSION,
    Breakpoint,
    ProtocolError,
    SessionState,
    SessionStateKind,
    WireMessage,
    command_legal,
    decode,
    encode,
)
from .search import ChoiceFrame, NodePath, NodeState, SearchAbort
from .trace import NodeRecord, NodeStats, TraceData

log = logging.getLogger(__name__)

EVENT_QUEUE_LIMIT = 10_000

_TITLES = {
    SessionStateKind.IDLE: "Idle",
    SessionStateKind.RUNNING_FREE: "RunningFree",
    SessionStateKind.PAUSED_AT_NODE: "PausedAtNode",
    SessionStateKind.PAUSED_AT_EVENT: "PausedAtEvent",
    SessionStateKind.FINISHED: "Finished",
}


class HandshakeError(Exception):
    pass


class RunMode(Enum):
    FREE = auto()  # run until breakpoint, break_now, or the end
    NEXT_NODE = auto()  # pause when the next node visit starts
    ONE_EVENT = auto()  # pause at the next event (or node, if none comes first)


class SessionControl:
    """Command handling and pause logic, driven from the solver thread.

    checkpoint_node() is called by the engine when a node visit starts;
    on_event() listens on the store. Both drain pending commands first,
    then decide whether to pause. Pausing blocks the solver thread until
    a resuming command arrives, so a paused solver cannot touch the store.
    """

    def __init__(self, breakpoints=(), emit=None) -> None:
        self.emit = emit if emit is not None else (lambda name, payload: None)
        self.breakpoints: dict[NodePath, Breakpoint] = {
            tuple(p): Breakpoint(tuple(p)) for p in breakpoints
        }
        self.state = SessionState(SessionStateKind.IDLE)
        self.mode = RunMode.FREE
        self.break_requested = False
        self.restart_requested = False
        self.transitions: list[dict] = []
        self.monitor = None
        self._cv = threading.Condition()
        self._pending: list[tuple[str, dict, int]] = []
        self._closed = False

    # -- wiring ----------------------------------------------------------

    def attach(self, store, monitor) -> None:
        """Bind to one run's store and monitor. Call once per run, after
        the monitor has registered its own listener (row forwarding must
        happen before any pause)."""
        self.monitor = monitor
        store.add_listener(self.on_event)

    def submit(self, name: str, payload: dict, seq: int) -> None:
        """Queue a command from the network thread."""
        with self._cv:
            self._pending.append((name, payload, seq))
            self._cv.notify_all()

    def shutdown(self) -> None:
        """The peer went away; wake any pause loop so the run can abort."""
        with self._cv:
            self._closed = True
            self._cv.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed

    # -- state machine ----------------------------------------------------

    def _transition(self, new: SessionState, trigger: str) -> None:
        old = self.state
        self.state = new
        entry = {
            "from": _TITLES[old.kind],
            "to": _TITLES[new.kind],
            "trigger": trigger,
        }
        self.transitions.append(entry)
        log.debug("session %s", entry)
        self.emit("state", dict(new.as_payload(), trigger=trigger))

    def begin_run(self, run_id: int) -> None:
        self.mode = RunMode.FREE
        self.break_requested = False
        self.restart_requested = False
        self._transition(
            SessionState(SessionStateKind.RUNNING_FREE),
            "restart" if run_id > 1 else "run_start",
        )

    def run_finished(self) -> None:
        self._transition(SessionState(SessionStateKind.FINISHED), "run_done")

    # -- command handling ---------------------------------------------------

    def _error(self, name: str, seq: int, message: str) -> str:
        self.emit(
            "error",
            {
                "command": name,
                "command_seq": seq,
                "message": message,
                "state": _TITLES[self.state.kind],
            },
        )
        return "stay"

    def _ack(self, name: str, seq: int, **extra) -> None:
        self.emit("ack", {"command": name, "command_seq": seq, **extra})

    def handle_command(self, name: str, payload: dict, seq: int) -> str:
        """Process one command. Returns "stay", "resume", or "restart"."""
        if not command_legal(self.state.kind, name):
            return self._error(name, seq, f"illegal in {_TITLES[self.state.kind]}")

        if name in ("set_breakpoint", "clear_breakpoint"):
            raw = payload.get("path")
            if not isinstance(raw, list) or not all(isinstance(i, int) for i in raw):
                return self._error(name, seq, f"{name} requires a path of child indices")
            path = tuple(raw)
            if name == "set_breakpoint":
                existing = self.breakpoints.get(path)
                if existing is None:
                    self.breakpoints[path] = Breakpoint(path)
                else:
                    self.breakpoints[path] = replace(existing, enabled=True)
            else:
                self.breakpoints.pop(path, None)
            self._ack(name, seq, path=list(path))
            return "stay"

        if name == "break_now":
            self.break_requested = True
            self._ack(name, seq)
            return "stay"

        if name == "restart":
            self.restart_requested = True
            self._ack(name, seq)
            return "restart"

        if name == "step_into":
            if self.monitor is not None:
                self.monitor.spy_activate(True)
            self.mode = RunMode.ONE_EVENT
            self._ack(name, seq)
            return "resume"

        if name == "step_over":
            at_event = self.state.kind is SessionStateKind.PAUSED_AT_EVENT
            self.mode = RunMode.ONE_EVENT if at_event else RunMode.NEXT_NODE
            self._ack(name, seq)
            return "resume"

        if name == "step_out":
            if self.monitor is not None:
                self.monitor.spy_activate(False)
            self.mode = RunMode.NEXT_NODE
            self._ack(name, seq)
            return "resume"

        if name == "skip_step":
            self.mode = RunMode.NEXT_NODE
            self._ack(name, seq)
            return "resume"

        if name == "continue":
            self.mode = RunMode.FREE
            self._ack(name, seq)
            return "resume"

        return self._error(name, seq, f"unknown command {name!r}")

    # -- solver-side yield points ---------------------------------------------

    def _drain(self) -> str:
        """Handle every queued command; report the strongest outcome."""
        outcome = "stay"
        while True:
            with self._cv:
                if not self._pending:
                    return outcome
                name, payload, seq = self._pending.pop(0)
            result = self.handle_command(name, payload, seq)
            if result != "stay":
                outcome = result

    def checkpoint_node(self, path: NodePath) -> None:
        if self._drain() == "restart":
            raise SearchAbort(restart=True)
        hit = False
        bp = self.breakpoints.get(tuple(path))
        if bp is not None and bp.enabled:
            self.breakpoints[tuple(path)] = replace(bp, hit_count=bp.hit_count + 1)
            hit = True
        if hit or self.break_requested or self.mode is not RunMode.FREE:
            trigger = "breakpoint" if hit else ("break_now" if self.break_requested else "step")
            self._pause(
                SessionState(SessionStateKind.PAUSED_AT_NODE, path=tuple(path)),
                trigger,
            )

    def on_event(self, ev: PropagationEvent) -> None:
        if self._drain() == "restart":
            raise SearchAbort(restart=True)
        if self.break_requested or self.mode is RunMode.ONE_EVENT:
            trigger = "break_now" if self.break_requested else "step"
            self._pause(
                SessionState(
                    SessionStateKind.PAUSED_AT_EVENT,
                    path=ev.node_path,
                    event_seq=ev.seq,
                ),
                trigger,
            )

    def _pause(self, state: SessionState, trigger: str) -> None:
        self.break_requested = False
        self._transition(state, trigger)
        while True:
            with self._cv:
                while not self._pending and not self._closed:
                    self._cv.wait()
                if self._closed:
                    # nobody left to resume us; give the run up
                    raise SearchAbort(restart=False)
                name, payload, seq = self._pending.pop(0)
            result = self.handle_command(name, payload, seq)
            if result == "restart":
                raise SearchAbort(restart=True)
            if result == "resume":
                self._transition(
                    SessionState(SessionStateKind.RUNNING_FREE), name
                )
                return

    def wait_while_finished(self) -> bool:
        """Sit in Finished handling commands. True = restart requested,
        False = connection closed."""
        while True:
            with self._cv:
                while not self._pending and not self._closed:
                    self._cv.wait()
                if self._closed:
                    return False
                name, payload, seq = self._pending.pop(0)
            if self.handle_command(name, payload, seq) == "restart":
                return True


# ----------------------------------------------------------------------
# solver side


class WireSink:
    """Monitor sink that forwards the run to the wire, mirroring the
    trace-file record shapes field for field."""

    def __init__(self, send) -> None:
        self._send = send

    def header(self, header: dict) -> None:
        self._send("run_start", dict(header))

    def node_created(self, path, label) -> None:
        self._send("node_created", {"path": list(path), "label": label})

    def node_visit(self, path, order) -> None:
        self._send("node_visit", {"path": list(path), "order": order})

    def node_done(self, path, state, stats) -> None:
        self._send(
            "node_done",
            {"path": list(path), "state": state.value, "stats": stats.as_dict()},
        )

    def frame_push(self, frame: ChoiceFrame) -> None:
        self._send(
            "frame_push",
            {"name": frame.name, "value": frame.value, "depth": frame.depth},
        )

    def frame_pop(self) -> None:
        self._send("frame_pop", {})

    def prop(self, row: dict) -> None:
        self._send("prop_event", dict(row))

    def solution(self, sol: dict) -> None:
        self._send(
            "solution",
            {
                "path": list(sol["path"]),
                "objective": sol["objective"],
                "assignments": sol["assignments"],
            },
        )

    def summary(self, summary: dict) -> None:
        self._send("run_done", dict(summary))


class DebugClient:
    """Connects a solver run to a listening debugger UI.

    `runner(control, sink)` must execute one complete run: build a fresh
    store and monitor, wire `sink` in as a monitor sink, call
    control.attach(store, monitor), and drive the engine through
    run_start/run_done. It is invoked again for every restart.
    """

    def __init__(
        self,
        host: str,
        port: int,
        model_name: str,
        runner,
        breakpoints=(),
    ) -> None:
        self.host = host
        self.port = port
        self.model_name = model_name
        self.runner = runner
        self.control = SessionControl(breakpoints, emit=self.send_event)
        self.run_id = 0
        self._event_seq = 0
        self._out: queue.Queue = queue.Queue(maxsize=EVENT_QUEUE_LIMIT)
        self._sock: socket.socket | None = None
        self._disconnected = threading.Event()
        self._threads: list[threading.Thread] = []

    # -- event side --------------------------------------------------------

    def send_event(self, name: str, payload: dict) -> None:
        if self._disconnected.is_set():
            return
        self._event_seq += 1
        msg = WireMessage("event", name, self.run_id, self._event_seq, payload)
        self._out.put(msg)  # blocks when the consumer lags; never drops

    # -- threads -----------------------------------------------------------

    def _write_loop(self, wfile) -> None:
        while True:
            msg = self._out.get()
            if msg is None:
                break
            if self._disconnected.is_set():
                continue  # drain without writing
            try:
                wfile.write(encode(msg).encode("utf-8"))
                wfile.flush()
            except OSError:
                self._disconnected.set()

    def _read_loop(self, rfile) -> None:
        try:
            for raw in rfile:
                try:
                    msg = decode(raw.decode("utf-8"))
                except ProtocolError as exc:
                    log.warning("bad message from UI: %s", exc)
                    continue
                if msg.type == "command":
                    self.control.submit(msg.name, msg.payload, msg.seq)
        except OSError:
            pass
        self._disconnected.set()
        self.control.shutdown()

    # -- lifecycle -----------------------------------------------------------

    def _handshake(self, rfile) -> None:
        hello = WireMessage(
            "command",
            "hello",
            0,
            0,
            {"protocol_version": PROTOCOL_VERSION, "model": self.model_name},
        )
        self._sock.sendall(encode(hello).encode("utf-8"))
        while True:
            raw = rfile.readline()
            if not raw:
                raise HandshakeError("connection closed during handshake")
            reply = decode(raw.decode("utf-8"))
            if reply.type == "command":
                # the UI may front-load commands (say, breakpoints) before
                # acknowledging; queue them for the run
                self.control.submit(reply.name, reply.payload, reply.seq)
                continue
            if reply.name == "error":
                raise HandshakeError(reply.payload.get("message", "handshake rejected"))
            if reply.name == "ack":
                return
            raise HandshakeError(f"unexpected handshake reply {reply.name!r}")

    def run(self) -> None:
        """Connect, handshake, and run (rerunning on restart) until the
        run finishes and the UI disconnects or stops restarting."""
        self._sock = socket.create_connection((self.host, self.port))
        rfile = self._sock.makefile("rb")
        wfile = self._sock.makefile("wb")
        try:
            self._handshake(rfile)
            reader = threading.Thread(target=self._read_loop, args=(rfile,), daemon=True)
            writer = threading.Thread(target=self._write_loop, args=(wfile,), daemon=True)
            self._threads = [reader, writer]
            reader.start()
            writer.start()
            again = True
            while again:
                self.run_id += 1
                self._event_seq = 0
                self.control.begin_run(self.run_id)
                try:
                    self.runner(self.control, WireSink(self.send_event))
                except SearchAbort:
                    # the run was already unwound by the engine; only a
                    # runner-level abort (e.g. pre-root pause) lands here
                    pass
                if self.control.restart_requested:
                    continue
                if self._disconnected.is_set():
                    break
                self.control.run_finished()
                again = self.control.wait_while_finished()
        finally:
            self._out.put(None)
            if self._threads:
                self._threads[1].join(timeout=5)  # writer: flush what's queued
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._sock.close()
            except OSError:
                pass
            if self._threads:
                self._threads[0].join(timeout=5)


# ----------------------------------------------------------------------
# GUI side


class DebugServer:
    """Listening endpoint standing in for the visual debugger.

    Owns the accept socket and, after accept(), one solver connection.
    Reading and command sending happen in the caller's thread; every
    received message is kept in `log` so a whole run can be replayed
    or reconstructed after the fact.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0, timeout: float = 30.0):
        self._listener = socket.create_server((host, port))
        self._listener.settimeout(timeout)
        self.host, self.port = self._listener.getsockname()[:2]
        self.timeout = timeout
        self._conn: socket.socket | None = None
        self._rfile = None
        self.hello: WireMessage | None = None
        self.log: list[WireMessage] = []
        self._cmd_seq = 0

    # -- connection ----------------------------------------------------------

    def accept(self) -> WireMessage:
        """Accept one solver and read its hello (without replying yet)."""
        self._conn, _ = self._listener.accept()
        self._conn.settimeout(self.timeout)
        self._rfile = self._conn.makefile("rb")
        raw = self._rfile.readline()
        if not raw:
            raise HandshakeError("solver closed before hello")
        msg = decode(raw.decode("utf-8"))
        if msg.type != "command" or msg.name != "hello":
            raise HandshakeError(f"expected hello, got {msg.name!r}")
        self.hello = msg
        return msg

    def respond_hello(self, ok: bool | None = None, message: str = "") -> None:
        """Ack or reject the hello; version mismatches are rejected and
        the connection dropped."""
        version = self.hello.payload.get("protocol_version")
        if ok is None:
            ok = version == PROTOCOL_VERSION
        if ok:
            self._send(WireMessage("event", "ack", 0, 0, {"command": "hello"}))
        else:
            self._send(
                WireMessage(
                    "event",
                    "error",
                    0,
                    0,
                    {
                        "command": "hello",
                        "message": message
                        or f"protocol version {version!r} != {PROTOCOL_VERSION}",
                    },
                )
            )
            self.close()

    def accept_hello(self) -> WireMessage:
        msg = self.accept()
        self.respond_hello()
        return msg

    # -- traffic ------------------------------------------------------------

    def _send(self, msg: WireMessage) -> None:
        self._conn.sendall(encode(msg).encode("utf-8"))

    def send_command(self, name: str, payload: dict | None = None) -> int:
        self._cmd_seq += 1
        self._send(WireMessage("command", name, 0, self._cmd_seq, payload or {}))
        return self._cmd_seq

    def recv(self) -> WireMessage:
        raw = self._rfile.readline()
        if not raw:
            raise EOFError("solver closed the connection")
        msg = decode(raw.decode("utf-8"))
        self.log.append(msg)
        return msg

    def recv_event(self, name: str | None = None) -> WireMessage:
        """Next event, optionally skipping ahead to a given name."""
        while True:
            msg = self.recv()
            if msg.type == "event" and (name is None or msg.name == name):
                return msg

    def collect_run(self) -> list[WireMessage]:
        """Read until run_done; returns everything received meanwhile."""
        collected = []
        while True:
            msg = self.recv()
            collected.append(msg)
            if msg.type == "event" and msg.name == "run_done":
                return collected

    def close(self) -> None:
        if self._rfile is not None:
            try:
                self._rfile.close()
            except OSError:
                pass
            self._rfile = None
        for sock in (self._conn, self._listener):
            if sock is not None:
                try:
                    sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                try:
                    sock.close()
                except OSError:
                    pass
        self._conn = None

    def __enter__(self) -> "DebugServer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def reconstruct_from_events(messages, run_id: int | None = None) -> TraceData:
    """Fold a received event stream back into the trace-file data model,
    so a UI-side reconstruction can be diffed against the solver's file."""
    runs = sorted({m.run_id for m in messages if m.type == "event"})
    if run_id is None:
        if not runs:
            raise ValueError("no events to reconstruct from")
        run_id = runs[-1]
    header: dict = {}
    nodes: dict[NodePath, NodeRecord] = {}
    prop_rows: list[dict] = []
    solutions: list[dict] = []
    summary: dict = {}
    frame_log: list[dict] = []
    for msg in messages:
        if msg.type != "event" or msg.run_id != run_id:
            continue
        p = msg.payload
        if msg.name == "run_start":
            header = dict(p)
        elif msg.name == "node_created":
            path = tuple(p["path"])
            nodes[path] = NodeRecord(path, NodeState.WHITE, p["label"])
        elif msg.name == "node_visit":
            rec = nodes[tuple(p["path"])]
            rec.state = NodeState.BLUE
            rec.visit_order = p["order"]
        elif msg.name == "node_done":
            rec = nodes[tuple(p["path"])]
            rec.state = NodeState(p["state"])
            s = p["stats"]
            rec.stats = NodeStats(
                s["event_count"], s["size_before"], s["size_after"], s["reduction_pct"]
            )
        elif msg.name == "frame_push":
            frame_log.append(
                {"ev": "push", "name": p["name"], "value": p["value"], "depth": p["depth"]}
            )
        elif msg.name == "frame_pop":
            frame_log.append({"ev": "pop"})
        elif msg.name == "prop_event":
            prop_rows.append(dict(p))
        elif msg.name == "solution":
            solutions.append(
                {
                    "path": tuple(p["path"]),
                    "objective": p["objective"],
                    "assignments": p["assignments"],
                }
            )
        elif msg.name == "run_done":
            summary = dict(p)
    return TraceData(header, nodes, prop_rows, solutions, summary, frame_log)
