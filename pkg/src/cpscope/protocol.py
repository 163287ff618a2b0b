"""Debugger wire protocol.

Messages are newline-delimited JSON objects with a fixed envelope:

    {"type": "command"|"event", "name": ..., "run_id": N, "seq": N,
     "payload": {...}}

The visual side listens; the solver connects and opens with a `hello`
command carrying the protocol version and model name. Events flow
solver -> client with a strictly increasing per-run seq; commands flow
client -> solver and are each answered by an `ack` or `error` event
carrying the command's seq for correlation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

PROTOCOL_VERSION = 1

COMMANDS = frozenset(
    {
        "hello",
        "step_into",
        "step_over",
        "step_out",
        "skip_step",
        "break_now",
        "continue",
        "set_breakpoint",
        "clear_breakpoint",
        "restart",
    }
)

EVENTS = frozenset(
    {
        "ack",
        "error",
        "state",
        "run_start",
        "node_created",
        "node_visit",
        "node_done",
        "frame_push",
        "frame_pop",
        "prop_event",
        "solution",
        "run_done",
    }
)


class ProtocolError(Exception):
    pass


@dataclass(frozen=True)
class WireMessage:
    type: str  # "command" | "event"
    name: str
    run_id: int = 0
    seq: int = 0
    payload: dict = field(default_factory=dict)


def encode(msg: WireMessage) -> str:
    return (
        json.dumps(
            {
                "type": msg.type,
                "name": msg.name,
                "run_id": msg.run_id,
                "seq": msg.seq,
                "payload": msg.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        + "\n"
    )


def decode(line: str) -> WireMessage:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ProtocolError("message must be a JSON object")
    for key in ("type", "name"):
        if key not in raw:
            raise ProtocolError(f"missing field {key!r}")
    if raw["type"] not in ("command", "event"):
        raise ProtocolError(f"unknown message type {raw['type']!r}")
    payload = raw.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("payload must be an object")
    return WireMessage(
        raw["type"],
        raw["name"],
        int(raw.get("run_id", 0)),
        int(raw.get("seq", 0)),
        payload,
    )


# ----------------------------------------------------------------------
# session state machine


class SessionStateKind(Enum):
    IDLE = "idle"
    RUNNING_FREE = "running_free"
    PAUSED_AT_NODE = "paused_at_node"
    PAUSED_AT_EVENT = "paused_at_event"
    FINISHED = "finished"


@dataclass(frozen=True)
class SessionState:
    kind: SessionStateKind
    path: tuple[int, ...] | None = None
    event_seq: int | None = None

    def as_payload(self) -> dict:
        payload: dict = {"state": self.kind.value}
        if self.path is not None:
            payload["path"] = list(self.path)
        if self.event_seq is not None:
            payload["event_seq"] = self.event_seq
        return payload


_STEPPING = frozenset({"step_into", "step_over", "step_out", "skip_step", "continue"})
_ANYTIME = frozenset({"set_breakpoint", "clear_breakpoint"})

LEGAL_COMMANDS: dict[SessionStateKind, frozenset[str]] = {
    SessionStateKind.IDLE: _ANYTIME,
    SessionStateKind.RUNNING_FREE: _ANYTIME | {"break_now"},
    SessionStateKind.PAUSED_AT_NODE: _ANYTIME | _STEPPING | {"restart"},
    SessionStateKind.PAUSED_AT_EVENT: _ANYTIME | _STEPPING | {"restart"},
    SessionStateKind.FINISHED: _ANYTIME | {"restart"},
}


def command_legal(state: SessionStateKind, command: str) -> bool:
    """Total legality relation; unknown command names are never legal."""
    return command in LEGAL_COMMANDS.get(state, frozenset())


@dataclass(frozen=True)
class Breakpoint:
    path: tuple[int, ...]
    enabled: bool = True
    hit_count: int = 0
