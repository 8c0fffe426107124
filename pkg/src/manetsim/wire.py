"""Canonical wire encoding for protocol messages.

Each message is a single UTF-8 JSON object with a fixed envelope:
``{"v": 1, "proto": ..., "variant": ..., "src": ..., "stamp": ..., "body": {...}}``
where ``stamp`` is the sender's topology version at send time. The encoding
is versioned and self-describing; unknown versions or variants decode to a
:class:`~manetsim.errors.DecodeError`, never a crash.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from .errors import DecodeError

WIRE_VERSION = 1


@dataclass(frozen=True)
class ProtocolMessage:
    src: int
    stamp: int

    proto = ""
    variant = ""


# --- clustering ---

@dataclass(frozen=True)
class Solicit(ProtocolMessage):
    proto = "cluster"
    variant = "SOLICIT"


@dataclass(frozen=True)
class HeadAdvert(ProtocolMessage):
    head_id: int = 0
    hops_so_far: int = 0

    proto = "cluster"
    variant = "HEAD_ADVERT"


@dataclass(frozen=True)
class HeadResign(ProtocolMessage):
    head_id: int = 0

    proto = "cluster"
    variant = "HEAD_RESIGN"


# --- mobile cloud ---

@dataclass(frozen=True)
class ScoreBeacon(ProtocolMessage):
    score: float = 0.0

    proto = "cloud"
    variant = "SCORE_BEACON"


@dataclass(frozen=True)
class LeaderClaim(ProtocolMessage):
    score: float = 0.0

    proto = "cloud"
    variant = "LEADER_CLAIM"


@dataclass(frozen=True)
class LeaderHeartbeat(ProtocolMessage):
    member_count: int = 0

    proto = "cloud"
    variant = "LEADER_HEARTBEAT"


@dataclass(frozen=True)
class Resign(ProtocolMessage):
    proto = "cloud"
    variant = "RESIGN"


MESSAGE_TYPES = (Solicit, HeadAdvert, HeadResign,
                 ScoreBeacon, LeaderClaim, LeaderHeartbeat, Resign)
_REGISTRY = {(cls.proto, cls.variant): cls for cls in MESSAGE_TYPES}
_ENVELOPE_FIELDS = {"src", "stamp"}


def message_body(msg: ProtocolMessage) -> dict:
    """Variant-specific fields, excluding the envelope (src, stamp)."""
    return {f.name: getattr(msg, f.name) for f in fields(msg)
            if f.name not in _ENVELOPE_FIELDS}


def encode_message(msg: ProtocolMessage) -> bytes:
    body = message_body(msg)
    record = {
        "v": WIRE_VERSION,
        "proto": msg.proto,
        "variant": msg.variant,
        "src": msg.src,
        "stamp": msg.stamp,
        "body": body,
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _require(cond: bool, why: str):
    if not cond:
        raise DecodeError(why)


def decode_message(data: bytes) -> ProtocolMessage:
    """Decode one wire record. Raises DecodeError on any malformed input."""
    _require(bool(data), "empty payload")
    try:
        record = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"unparseable payload: {exc}") from exc
    _require(isinstance(record, dict), "record is not an object")
    _require(record.get("v") == WIRE_VERSION, f"unknown wire version {record.get('v')!r}")
    key = (record.get("proto"), record.get("variant"))
    cls = _REGISTRY.get(key)
    _require(cls is not None, f"unknown message kind {key!r}")
    src = record.get("src")
    stamp = record.get("stamp")
    _require(isinstance(src, int) and not isinstance(src, bool) and src >= 0,
             f"bad src {src!r}")
    _require(isinstance(stamp, int) and not isinstance(stamp, bool) and stamp >= 0,
             f"bad stamp {stamp!r}")
    body = record.get("body")
    _require(isinstance(body, dict), "body is not an object")

    kwargs = {"src": src, "stamp": stamp}
    for f in fields(cls):
        if f.name in _ENVELOPE_FIELDS:
            continue
        _require(f.name in body, f"missing field {f.name!r}")
        value = body[f.name]
        if f.type in ("int", int):
            _require(isinstance(value, int) and not isinstance(value, bool),
                     f"field {f.name!r} must be an integer")
        else:
            _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                     f"field {f.name!r} must be a number")
            value = float(value)
            _require(math.isfinite(value), f"field {f.name!r} must be finite")
        kwargs[f.name] = value
    extra = set(body) - {f.name for f in fields(cls)}
    _require(not extra, f"unexpected fields {sorted(extra)}")

    msg = cls(**kwargs)
    if isinstance(msg, (ScoreBeacon, LeaderClaim)):
        _require(0.0 <= msg.score <= 1.0, f"score {msg.score} outside [0,1]")
    if isinstance(msg, LeaderHeartbeat):
        _require(msg.member_count >= 0, "negative member_count")
    return msg
