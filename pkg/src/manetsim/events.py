"""Structured event log and run metrics.

Every observable action in a run is appended to an EventLog as a SimEvent
with a monotonically increasing sequence number. Serialized logs are ndjson
with sorted keys and compact separators, so two identical runs produce
byte-identical files.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Optional

from .errors import ParameterError


class EventKind(Enum):
    SPAWN = "SPAWN"
    DESPAWN = "DESPAWN"
    MSG_SENT = "MSG_SENT"
    MSG_DELIVERED = "MSG_DELIVERED"
    MSG_DROPPED = "MSG_DROPPED"
    ROLE_CHANGE = "ROLE_CHANGE"
    ELECTION_CONFLICT = "ELECTION_CONFLICT"
    PROTOCOL_VIOLATION = "PROTOCOL_VIOLATION"
    TOPOLOGY_CHANGE = "TOPOLOGY_CHANGE"
    BARRIER = "BARRIER"


@dataclass(frozen=True)
class SimEvent:
    seq: int
    time: int
    kind: EventKind
    actor: object  # agent uid (int) or "SMB"
    detail: dict

    def to_json(self) -> str:
        record = {
            "seq": self.seq,
            "time": self.time,
            "kind": self.kind.value,
            "actor": self.actor,
            "detail": self.detail,
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(line: str) -> "SimEvent":
        record = json.loads(line)
        return SimEvent(
            seq=record["seq"],
            time=record["time"],
            kind=EventKind(record["kind"]),
            actor=record["actor"],
            detail=record["detail"],
        )


class EventLog:
    """Append-only event sink.

    Keeps events in memory up to ``memory_limit``; beyond that, the oldest
    events spill to ``spill_path`` (appending never fails mid-run). Emit is
    thread-safe for the real-time scheduler.
    """

    def __init__(self, spill_path: Optional[str] = None,
                 memory_limit: int = 1_000_000):
        if memory_limit < 1:
            raise ParameterError("memory_limit must be >= 1")
        self._events: list[SimEvent] = []
        self._spill_path = spill_path
        self._memory_limit = memory_limit
        self._spilled = 0
        self._next_seq = 0
        self._lock = threading.Lock()
        self._subscribers: list[Callable[[SimEvent], None]] = []

    def emit(self, time: int, kind: EventKind, actor, detail: dict) -> SimEvent:
        with self._lock:
            event = SimEvent(self._next_seq, time, kind, actor, detail)
            self._next_seq += 1
            self._events.append(event)
            if self._spill_path is not None and len(self._events) > self._memory_limit:
                keep = self._memory_limit // 2
                tail, self._events = self._events[:-keep], self._events[-keep:]
                with open(self._spill_path, "a", encoding="utf-8") as fh:
                    for ev in tail:
                        fh.write(ev.to_json() + "\n")
                self._spilled += len(tail)
            subscribers = list(self._subscribers)
        for fn in subscribers:
            fn(event)
        return event

    def subscribe(self, fn: Callable[[SimEvent], None]):
        with self._lock:
            self._subscribers.append(fn)

    def unsubscribe(self, fn: Callable[[SimEvent], None]):
        with self._lock:
            self._subscribers.remove(fn)

    def __len__(self) -> int:
        with self._lock:
            return self._spilled + len(self._events)

    @property
    def last_seq(self) -> int:
        """Sequence number of the most recent event, or -1 when empty."""
        with self._lock:
            return self._next_seq - 1

    def tail(self, count: int) -> list[SimEvent]:
        with self._lock:
            return self._events[-count:] if count else []

    def iter_all(self) -> Iterator[SimEvent]:
        if self._spilled and self._spill_path is not None:
            with open(self._spill_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        yield SimEvent.from_json(line)
        with self._lock:
            buffered = list(self._events)
        yield from buffered

    def write_ndjson(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            for ev in self.iter_all():
                fh.write(ev.to_json() + "\n")

    @staticmethod
    def read_ndjson(path: str) -> list[SimEvent]:
        out = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(SimEvent.from_json(line))
        return out


@dataclass
class RunMetrics:
    node_count: int
    converged: bool
    convergence_tick: Optional[int]
    cluster_count: int
    cluster_sizes: dict = field(default_factory=dict)  # size -> how many clusters
    gateway_count: int = 0
    messages_total: int = 0
    leader_ids: dict = field(default_factory=dict)  # component key -> leader uid

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "converged": self.converged,
            "convergence_tick": self.convergence_tick,
            "cluster_count": self.cluster_count,
            "cluster_sizes": {str(k): v for k, v in sorted(self.cluster_sizes.items())},
            "gateway_count": self.gateway_count,
            "messages_total": self.messages_total,
            "leader_ids": {str(k): v for k, v in sorted(self.leader_ids.items())},
        }


def _components(uids: list, edges: Iterable[tuple]) -> dict:
    parent = {u: u for u in uids}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a, b in edges:
        if a in parent and b in parent:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return {u: find(u) for u in uids}


def compute_metrics(events: Iterable[SimEvent], nodes: list[dict],
                    edges: Optional[Iterable[tuple]] = None,
                    converged: bool = True) -> RunMetrics:
    """Aggregate a finished run.

    ``nodes`` are final per-node records ({"uid", "role", and protocol fields
    "cluster" or "leader"/"score"}). ``edges`` is the final adjacency when
    available; without it, leader grouping falls back to the reported leader
    ids.
    """
    messages_total = 0
    last_role_change: Optional[int] = None
    for ev in events:
        if ev.kind is EventKind.MSG_SENT:
            messages_total += 1
        elif ev.kind is EventKind.ROLE_CHANGE:
            last_role_change = ev.time

    heads = [n["uid"] for n in nodes if n.get("role") == "HEAD"]
    gateway_count = sum(1 for n in nodes if n.get("role") == "GATEWAY")
    sizes: dict[int, int] = {}
    for h in heads:
        members = sum(1 for n in nodes
                      if n["uid"] != h and n.get("cluster") == h)
        size = 1 + members
        sizes[size] = sizes.get(size, 0) + 1

    leader_ids: dict = {}
    leader_nodes = [n for n in nodes if n.get("role") == "LEADER"]
    if edges is not None:
        comp = _components([n["uid"] for n in nodes], edges)
        for n in leader_nodes:
            leader_ids[comp[n["uid"]]] = n["uid"]
    else:
        for n in leader_nodes:
            leader_ids[n["uid"]] = n["uid"]

    return RunMetrics(
        node_count=len(nodes),
        converged=converged,
        convergence_tick=last_role_change,
        cluster_count=len(heads),
        cluster_sizes=sizes,
        gateway_count=gateway_count,
        messages_total=messages_total,
        leader_ids=leader_ids,
    )
