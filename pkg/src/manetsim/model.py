"""Shared domain types and pure geometric/graph computations.

Positions live in a rectangular world, links follow the unit-disk model
(edge iff euclidean distance <= radio range, boundary inclusive), and hop
distances are shortest-path hop counts over that adjacency.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union

from .errors import ParameterError, UnknownAgentError

AgentId = int


class Position(NamedTuple):
    x: float
    y: float


class Role(Enum):
    UNASSIGNED = "UNASSIGNED"
    HEAD = "HEAD"
    MEMBER = "MEMBER"
    GATEWAY = "GATEWAY"
    LEADER = "LEADER"
    CLIENT = "CLIENT"


class _Unreachable:
    """Sentinel for node pairs with no connecting path.

    Deliberately not an integer so callers must handle partitions
    explicitly instead of comparing against a magic large number.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNREACHABLE"

    def __bool__(self):
        return False


UNREACHABLE = _Unreachable()

HopCount = Union[int, _Unreachable]


@dataclass(frozen=True)
class SimParams:
    """Run-wide simulation parameters."""

    k: int = 2
    radio_range: float = 25.0
    world: tuple[float, float] = (100.0, 100.0)
    seed: int = 0
    tick_ms: int = 100

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if not (self.radio_range > 0):
            raise ParameterError(f"radio_range must be > 0, got {self.radio_range}")
        w, h = self.world
        if not (w > 0 and h > 0):
            raise ParameterError(f"world sides must be > 0, got {self.world}")
        if self.tick_ms < 1:
            raise ParameterError(f"tick_ms must be >= 1, got {self.tick_ms}")

    def in_world(self, pos: Position) -> bool:
        w, h = self.world
        return 0 <= pos.x <= w and 0 <= pos.y <= h


@dataclass(frozen=True)
class TopologySnapshot:
    """Immutable view of node positions and radio-range adjacency.

    ``edges`` holds each undirected link once as an (a, b) pair with a < b.
    Treat all contained collections as read-only.
    """

    version: int
    positions: dict[AgentId, Position]
    radio_range: float
    edges: frozenset[tuple[AgentId, AgentId]]
    _neighbors: dict[AgentId, tuple[AgentId, ...]] = field(repr=False, default_factory=dict)

    def neighbors(self, uid: AgentId) -> tuple[AgentId, ...]:
        if uid not in self.positions:
            raise UnknownAgentError(uid)
        return self._neighbors.get(uid, ())

    def has_node(self, uid: AgentId) -> bool:
        return uid in self.positions

    def node_ids(self) -> list[AgentId]:
        return sorted(self.positions)


def euclidean_distance(a: Position, b: Position) -> float:
    return math.dist(a, b)


def build_adjacency(
    positions: dict[AgentId, Position],
    radio_range: float,
    version: int = 0,
) -> TopologySnapshot:
    """Compute the unit-disk adjacency over ``positions``.

    Edge (a, b) is present iff a != b and distance(a, b) <= radio_range,
    boundary inclusive. ``version`` is assigned by the caller (the SMB keeps
    it strictly increasing within a run).
    """
    if not (radio_range > 0):
        raise ParameterError(f"radio_range must be > 0, got {radio_range}")
    ids = sorted(positions)
    edges = set()
    nbrs: dict[AgentId, list[AgentId]] = {uid: [] for uid in ids}
    for i, a in enumerate(ids):
        pa = positions[a]
        for b in ids[i + 1 :]:
            if euclidean_distance(pa, positions[b]) <= radio_range:
                edges.add((a, b))
                nbrs[a].append(b)
                nbrs[b].append(a)
    return TopologySnapshot(
        version=version,
        positions=dict(positions),
        radio_range=radio_range,
        edges=frozenset(edges),
        _neighbors={uid: tuple(sorted(ns)) for uid, ns in nbrs.items()},
    )


def hop_distance(t: TopologySnapshot, a: AgentId, b: AgentId) -> HopCount:
    """Shortest-path hop count between two nodes, or UNREACHABLE."""
    for uid in (a, b):
        if not t.has_node(uid):
            raise UnknownAgentError(uid)
    if a == b:
        return 0
    dist = {a: 0}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        d = dist[cur] + 1
        for nxt in t.neighbors(cur):
            if nxt not in dist:
                if nxt == b:
                    return d
                dist[nxt] = d
                queue.append(nxt)
    return UNREACHABLE


def bfs_hops(t: TopologySnapshot, src: AgentId) -> dict[AgentId, int]:
    """Hop counts from ``src`` to every reachable node (src included, 0)."""
    if not t.has_node(src):
        raise UnknownAgentError(src)
    dist = {src: 0}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        d = dist[cur] + 1
        for nxt in t.neighbors(cur):
            if nxt not in dist:
                dist[nxt] = d
                queue.append(nxt)
    return dist
