"""Simulation management block: the single authority for topology and routing.

Agents never exchange position data; they ask the management block who their
neighbors are and whether a destination is reachable. Route lookups are
memoized per source over an immutable snapshot, so a table is semantically a
pure function of the snapshot while costing one BFS per queried source.
"""
from __future__ import annotations

import threading
from typing import Callable, Optional

from .errors import ParameterError, SynchronizationError, UnknownAgentError
from .events import EventKind, EventLog
from .model import (UNREACHABLE, AgentId, HopCount, Position, SimParams,
                    TopologySnapshot, bfs_hops, build_adjacency)


class RouteTable:
    """Shortest-hop routing over one topology snapshot."""

    def __init__(self, snapshot: TopologySnapshot):
        self._snapshot = snapshot
        self._hops_from: dict[AgentId, dict[AgentId, int]] = {}
        self._component: Optional[dict[AgentId, AgentId]] = None
        self._lock = threading.Lock()

    @property
    def snapshot(self) -> TopologySnapshot:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    def _bfs(self, root: AgentId) -> dict[AgentId, int]:
        with self._lock:
            table = self._hops_from.get(root)
            if table is None:
                table = bfs_hops(self._snapshot, root)
                self._hops_from[root] = table
            return table

    def _components(self) -> dict[AgentId, AgentId]:
        with self._lock:
            if self._component is None:
                comp: dict[AgentId, AgentId] = {}
                for uid in self._snapshot.node_ids():
                    if uid in comp:
                        continue
                    frontier = [uid]
                    comp[uid] = uid
                    while frontier:
                        node = frontier.pop()
                        for nbr in self._snapshot.neighbors(node):
                            if nbr not in comp:
                                comp[nbr] = uid
                                frontier.append(nbr)
                self._component = comp
            return self._component

    def neighbors(self, uid: AgentId) -> tuple[AgentId, ...]:
        return self._snapshot.neighbors(uid)

    def has_node(self, uid: AgentId) -> bool:
        return self._snapshot.has_node(uid)

    def hops(self, src: AgentId, dst: AgentId) -> HopCount:
        if not self._snapshot.has_node(src):
            raise UnknownAgentError(src)
        if not self._snapshot.has_node(dst):
            raise UnknownAgentError(dst)
        if src == dst:
            return 0
        table = self._hops_from.get(dst)
        if table is not None:
            return table.get(src, UNREACHABLE)
        table = self._hops_from.get(src)
        if table is not None:
            return table.get(dst, UNREACHABLE)
        # Prefer the destination: many sources query the same few heads,
        # so one BFS rooted there serves them all.
        return self._bfs(dst).get(src, UNREACHABLE)

    def authorize(self, src: AgentId, dst: AgentId) -> bool:
        """True iff a multi-hop path exists right now (src == dst included)."""
        comp = self._components()
        if src not in comp:
            raise UnknownAgentError(src)
        if dst not in comp:
            raise UnknownAgentError(dst)
        return comp[src] == comp[dst]

    def reachable(self, uid: AgentId) -> list[AgentId]:
        """All nodes in uid's component, excluding uid, ascending."""
        comp = self._components()
        if uid not in comp:
            raise UnknownAgentError(uid)
        root = comp[uid]
        return sorted(u for u, r in comp.items() if r == root and u != uid)

    def next_hop(self, src: AgentId, dst: AgentId) -> Optional[AgentId]:
        """First hop of a shortest src->dst path (lowest uid tie-break)."""
        total = self.hops(src, dst)
        if total is UNREACHABLE:
            return None
        if total == 0:
            return src
        to_dst = self._bfs(dst)
        best = None
        for nbr in self._snapshot.neighbors(src):
            if to_dst.get(nbr) == total - 1 and (best is None or nbr < best):
                best = nbr
        return best


class PhaseBarrier:
    """Named synchronization point across a fixed participant set."""

    def __init__(self, phase: str, participants: frozenset,
                 emit: Callable[[EventKind, object, dict], None]):
        if not participants:
            raise ParameterError("barrier needs at least one participant")
        self.phase = phase
        self.participants = participants
        self._emit = emit
        self._entered: set = set()
        self._released = False
        self._cond = threading.Condition()

    @property
    def released(self) -> bool:
        with self._cond:
            return self._released

    def _note_entry(self, uid) -> bool:
        if uid not in self.participants:
            raise ParameterError(f"agent {uid} is not a barrier participant")
        self._entered.add(uid)
        self._emit(EventKind.BARRIER, uid, {"phase": self.phase, "op": "enter"})
        if not self._released and self._entered == set(self.participants):
            self._released = True
            self._emit(EventKind.BARRIER, "SMB",
                       {"phase": self.phase, "op": "release",
                        "participants": sorted(self.participants)})
            return True
        return self._released

    def enter(self, uid) -> bool:
        """Non-blocking entry for the deterministic scheduler."""
        with self._cond:
            released = self._note_entry(uid)
            if released:
                self._cond.notify_all()
            return released

    def wait(self, uid, timeout: Optional[float] = None):
        """Blocking entry for real-time threads; raises on timeout."""
        with self._cond:
            released = self._note_entry(uid)
            if released:
                self._cond.notify_all()
                return
            if not self._cond.wait_for(lambda: self._released, timeout):
                raise SynchronizationError(
                    f"barrier {self.phase!r} timed out waiting for "
                    f"{sorted(self.participants - self._entered)}")


class Smb:
    """Topology, routing, authorization, and barriers for one run."""

    def __init__(self, params: SimParams, log: EventLog,
                 clock: Callable[[], int]):
        self._params = params
        self._log = log
        self._clock = clock
        self._lock = threading.Lock()
        self._version = 0
        self._routes = RouteTable(build_adjacency({}, params.radio_range, version=0))
        self._barriers: dict[str, PhaseBarrier] = {}

    def _emit(self, kind: EventKind, actor, detail: dict):
        self._log.emit(self._clock(), kind, actor, detail)

    @property
    def routes(self) -> RouteTable:
        return self._routes

    @property
    def snapshot(self) -> TopologySnapshot:
        return self._routes.snapshot

    @property
    def version(self) -> int:
        return self._routes.version

    def update_topology(self, positions: dict[AgentId, Position],
                        radio_range: Optional[float] = None) -> RouteTable:
        """Rebuild adjacency from authoritative positions; bumps the version."""
        rng = self._params.radio_range if radio_range is None else radio_range
        with self._lock:
            self._version += 1
            snapshot = build_adjacency(positions, rng, version=self._version)
            self._routes = RouteTable(snapshot)
        self._emit(EventKind.TOPOLOGY_CHANGE, "SMB",
                   {"version": snapshot.version,
                    "nodes": len(positions),
                    "edges": len(snapshot.edges)})
        return self._routes

    def query_neighbors(self, uid: AgentId) -> tuple[AgentId, ...]:
        return self._routes.neighbors(uid)

    def authorize(self, src: AgentId, dst: AgentId) -> bool:
        return self._routes.authorize(src, dst)

    def hops(self, src: AgentId, dst: AgentId) -> HopCount:
        return self._routes.hops(src, dst)

    def barrier(self, participants, phase: str) -> PhaseBarrier:
        """Get or create the barrier registered under ``phase``."""
        wanted = frozenset(participants)
        with self._lock:
            existing = self._barriers.get(phase)
            if existing is not None:
                if existing.participants != wanted:
                    raise ParameterError(
                        f"barrier {phase!r} already registered with a "
                        f"different participant set")
                return existing
            barrier = PhaseBarrier(phase, wanted, self._emit)
            self._barriers[phase] = barrier
            return barrier
