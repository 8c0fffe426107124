"""Agent runtime: per-node agents plus the world that schedules them.

Two scheduler modes share the same agent code. DETERMINISTIC steps agents
round-robin in ascending uid order, one tick at a time, and is fully
reproducible from the seed. REALTIME gives each agent its own thread paced
by ``tick_ms``, matching live-network behavior at the cost of determinism.

Each agent quantum runs mobility, then drains its mailbox (bounded per
tick), then the manage phase (boot / topology reaction / periodic protocol
work). Topology is rebuilt by the management block at tick end, never
mid-step, so all agents within one tick observe the same snapshot version.
"""
from __future__ import annotations

import math
import random
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

from .errors import (LifecycleError, ModeError, ParameterError,
                     IdentityError, UnknownAgentError)
from .events import EventKind, EventLog
from .model import AgentId, Position, Role, SimParams
from .smb import RouteTable, Smb
from .transport import Datagram, TransportConfig, make_network
from .wire import (ProtocolMessage, decode_message, encode_message,
                   message_body)


class MobilityPattern(Enum):
    STATIC = "STATIC"
    RANDOM_WAYPOINT = "RANDOM_WAYPOINT"


class SchedulerMode(Enum):
    DETERMINISTIC = "DETERMINISTIC"
    REALTIME = "REALTIME"


@dataclass(frozen=True)
class ResourceProfile:
    battery: float = 1.0
    cpu_free: float = 1.0
    mem_free: float = 1.0

    def __post_init__(self):
        for name in ("battery", "cpu_free", "mem_free"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ParameterError(f"{name} must be in [0,1], got {value!r}")


@dataclass
class NodeState:
    id: AgentId
    pos: Position
    vel: tuple[float, float] = (0.0, 0.0)
    role: Role = Role.UNASSIGNED
    resources: ResourceProfile = field(default_factory=ResourceProfile)
    protocol_state: dict = field(default_factory=dict)
    alive: bool = True

    @classmethod
    def fresh(cls, uid: AgentId, x: float, y: float, *,
              vel: tuple[float, float] = (0.0, 0.0),
              resources: Optional[ResourceProfile] = None) -> "NodeState":
        return cls(id=uid, pos=Position(float(x), float(y)), vel=vel,
                   resources=resources or ResourceProfile())


@dataclass
class TickReport:
    tick: int
    messages_sent: int = 0
    messages_delivered: int = 0
    role_changes: int = 0
    moved: bool = False


def advance_position(pos: Position, vel: tuple[float, float],
                     waypoint: Optional[Position],
                     world: tuple[float, float],
                     rng: random.Random):
    """One random-waypoint step; returns (pos, vel, waypoint, moved).

    Arrival means the waypoint lies within one step length; the node snaps
    to it and draws the next waypoint uniformly inside the world.
    """
    speed = math.hypot(vel[0], vel[1])
    if speed <= 0.0:
        return pos, vel, waypoint, False
    w, h = world
    if waypoint is None:
        waypoint = Position(rng.uniform(0.0, w), rng.uniform(0.0, h))
    dist = math.dist(pos, waypoint)
    if dist <= speed:
        new_pos = waypoint
        waypoint = Position(rng.uniform(0.0, w), rng.uniform(0.0, h))
    else:
        ux = (waypoint.x - pos.x) / dist
        uy = (waypoint.y - pos.y) / dist
        new_pos = Position(
            min(max(pos.x + ux * speed, 0.0), w),
            min(max(pos.y + uy * speed, 0.0), h),
        )
    if dist > 0:
        new_vel = ((waypoint.x - new_pos.x), (waypoint.y - new_pos.y))
        norm = math.hypot(*new_vel)
        new_vel = (new_vel[0] / norm * speed, new_vel[1] / norm * speed) \
            if norm > 0 else vel
    else:
        new_vel = vel
    return new_pos, new_vel, waypoint, new_pos != pos


class Agent:
    """Autonomous node. Subclasses implement the protocol hooks."""

    kind = "agent"

    def __init__(self, world: "World", state: NodeState,
                 pattern: MobilityPattern = MobilityPattern.STATIC):
        self.world = world
        self.uid = state.id
        self.pos = state.pos
        self.vel = state.vel
        self.resources = state.resources
        self.role = state.role
        self.pattern = pattern
        self.alive = True
        self.rng = world.rng_for(f"agent/{self.uid}")
        self._endpoint = world.net.bind(self.uid)
        self._waypoint: Optional[Position] = None
        self._booted = False
        self._seen_version = -1

    # -- protocol hooks --------------------------------------------------

    def on_boot(self):
        pass

    def on_message(self, src: AgentId, msg: ProtocolMessage):
        pass

    def on_topology_change(self, routes: RouteTable):
        pass

    def periodic(self):
        pass

    def settled(self) -> bool:
        return True

    def reset_protocol(self):
        """Drop protocol state and re-run boot against current topology."""
        self._booted = False

    def state_view(self) -> dict:
        return {}

    # -- runtime ----------------------------------------------------------

    def now(self) -> float:
        return self.world.now_ticks()

    def stamp(self) -> int:
        return self.world.smb.version

    def send(self, dst: AgentId, msg: ProtocolMessage) -> bool:
        return self.world.send_protocol(self, dst, msg)

    def set_role(self, new_role: Role, **detail):
        if new_role is self.role:
            return
        old, self.role = self.role, new_role
        self.world.note_role_change(self, old, new_role, detail)

    def step(self) -> bool:
        if not self.alive:
            return False
        moved = self._move()
        self._drain()
        self._manage()
        return moved

    def _move(self) -> bool:
        if self.pattern is not MobilityPattern.RANDOM_WAYPOINT:
            return False
        self.pos, self.vel, self._waypoint, moved = advance_position(
            self.pos, self.vel, self._waypoint, self.world.params.world, self.rng)
        return moved

    def _drain(self):
        for dg in self._endpoint.poll(limit=World.MAILBOX_LIMIT):
            self.world.dispatch_datagram(self, dg)

    def _manage(self):
        routes = self.world.smb.routes
        if not self._booted:
            self._booted = True
            self._seen_version = routes.version
            self.on_boot()
        elif routes.version > self._seen_version:
            self._seen_version = routes.version
            self.on_topology_change(routes)
        self.periodic()


AGENT_KINDS: dict[str, type] = {}


def register_agent_kind(cls: type) -> type:
    """Class decorator: make a kind spawnable by name."""
    name = cls.kind
    if name in AGENT_KINDS and AGENT_KINDS[name] is not cls:
        raise ParameterError(f"agent kind {name!r} already registered")
    AGENT_KINDS[name] = cls
    return cls


class World:
    """Owns the agents, the transport, the management block, and the clock."""

    MAILBOX_LIMIT = 64

    def __init__(self, params: SimParams,
                 mode: SchedulerMode = SchedulerMode.DETERMINISTIC,
                 transport: Optional[TransportConfig] = None,
                 log: Optional[EventLog] = None):
        self.params = params
        self.mode = mode
        self.log = log if log is not None else EventLog()
        self.net = make_network(transport or TransportConfig(),
                                loss_rng=self.rng_for("loss"),
                                clock=self.now_ticks)
        self.smb = Smb(params, self.log, clock=self.event_time)
        self.agents: dict[AgentId, Agent] = {}
        self.tick_no = 0
        self._used_uids: set[AgentId] = set()
        self._agents_lock = threading.RLock()
        self._sent = 0
        self._delivered = 0
        self._role_changes = 0
        self._running = False
        self._t0 = 0.0
        self._threads: dict[AgentId, threading.Thread] = {}
        self._topo_thread: Optional[threading.Thread] = None

    # -- clocks -----------------------------------------------------------

    def rng_for(self, name: str) -> random.Random:
        # String seeds keep streams stable across platforms and runs.
        return random.Random(f"{self.params.seed}/{name}")

    def now_ticks(self) -> float:
        if self.mode is SchedulerMode.DETERMINISTIC:
            return self.tick_no
        if not self._running:
            return 0.0
        return (time.monotonic() - self._t0) * 1000.0 / self.params.tick_ms

    def event_time(self) -> int:
        if self.mode is SchedulerMode.DETERMINISTIC:
            return self.tick_no
        if not self._running:
            return 0
        return int((time.monotonic() - self._t0) * 1000.0)

    def emit(self, kind: EventKind, actor, detail: dict):
        self.log.emit(self.event_time(), kind, actor, detail)

    # -- population -------------------------------------------------------

    def positions(self) -> dict[AgentId, Position]:
        with self._agents_lock:
            return {uid: a.pos for uid, a in self.agents.items() if a.alive}

    def next_uid(self) -> AgentId:
        return max(self._used_uids) + 1 if self._used_uids else 0

    def spawn_agent(self, kind: str, state: NodeState,
                    pattern: MobilityPattern = MobilityPattern.STATIC) -> AgentId:
        cls = AGENT_KINDS.get(kind)
        if cls is None:
            raise ParameterError(f"unknown agent kind {kind!r}")
        uid = state.id
        if not isinstance(uid, int) or isinstance(uid, bool) or uid < 0:
            raise ParameterError(f"uid must be a non-negative integer, got {uid!r}")
        if not self.params.in_world(state.pos):
            raise ParameterError(
                f"position {tuple(state.pos)} outside world {self.params.world}")
        with self._agents_lock:
            if uid in self._used_uids:
                raise IdentityError(f"uid {uid} was already used; uids are never reused")
            agent = cls(self, state, pattern=pattern)
            self._used_uids.add(uid)
            self.agents[uid] = agent
        self.emit(EventKind.SPAWN, uid,
                  {"kind": kind, "x": agent.pos.x, "y": agent.pos.y})
        self.smb.update_topology(self.positions())
        agent._seen_version = self.smb.version
        if self.mode is SchedulerMode.REALTIME and self._running:
            self._start_agent_thread(agent)
        return uid

    def despawn_agent(self, uid: AgentId):
        with self._agents_lock:
            agent = self.agents.get(uid)
            if agent is None or not agent.alive:
                raise LifecycleError(f"agent {uid} is not alive")
            agent.alive = False
        thread = self._threads.pop(uid, None)
        if thread is not None and thread is not threading.current_thread():
            thread.join(timeout=5.0)
        agent._endpoint.close()  # queued datagrams to it are gone
        with self._agents_lock:
            del self.agents[uid]
        self.emit(EventKind.DESPAWN, uid, {})
        self.smb.update_topology(self.positions())

    def get_agent(self, uid: AgentId) -> Agent:
        with self._agents_lock:
            agent = self.agents.get(uid)
        if agent is None:
            raise UnknownAgentError(uid)
        return agent

    def move_node(self, uid: AgentId, pos):
        agent = self.get_agent(uid)
        pos = Position(float(pos[0]), float(pos[1]))
        if not self.params.in_world(pos):
            raise ParameterError(f"position {tuple(pos)} outside world")
        agent.pos = pos
        agent._waypoint = None
        self.smb.update_topology(self.positions())

    def set_k(self, k: int):
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ParameterError(f"k must be an integer >= 1, got {k!r}")
        self.params = replace(self.params, k=k)

    # -- messaging --------------------------------------------------------

    def send_protocol(self, agent: Agent, dst: AgentId,
                      msg: ProtocolMessage) -> bool:
        src = agent.uid
        routes = self.smb.routes
        if not routes.has_node(dst) or not routes.has_node(src):
            self.emit(EventKind.MSG_DROPPED, src,
                      {"dst": dst, "variant": msg.variant,
                       "reason": "unknown_destination"})
            return False
        if not routes.authorize(src, dst):
            self.emit(EventKind.MSG_DROPPED, src,
                      {"dst": dst, "variant": msg.variant,
                       "reason": "unauthorized"})
            return False
        payload = encode_message(msg)
        accepted = agent._endpoint.send(dst, payload)
        self._sent += 1
        self.emit(EventKind.MSG_SENT, src,
                  {"dst": dst, "proto": msg.proto, "variant": msg.variant,
                   "stamp": msg.stamp, "body": message_body(msg)})
        if not accepted:
            self.emit(EventKind.MSG_DROPPED, src,
                      {"dst": dst, "variant": msg.variant, "reason": "lost"})
        return accepted

    def dispatch_datagram(self, agent: Agent, dg: Datagram):
        try:
            msg = decode_message(dg.payload)
        except Exception as exc:
            self.emit(EventKind.PROTOCOL_VIOLATION, agent.uid,
                      {"from": dg.src, "reason": str(exc)})
            return
        self._delivered += 1
        self.emit(EventKind.MSG_DELIVERED, agent.uid,
                  {"src": msg.src, "dst": agent.uid, "proto": msg.proto,
                   "variant": msg.variant, "stamp": msg.stamp})
        agent.on_message(msg.src, msg)

    def note_role_change(self, agent: Agent, old: Role, new: Role, detail: dict):
        self._role_changes += 1
        payload = {"from": old.value, "to": new.value}
        payload.update(detail)
        self.emit(EventKind.ROLE_CHANGE, agent.uid, payload)

    # -- deterministic scheduling ------------------------------------------

    def tick(self) -> TickReport:
        if self.mode is not SchedulerMode.DETERMINISTIC:
            raise ModeError("tick() requires the deterministic scheduler")
        sent0, delivered0, roles0 = self._sent, self._delivered, self._role_changes
        moved = False
        for uid in sorted(self.agents):
            agent = self.agents.get(uid)
            if agent is not None and agent.alive:
                moved = agent.step() or moved
        if moved:
            self.smb.update_topology(self.positions())
        report = TickReport(
            tick=self.tick_no,
            messages_sent=self._sent - sent0,
            messages_delivered=self._delivered - delivered0,
            role_changes=self._role_changes - roles0,
            moved=moved,
        )
        self.tick_no += 1
        return report

    def run_ticks(self, count: int) -> TickReport:
        report = TickReport(tick=self.tick_no)
        for _ in range(count):
            report = self.tick()
        return report

    # -- real-time scheduling ----------------------------------------------

    def start(self):
        if self.mode is not SchedulerMode.REALTIME:
            raise ModeError("start() requires the real-time scheduler")
        if self._running:
            return
        self._t0 = time.monotonic()
        self._running = True
        self._topo_thread = threading.Thread(
            target=self._topology_loop, name="smb-topology", daemon=True)
        self._topo_thread.start()
        with self._agents_lock:
            agents = list(self.agents.values())
        for agent in agents:
            self._start_agent_thread(agent)

    def stop(self):
        if not self._running:
            return
        self._running = False
        for thread in list(self._threads.values()):
            thread.join(timeout=5.0)
        self._threads.clear()
        if self._topo_thread is not None:
            self._topo_thread.join(timeout=5.0)
            self._topo_thread = None

    def _start_agent_thread(self, agent: Agent):
        thread = threading.Thread(target=self._agent_loop, args=(agent,),
                                  name=f"agent-{agent.uid}", daemon=True)
        self._threads[agent.uid] = thread
        thread.start()

    def _agent_loop(self, agent: Agent):
        tick_s = self.params.tick_ms / 1000.0
        while self._running and agent.alive:
            started = time.monotonic()
            try:
                agent.step()
            except LifecycleError:
                break  # endpoint closed under us during despawn
            except Exception as exc:
                self.emit(EventKind.PROTOCOL_VIOLATION, agent.uid,
                          {"reason": f"agent step failed: {exc}"})
                break
            elapsed = time.monotonic() - started
            time.sleep(max(0.0, tick_s - elapsed))

    def _topology_loop(self):
        tick_s = self.params.tick_ms / 1000.0
        while self._running:
            positions = self.positions()
            if positions != self.smb.snapshot.positions:
                self.smb.update_topology(positions)
            time.sleep(tick_s)

    def close(self):
        if self._running:
            self.stop()
        self.net.close()
