"""Control stream server: the live link between a running world and UIs.

Clients attach over a WebSocket and receive JSON frames: one SNAPSHOT on
connect (full topology, states, params), then EVENT frames for every logged
SimEvent and DELTA frames describing node/edge/param changes after each
tick. Clients send ControlCommands; each is applied between ticks and
acknowledged with its id. A slow client whose outbound buffer fills is
disconnected rather than ever stalling the simulation.
"""
from __future__ import annotations

import asyncio
import json
from dataclasses import replace
from typing import Optional

from .agents import (MobilityPattern, NodeState, ResourceProfile,
                     SchedulerMode)
from .errors import SimError
from .events import SimEvent
from .model import Position
from .runner import boot_schedule, build_world, final_node_records
from .scenario import PROTOCOL_KINDS, Scenario
from .transport import Backend

COMMANDS = {"START", "PAUSE", "STEP", "SET_PARAM", "ADD_NODE",
            "REMOVE_NODE", "MOVE_NODE", "SNAPSHOT"}
SETTABLE_PARAMS = {"k", "loss_rate", "tick_ms"}
CLIENT_BUFFER = 512  # frames queued per client before it is dropped


class _Client:
    def __init__(self, connection):
        self.connection = connection
        self.queue: asyncio.Queue[Optional[str]] = asyncio.Queue(maxsize=CLIENT_BUFFER)
        self.writer_task: Optional[asyncio.Task] = None

    def push(self, frame: str) -> bool:
        try:
            self.queue.put_nowait(frame)
            return True
        except asyncio.QueueFull:
            return False


class ControlServer:
    """Serves one scenario on one port until cancelled or shut down."""

    def __init__(self, scenario: Scenario, port: int = 8765,
                 seed: Optional[int] = None, autostart: bool = False):
        if seed is not None:
            scenario = scenario.with_seed(seed)
        self.scenario = scenario
        self.port = port
        self.world = build_world(scenario, mode=SchedulerMode.DETERMINISTIC)
        self._schedule = list(boot_schedule(scenario))
        self._boot_index = 0
        self._running = autostart
        self._closing = asyncio.Event()
        self._clients: set[_Client] = set()
        self._pending_events: list[SimEvent] = []
        self._last_nodes: dict[int, dict] = {}
        self._last_edges: frozenset = frozenset()
        self._last_params: dict = {}
        self.world.log.subscribe(self._pending_events.append)

    # -- frame building ------------------------------------------------------

    def _params_dict(self) -> dict:
        p = self.world.params
        loss = getattr(self.world.net.cfg, "loss_rate", 0.0)
        return {"k": p.k, "radio_range": p.radio_range,
                "world": list(p.world), "tick_ms": p.tick_ms,
                "seed": p.seed, "loss_rate": loss}

    def _node_records(self) -> dict[int, dict]:
        return {rec["uid"]: rec for rec in final_node_records(self.world)}

    def _edge_set(self) -> frozenset:
        return self.world.smb.snapshot.edges

    def _snapshot_frame(self) -> str:
        nodes = self._node_records()
        edges = self._edge_set()
        return json.dumps({
            "kind": "SNAPSHOT",
            "seq": self.world.log.last_seq,
            "tick": self.world.tick_no,
            "protocol": self.scenario.protocol.value,
            "running": self._running,
            "params": self._params_dict(),
            "nodes": [nodes[uid] for uid in sorted(nodes)],
            "edges": sorted([list(e) for e in edges]),
        }, sort_keys=True)

    @staticmethod
    def _event_frame(event: SimEvent) -> str:
        return json.dumps({
            "kind": "EVENT",
            "event": {"seq": event.seq, "time": event.time,
                      "kind": event.kind.value, "actor": event.actor,
                      "detail": event.detail},
        }, sort_keys=True)

    def _delta_frame(self) -> Optional[str]:
        nodes = self._node_records()
        edges = self._edge_set()
        params = self._params_dict()
        changed = [nodes[uid] for uid in sorted(nodes)
                   if self._last_nodes.get(uid) != nodes[uid]]
        removed = sorted(uid for uid in self._last_nodes if uid not in nodes)
        added_edges = sorted([list(e) for e in edges - self._last_edges])
        gone_edges = sorted([list(e) for e in self._last_edges - edges])
        params_changed = params != self._last_params
        if not (changed or removed or added_edges or gone_edges or params_changed):
            return None
        frame = {
            "kind": "DELTA",
            "tick": self.world.tick_no,
            "seq": self.world.log.last_seq,
            "changed": changed,
            "removed": removed,
            "edges_added": added_edges,
            "edges_removed": gone_edges,
        }
        if params_changed:
            frame["params"] = params
        self._last_nodes = nodes
        self._last_edges = edges
        self._last_params = params
        return json.dumps(frame, sort_keys=True)

    @staticmethod
    def _ack(cmd_id, ok: bool, error: Optional[str] = None,
             result: Optional[dict] = None) -> str:
        frame: dict = {"kind": "ACK", "id": cmd_id, "ok": ok}
        if error is not None:
            frame["error"] = error
        if result is not None:
            frame["result"] = result
        return json.dumps(frame, sort_keys=True)

    # -- fan-out ----------------------------------------------------------------

    def _broadcast(self, frame: str):
        for client in list(self._clients):
            if not client.push(frame):
                self._drop_client(client)

    def _drop_client(self, client: _Client):
        self._clients.discard(client)
        try:
            client.queue.put_nowait(None)  # writer exits, then closes
        except asyncio.QueueFull:
            if client.writer_task is not None:
                client.writer_task.cancel()

    def _flush(self):
        # The log subscriber appends to this same list; drain it in place.
        events = self._pending_events[:]
        self._pending_events.clear()
        for event in events:
            self._broadcast(self._event_frame(event))
        delta = self._delta_frame()
        if delta is not None:
            self._broadcast(delta)

    # -- simulation stepping --------------------------------------------------------

    def _advance(self, ticks: int):
        for _ in range(ticks):
            while (self._boot_index < len(self._schedule)
                   and self._schedule[self._boot_index][0] <= self.world.tick_no):
                _, spec = self._schedule[self._boot_index]
                self.world.spawn_agent(self.scenario.agent_kind(spec),
                                       self.scenario.node_state(spec),
                                       pattern=spec.mobility)
                self._boot_index += 1
            self.world.tick()

    # -- command handling --------------------------------------------------------

    def _apply_command(self, cmd: dict) -> Optional[dict]:
        """Returns an optional result payload; raises on any failure."""
        name = cmd.get("cmd")
        if name == "START":
            self._running = True
            return None
        if name == "PAUSE":
            self._running = False
            return None
        if name == "STEP":
            n = cmd.get("n", 1)
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise SimError(f"STEP needs an integer n >= 1, got {n!r}")
            self._advance(n)
            return {"tick": self.world.tick_no}
        if name == "SET_PARAM":
            return self._set_param(cmd.get("key"), cmd.get("value"))
        if name == "ADD_NODE":
            return self._add_node(cmd)
        if name == "REMOVE_NODE":
            uid = cmd.get("uid")
            if not isinstance(uid, int) or isinstance(uid, bool):
                raise SimError(f"REMOVE_NODE needs an integer uid, got {uid!r}")
            self.world.despawn_agent(uid)
            return None
        if name == "MOVE_NODE":
            uid = cmd.get("uid")
            if not isinstance(uid, int) or isinstance(uid, bool):
                raise SimError(f"MOVE_NODE needs an integer uid, got {uid!r}")
            x, y = self._coords(cmd)
            self.world.move_node(uid, Position(x, y))
            return None
        raise SimError(f"unknown command {name!r}")

    @staticmethod
    def _coords(cmd: dict) -> tuple[float, float]:
        x, y = cmd.get("x"), cmd.get("y")
        for v in (x, y):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SimError(f"x/y must be numbers, got {x!r}, {y!r}")
        return float(x), float(y)

    def _add_node(self, cmd: dict) -> dict:
        x, y = self._coords(cmd)
        kind = cmd.get("kind") or PROTOCOL_KINDS[self.scenario.protocol]
        raw_res = cmd.get("resources", [1.0, 1.0, 1.0])
        if (not isinstance(raw_res, list) or len(raw_res) != 3
                or any(not isinstance(v, (int, float)) or isinstance(v, bool)
                       for v in raw_res)):
            raise SimError(f"resources must be three numbers, got {raw_res!r}")
        raw_vel = cmd.get("vel", [0.0, 0.0])
        if (not isinstance(raw_vel, list) or len(raw_vel) != 2
                or any(not isinstance(v, (int, float)) or isinstance(v, bool)
                       for v in raw_vel)):
            raise SimError(f"vel must be two numbers, got {raw_vel!r}")
        try:
            pattern = MobilityPattern(cmd.get("mobility", "STATIC"))
        except ValueError:
            raise SimError(f"unknown mobility {cmd.get('mobility')!r}") from None
        uid = self.world.next_uid()
        state = NodeState(id=uid, pos=Position(x, y),
                          vel=(float(raw_vel[0]), float(raw_vel[1])),
                          resources=ResourceProfile(*[float(v) for v in raw_res]))
        self.world.spawn_agent(kind, state, pattern=pattern)
        return {"uid": uid}

    def _set_param(self, key, value) -> Optional[dict]:
        if key not in SETTABLE_PARAMS:
            raise SimError(f"parameter {key!r} is not settable; "
                           f"allowed: {sorted(SETTABLE_PARAMS)}")
        if key == "k":
            self.world.set_k(value)
            for uid in sorted(self.world.agents):
                self.world.agents[uid].reset_protocol()
            return {"k": value}
        if key == "tick_ms":
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise SimError(f"tick_ms must be an integer >= 1, got {value!r}")
            self.world.params = replace(self.world.params, tick_ms=value)
            return {"tick_ms": value}
        # loss_rate
        if not isinstance(value, (int, float)) or isinstance(value, bool) \
                or not 0.0 <= value <= 1.0:
            raise SimError(f"loss_rate must be in [0,1], got {value!r}")
        if self.scenario.transport.backend is not Backend.SIM:
            raise SimError("loss_rate is only simulated on the SIM backend")
        self.world.net.cfg = replace(self.world.net.cfg, loss_rate=float(value))
        return {"loss_rate": float(value)}

    def _handle_command(self, client: _Client, raw: str):
        try:
            cmd = json.loads(raw)
        except json.JSONDecodeError as exc:
            client.push(self._ack(None, False, error=f"unparseable command: {exc}"))
            return
        if not isinstance(cmd, dict):
            client.push(self._ack(None, False, error="command must be an object"))
            return
        cmd_id = cmd.get("id")
        if cmd.get("cmd") == "SNAPSHOT":
            # Read-only; answered immediately, still tick-atomic because
            # commands are only processed between ticks.
            client.push(self._ack(cmd_id, True))
            client.push(self._snapshot_frame())
            return
        try:
            result = self._apply_command(cmd)
        except SimError as exc:
            client.push(self._ack(cmd_id, False, error=str(exc)))
            return
        except Exception as exc:
            client.push(self._ack(cmd_id, False, error=f"{type(exc).__name__}: {exc}"))
            return
        client.push(self._ack(cmd_id, True, result=result))

    # -- connection handling --------------------------------------------------------

    async def _writer(self, client: _Client):
        try:
            while True:
                frame = await client.queue.get()
                if frame is None:
                    break
                await client.connection.send(frame)
        except Exception:
            pass
        finally:
            self._clients.discard(client)
            try:
                await client.connection.close()
            except Exception:
                pass

    async def _handler(self, connection):
        client = _Client(connection)
        client.push(self._snapshot_frame())
        self._clients.add(client)
        client.writer_task = asyncio.create_task(self._writer(client))
        try:
            async for raw in connection:
                self._handle_command(client, raw)
                self._flush()
        except Exception:
            pass
        finally:
            self._drop_client(client)

    # -- main loop ------------------------------------------------------------------

    async def _run_loop(self):
        # Command handlers and this loop share one event loop and never
        # yield mid-tick, so every command lands on a tick boundary.
        loop = asyncio.get_running_loop()
        next_tick = loop.time()
        while not self._closing.is_set():
            tick_s = self.world.params.tick_ms / 1000.0
            now = loop.time()
            if self._running and now >= next_tick:
                self._advance(1)
                next_tick = max(next_tick + tick_s, now)
            elif not self._running:
                next_tick = now + tick_s
            self._flush()
            try:
                await asyncio.wait_for(self._closing.wait(),
                                       timeout=min(tick_s, 0.05))
            except asyncio.TimeoutError:
                pass

    def shutdown(self):
        self._closing.set()

    async def serve(self):
        from websockets.asyncio.server import serve as ws_serve
        async with ws_serve(self._handler, "127.0.0.1", self.port):
            await self._run_loop()
        for client in list(self._clients):
            self._drop_client(client)
        self.world.close()
