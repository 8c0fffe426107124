"""Scenario files: the machine-readable form of the simulation settings.

A scenario is a JSON document (schema version 1) naming the protocol, the
world parameters, the transport, the boot plan, the run budget, and the
agent population. Validation reports every problem with its field path in
one error rather than stopping at the first.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Optional, Union

from .agents import MobilityPattern, NodeState, ResourceProfile
from .errors import ScenarioError
from .model import Position, SimParams
from .transport import Backend, TransportConfig

SCHEMA_VERSION = 1


class Protocol(Enum):
    CLUSTERING = "CLUSTERING"
    LEADER = "LEADER"


class BootMode(Enum):
    SEQUENTIAL = "SEQUENTIAL"
    ALL_AT_ONCE = "ALL_AT_ONCE"


PROTOCOL_KINDS = {Protocol.CLUSTERING: "clustering", Protocol.LEADER: "leader"}


@dataclass(frozen=True)
class BootPlan:
    mode: BootMode = BootMode.SEQUENTIAL
    delay_ticks: int = 10


@dataclass(frozen=True)
class RunBudget:
    max_ticks: int = 2000
    quiescence_window: int = 8


@dataclass(frozen=True)
class AgentSpec:
    uid: int
    pos: Optional[Position]  # None means drawn from the run seed
    vel: tuple[float, float] = (0.0, 0.0)
    mobility: MobilityPattern = MobilityPattern.STATIC
    resources: ResourceProfile = field(default_factory=ResourceProfile)
    kind: Optional[str] = None  # defaults from the scenario protocol


@dataclass(frozen=True)
class Scenario:
    name: str
    protocol: Protocol
    params: SimParams
    agents: tuple[AgentSpec, ...]
    boot: BootPlan = BootPlan()
    transport: TransportConfig = TransportConfig()
    run: RunBudget = RunBudget()

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, params=replace(self.params, seed=seed))

    def agent_kind(self, spec: AgentSpec) -> str:
        return spec.kind or PROTOCOL_KINDS[self.protocol]

    def resolved_position(self, spec: AgentSpec) -> Position:
        """Fixed position, or one drawn deterministically from the seed."""
        if spec.pos is not None:
            return spec.pos
        rng = random.Random(f"{self.params.seed}/pos/{spec.uid}")
        w, h = self.params.world
        return Position(rng.uniform(0.0, w), rng.uniform(0.0, h))

    def node_state(self, spec: AgentSpec) -> NodeState:
        return NodeState(id=spec.uid, pos=self.resolved_position(spec),
                         vel=spec.vel, resources=spec.resources)


def _number(issues, value, path, default=None, minimum=None, maximum=None):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        issues.append(f"{path}: expected a number, got {value!r}")
        return default
    if minimum is not None and value < minimum:
        issues.append(f"{path}: must be >= {minimum}, got {value}")
        return default
    if maximum is not None and value > maximum:
        issues.append(f"{path}: must be <= {maximum}, got {value}")
        return default
    return value


def _integer(issues, value, path, minimum=None):
    if not isinstance(value, int) or isinstance(value, bool):
        issues.append(f"{path}: expected an integer, got {value!r}")
        return None
    if minimum is not None and value < minimum:
        issues.append(f"{path}: must be >= {minimum}, got {value}")
        return None
    return value


def _enum(issues, cls, value, path):
    try:
        return cls(value)
    except (ValueError, TypeError):
        names = [m.value for m in cls]
        issues.append(f"{path}: expected one of {names}, got {value!r}")
        return None


def scenario_from_dict(data: dict, name_hint: str = "unnamed") -> Scenario:
    issues: list[str] = []
    if not isinstance(data, dict):
        raise ScenarioError(["document: expected a JSON object"])

    if data.get("schema") != SCHEMA_VERSION:
        issues.append(f"schema: expected {SCHEMA_VERSION}, got {data.get('schema')!r}")

    name = data.get("name", name_hint)
    if not isinstance(name, str) or not name:
        issues.append(f"name: expected a non-empty string, got {name!r}")
        name = name_hint

    protocol = _enum(issues, Protocol, data.get("protocol"), "protocol")

    raw_params = data.get("params", {})
    params = SimParams()
    if not isinstance(raw_params, dict):
        issues.append(f"params: expected an object, got {raw_params!r}")
    else:
        if protocol is Protocol.CLUSTERING and "k" not in raw_params:
            issues.append("params.k: required for clustering scenarios")
        k = _integer(issues, raw_params.get("k", 2), "params.k", minimum=1) or 2
        rr = _number(issues, raw_params.get("radio_range", 25.0),
                     "params.radio_range", default=25.0)
        if rr is not None and rr <= 0:
            issues.append(f"params.radio_range: must be > 0, got {rr}")
            rr = 25.0
        world = raw_params.get("world", [100.0, 100.0])
        if (not isinstance(world, (list, tuple)) or len(world) != 2
                or any(not isinstance(v, (int, float)) or isinstance(v, bool)
                       or v <= 0 for v in world)):
            issues.append(f"params.world: expected [width>0, height>0], got {world!r}")
            world = [100.0, 100.0]
        seed = _integer(issues, raw_params.get("seed", 0), "params.seed")
        tick_ms = _integer(issues, raw_params.get("tick_ms", 100),
                           "params.tick_ms", minimum=1) or 100
        known = {"k", "radio_range", "world", "seed", "tick_ms"}
        for extra in sorted(set(raw_params) - known):
            issues.append(f"params.{extra}: unknown parameter")
        params = SimParams(k=k, radio_range=float(rr),
                           world=(float(world[0]), float(world[1])),
                           seed=seed if seed is not None else 0,
                           tick_ms=tick_ms)

    raw_transport = data.get("transport", {})
    transport = TransportConfig()
    if not isinstance(raw_transport, dict):
        issues.append(f"transport: expected an object, got {raw_transport!r}")
    else:
        backend = _enum(issues, Backend, raw_transport.get("backend", "SIM"),
                        "transport.backend") or Backend.SIM
        base_port = _integer(issues, raw_transport.get("base_port", 20000),
                             "transport.base_port", minimum=1024) or 20000
        loss = _number(issues, raw_transport.get("loss_rate", 0.0),
                       "transport.loss_rate", default=0.0, minimum=0.0, maximum=1.0)
        loss = 0.0 if loss is None else float(loss)
        if backend is Backend.UDP and loss > 0:
            issues.append("transport.loss_rate: simulated loss requires the SIM backend")
            loss = 0.0
        transport = TransportConfig(backend=backend, base_port=base_port,
                                    loss_rate=loss)

    raw_boot = data.get("boot", {})
    boot = BootPlan()
    if not isinstance(raw_boot, dict):
        issues.append(f"boot: expected an object, got {raw_boot!r}")
    else:
        mode = _enum(issues, BootMode, raw_boot.get("mode", "SEQUENTIAL"),
                     "boot.mode") or BootMode.SEQUENTIAL
        delay = _integer(issues, raw_boot.get("delay_ticks", 10),
                         "boot.delay_ticks", minimum=0)
        boot = BootPlan(mode=mode, delay_ticks=10 if delay is None else delay)

    raw_run = data.get("run", {})
    run = RunBudget()
    if not isinstance(raw_run, dict):
        issues.append(f"run: expected an object, got {raw_run!r}")
    else:
        max_ticks = _integer(issues, raw_run.get("max_ticks", 2000),
                             "run.max_ticks", minimum=1) or 2000
        window = _integer(issues, raw_run.get("quiescence_window", 8),
                          "run.quiescence_window", minimum=1) or 8
        run = RunBudget(max_ticks=max_ticks, quiescence_window=window)

    agents: list[AgentSpec] = []
    raw_agents = data.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        issues.append("agents: expected a non-empty list")
        raw_agents = []
    seen_uids: dict[int, int] = {}
    for i, raw in enumerate(raw_agents):
        path = f"agents[{i}]"
        if not isinstance(raw, dict):
            issues.append(f"{path}: expected an object, got {raw!r}")
            continue
        uid = _integer(issues, raw.get("uid"), f"{path}.uid", minimum=0)
        if uid is not None:
            if uid in seen_uids:
                issues.append(f"{path}.uid: duplicate uid {uid}, first used at "
                              f"agents[{seen_uids[uid]}]")
            else:
                seen_uids[uid] = i

        pos: Optional[Position] = None
        raw_pos = raw.get("pos", "RANDOM")
        if isinstance(raw_pos, str):
            if raw_pos.upper() != "RANDOM":
                issues.append(f"{path}.pos: expected [x, y] or \"RANDOM\", got {raw_pos!r}")
        elif (isinstance(raw_pos, (list, tuple)) and len(raw_pos) == 2
              and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                      for v in raw_pos)):
            pos = Position(float(raw_pos[0]), float(raw_pos[1]))
            if not params.in_world(pos):
                issues.append(f"{path}.pos: {list(raw_pos)} outside world "
                              f"{list(params.world)}")
        else:
            issues.append(f"{path}.pos: expected [x, y] or \"RANDOM\", got {raw_pos!r}")

        raw_vel = raw.get("vel", [0.0, 0.0])
        vel = (0.0, 0.0)
        if (isinstance(raw_vel, (list, tuple)) and len(raw_vel) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                        for v in raw_vel)):
            vel = (float(raw_vel[0]), float(raw_vel[1]))
        else:
            issues.append(f"{path}.vel: expected [vx, vy], got {raw_vel!r}")

        mobility = _enum(issues, MobilityPattern, raw.get("mobility", "STATIC"),
                         f"{path}.mobility") or MobilityPattern.STATIC

        raw_res = raw.get("resources", [1.0, 1.0, 1.0])
        resources = ResourceProfile()
        if (isinstance(raw_res, (list, tuple)) and len(raw_res) == 3
                and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                        and 0.0 <= v <= 1.0 for v in raw_res)):
            resources = ResourceProfile(float(raw_res[0]), float(raw_res[1]),
                                        float(raw_res[2]))
        else:
            issues.append(f"{path}.resources: expected three numbers in [0,1], "
                          f"got {raw_res!r}")

        kind = raw.get("kind")
        if kind is not None and not isinstance(kind, str):
            issues.append(f"{path}.kind: expected a string, got {kind!r}")
            kind = None

        if uid is not None:
            agents.append(AgentSpec(uid=uid, pos=pos, vel=vel, mobility=mobility,
                                    resources=resources, kind=kind))

    if agents:
        top_port = transport.base_port + max(a.uid for a in agents)
        if top_port > 65535:
            issues.append(f"transport.base_port: port {top_port} for the highest "
                          f"uid exceeds 65535")

    if issues:
        raise ScenarioError(issues)
    assert protocol is not None
    return Scenario(name=name, protocol=protocol, params=params,
                    agents=tuple(agents), boot=boot, transport=transport, run=run)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ScenarioError([f"file: {path} does not exist"])
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            [f"file: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    return scenario_from_dict(data, name_hint=path.stem)


def bundled_scenario_names() -> list[str]:
    root = importlib_resources.files("manetsim") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Scenario:
    root = importlib_resources.files("manetsim") / "scenarios"
    candidate = root / f"{name}.json"
    if not candidate.is_file():
        raise ScenarioError(
            [f"name: no bundled scenario {name!r}; available: "
             f"{', '.join(bundled_scenario_names())}"])
    data = json.loads(candidate.read_text(encoding="utf-8"))
    return scenario_from_dict(data, name_hint=name)
