"""Run scenarios to quiescence and collect results.

A deterministic run spawns agents per the boot plan, ticks the world, and
stops once every agent is settled and a full quiescence window passes with
no role changes (and, for clustering, no messages at all). Outputs are the
event log, a metrics summary, and a final-state snapshot.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .agents import SchedulerMode, World
from .events import EventKind, EventLog, RunMetrics, compute_metrics
from .scenario import AgentSpec, BootMode, Protocol, Scenario


@dataclass
class RunResult:
    scenario: str
    seed: int
    converged: bool
    ticks: int
    metrics: RunMetrics
    nodes: list[dict]
    world: Optional[World] = None

    def summary(self) -> str:
        state = "converged" if self.converged else "did not converge"
        m = self.metrics
        extras = f"clusters={m.cluster_count} gateways={m.gateway_count}"
        if m.leader_ids:
            extras = "leaders=" + ",".join(str(v) for v in
                                           sorted(m.leader_ids.values()))
        return (f"{self.scenario}: {state} after {self.ticks} ticks; "
                f"nodes={m.node_count} {extras} messages={m.messages_total}")


def boot_schedule(scenario: Scenario) -> list[tuple[int, AgentSpec]]:
    """(tick, spec) pairs sorted by boot time, declaration order preserved."""
    if scenario.boot.mode is BootMode.ALL_AT_ONCE:
        return [(0, spec) for spec in scenario.agents]
    delay = scenario.boot.delay_ticks
    return [(i * delay, spec) for i, spec in enumerate(scenario.agents)]


def build_world(scenario: Scenario,
                mode: SchedulerMode = SchedulerMode.DETERMINISTIC,
                log: Optional[EventLog] = None) -> World:
    return World(scenario.params, mode=mode, transport=scenario.transport,
                 log=log)


def final_node_records(world: World) -> list[dict]:
    records = []
    for uid in sorted(world.agents):
        agent = world.agents[uid]
        record = {"uid": uid, "kind": agent.kind,
                  "x": agent.pos.x, "y": agent.pos.y}
        record.update(agent.state_view())
        records.append(record)
    return records


def _all_settled(world: World) -> bool:
    return all(agent.settled() for agent in world.agents.values())


def _finish(scenario: Scenario, world: World, converged: bool,
            ticks: int, out_dir=None, keep_world: bool = False) -> RunResult:
    nodes = final_node_records(world)
    metrics = compute_metrics(world.log.iter_all(), nodes,
                              edges=world.smb.snapshot.edges,
                              converged=converged)
    result = RunResult(scenario=scenario.name, seed=scenario.params.seed,
                       converged=converged, ticks=ticks, metrics=metrics,
                       nodes=nodes, world=world if keep_world else None)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        world.log.write_ndjson(str(out / "events.log"))
        (out / "metrics.json").write_text(
            json.dumps(metrics.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
        state = {
            "scenario": scenario.name,
            "seed": scenario.params.seed,
            "converged": converged,
            "ticks": ticks,
            "params": {"k": scenario.params.k,
                       "radio_range": scenario.params.radio_range,
                       "world": list(scenario.params.world),
                       "tick_ms": scenario.params.tick_ms},
            "nodes": nodes,
        }
        (out / "final_state.json").write_text(
            json.dumps(state, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if not keep_world:
        world.close()
    return result


def run_headless(scenario: Scenario, out_dir=None,
                 seed: Optional[int] = None,
                 keep_world: bool = False) -> RunResult:
    if seed is not None:
        scenario = scenario.with_seed(seed)
    world = build_world(scenario)
    schedule = boot_schedule(scenario)
    window = scenario.run.quiescence_window
    clustering = scenario.protocol is Protocol.CLUSTERING
    index = 0
    last_activity = 0
    converged = False
    for tick in range(scenario.run.max_ticks):
        while index < len(schedule) and schedule[index][0] <= tick:
            spec = schedule[index][1]
            world.spawn_agent(scenario.agent_kind(spec),
                              scenario.node_state(spec),
                              pattern=spec.mobility)
            index += 1
            last_activity = tick
        report = world.tick()
        active = report.role_changes > 0 or not _all_settled(world)
        if clustering and report.messages_sent > 0:
            active = True
        if active:
            last_activity = tick
        if index == len(schedule) and tick - last_activity >= window:
            converged = True
            break
    return _finish(scenario, world, converged, world.tick_no,
                   out_dir=out_dir, keep_world=keep_world)


def run_realtime(scenario: Scenario, max_wall_s: float = 30.0,
                 out_dir=None, keep_world: bool = False) -> RunResult:
    """Threaded run of the same scenario; stops on quiescence or timeout."""
    world = build_world(scenario, mode=SchedulerMode.REALTIME)
    tick_s = scenario.params.tick_ms / 1000.0
    clustering = scenario.protocol is Protocol.CLUSTERING
    activity = {"at": time.monotonic()}

    def watch(event):
        if event.kind is EventKind.ROLE_CHANGE or \
                (clustering and event.kind is EventKind.MSG_SENT):
            activity["at"] = time.monotonic()

    world.log.subscribe(watch)
    world.start()
    deadline = time.monotonic() + max_wall_s
    converged = False
    ticks = 0
    try:
        for tick, spec in boot_schedule(scenario):
            target = world._t0 + tick * tick_s
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            world.spawn_agent(scenario.agent_kind(spec),
                              scenario.node_state(spec),
                              pattern=spec.mobility)
            activity["at"] = time.monotonic()
        window_s = scenario.run.quiescence_window * tick_s
        while time.monotonic() < deadline:
            time.sleep(tick_s / 2)
            if _all_settled(world) and \
                    time.monotonic() - activity["at"] >= window_s:
                converged = True
                break
    finally:
        ticks = world.event_time() // max(scenario.params.tick_ms, 1)
        world.stop()
        world.log.unsubscribe(watch)
    return _finish(scenario, world, converged, ticks,
                   out_dir=out_dir, keep_world=keep_world)
