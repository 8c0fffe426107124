"""Command line entry points.

Subcommands: run (headless to quiescence), serve (control stream for UIs),
replay (recompute metrics from an event log), validate (scenario lint).
Exit codes: 0 converged/ok, 2 non-converged, 1 usage or config error.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from typing import Optional

from .control import ControlServer
from .errors import ScenarioError, SimError
from .events import EventLog, compute_metrics
from .scenario import load_scenario
from .runner import run_headless

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1; argparse defaults to 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manetsim",
                     description="Agent-based MANET self-organization simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless to quiescence")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.add_argument("--out", default=None,
                       help="directory for events.log, metrics.json, final_state.json")

    p_serve = sub.add_parser("serve", help="serve the control stream for a UI")
    p_serve.add_argument("scenario", help="path to a scenario JSON file")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--autostart", action="store_true",
                         help="begin ticking immediately instead of paused")

    p_replay = sub.add_parser("replay", help="recompute metrics from an event log")
    p_replay.add_argument("log", help="path to an events.log file")

    p_validate = sub.add_parser("validate", help="lint a scenario file")
    p_validate.add_argument("scenario", help="path to a scenario JSON file")

    return parser


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    result = run_headless(scenario, out_dir=args.out, seed=args.seed)
    print(result.summary())
    print(json.dumps(result.metrics.to_dict(), sort_keys=True, indent=2))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _cmd_serve(args) -> int:
    scenario = load_scenario(args.scenario)
    server = ControlServer(scenario, port=args.port, seed=args.seed,
                           autostart=args.autostart)
    print(f"serving {scenario.name} on ws://127.0.0.1:{args.port} "
          f"({'running' if args.autostart else 'paused'})")
    try:
        asyncio.run(server.serve())
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _replay_nodes(events) -> list[dict]:
    """Reconstruct final node records from the log alone.

    Positions come from SPAWN events, roles and affiliations from the last
    ROLE_CHANGE per actor; despawned nodes drop out. Mobility after spawn is
    not recorded per node, so replayed positions are boot positions.
    """
    nodes: dict[int, dict] = {}
    for ev in events:
        kind = ev.kind.value
        if kind == "SPAWN":
            nodes[ev.actor] = {"uid": ev.actor,
                               "kind": ev.detail.get("kind", "agent"),
                               "x": ev.detail.get("x"), "y": ev.detail.get("y"),
                               "role": "UNASSIGNED"}
        elif kind == "DESPAWN":
            nodes.pop(ev.actor, None)
        elif kind == "ROLE_CHANGE" and ev.actor in nodes:
            record = nodes[ev.actor]
            record["role"] = ev.detail.get("to", record["role"])
            if "cluster" in ev.detail:
                record["cluster"] = ev.detail["cluster"]
            if "leader" in ev.detail:
                record["leader"] = ev.detail["leader"]
    return [nodes[uid] for uid in sorted(nodes)]


def _cmd_replay(args) -> int:
    events = EventLog.read_ndjson(args.log)
    nodes = _replay_nodes(events)
    metrics = compute_metrics(events, nodes)
    print(json.dumps(metrics.to_dict(), sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    print(f"{args.scenario}: valid scenario {scenario.name!r} "
          f"({scenario.protocol.value}, {len(scenario.agents)} agents)")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    handlers = {"run": _cmd_run, "serve": _cmd_serve,
                "replay": _cmd_replay, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
