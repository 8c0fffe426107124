"""Agent-based simulator for self-organizing mobile ad-hoc networks.

Autonomous per-node agents exchange datagrams over a simulated or real
loopback-UDP transport while a central management block owns topology,
routing, and authorization. Ships two self-organization protocols (k-hop
clustering and resource-weighted leader selection), a deterministic and a
real-time scheduler, structured event logging, scenario files, a CLI, and
a WebSocket control stream for interactive UIs.
"""
from .agents import (Agent, MobilityPattern, NodeState, ResourceProfile,
                     SchedulerMode, TickReport, World, register_agent_kind)
from .clustering import SOLICIT_TIMEOUT, ClusteringAgent
from .control import ControlServer
from .errors import (AddressInUseError, DecodeError, IdentityError,
                     LifecycleError, ModeError, ParameterError, RoleError,
                     ScenarioError, SimError, SynchronizationError,
                     UnknownAgentError)
from .events import EventKind, EventLog, RunMetrics, SimEvent, compute_metrics
from .leader import (BEACON_ROUNDS, DEFAULT_WEIGHTS, HEARTBEAT_INTERVAL,
                     HEARTBEAT_TIMEOUT, LeaderAgent, elect, resource_score)
from .model import (UNREACHABLE, AgentId, Position, Role, SimParams,
                    TopologySnapshot, bfs_hops, build_adjacency,
                    euclidean_distance, hop_distance)
from .scenario import (BootMode, BootPlan, Protocol, RunBudget, Scenario,
                       bundled_scenario_names, load_bundled, load_scenario,
                       scenario_from_dict)
from .smb import PhaseBarrier, RouteTable, Smb
from .runner import (RunResult, boot_schedule, build_world, run_headless,
                     run_realtime)
from .transport import (MAX_PAYLOAD, Backend, Datagram, NodeAddress,
                        SimNetwork, TransportConfig, UdpNetwork, address_for,
                        make_network)
from .wire import (HeadAdvert, HeadResign, LeaderClaim, LeaderHeartbeat,
                   ProtocolMessage, Resign, ScoreBeacon, Solicit,
                   decode_message, encode_message)

__version__ = "0.1.0"

__all__ = [
    "Agent", "AgentId", "AddressInUseError", "Backend", "BootMode",
    "BootPlan", "BEACON_ROUNDS", "ClusteringAgent", "ControlServer",
    "Datagram",
    "DecodeError", "DEFAULT_WEIGHTS", "EventKind", "EventLog",
    "HEARTBEAT_INTERVAL", "HEARTBEAT_TIMEOUT", "HeadAdvert", "HeadResign",
    "IdentityError", "LeaderAgent", "LeaderClaim", "LeaderHeartbeat",
    "LifecycleError", "MAX_PAYLOAD", "MobilityPattern", "ModeError",
    "NodeAddress", "NodeState", "ParameterError", "PhaseBarrier", "Position",
    "Protocol", "ProtocolMessage", "Resign", "ResourceProfile", "Role",
    "RoleError", "RouteTable", "RunBudget", "RunMetrics", "RunResult",
    "ScenarioError", "Scenario", "SchedulerMode", "ScoreBeacon",
    "SimError", "SimEvent", "SimNetwork", "SimParams", "Smb", "Solicit",
    "SOLICIT_TIMEOUT", "SynchronizationError", "TickReport",
    "TopologySnapshot", "TransportConfig", "UdpNetwork", "UNREACHABLE",
    "UnknownAgentError", "World", "address_for", "boot_schedule",
    "bfs_hops", "build_adjacency", "build_world", "bundled_scenario_names",
    "compute_metrics", "decode_message", "elect", "encode_message",
    "euclidean_distance", "hop_distance", "load_bundled", "load_scenario",
    "make_network", "register_agent_kind", "resource_score",
    "run_headless", "run_realtime", "scenario_from_dict",
]
