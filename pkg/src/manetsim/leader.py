"""Resource-weighted leader selection for a mobile cloud.

Every agent computes a resource score (weighted battery, cpu, memory). On
boot it broadcasts the score for a fixed number of rounds, collects peers'
scores, and elects the maximum (ties to the lower uid). The winner claims
leadership and emits periodic heartbeats; followers beacon their scores to
the leader, which tracks membership with a staleness TTL. Missed heartbeats
trigger re-election. Two live leaders meeting (merged partitions) resolve
via claims: the lower-ranked one resigns and the conflict is logged.
"""
from __future__ import annotations

from typing import Optional

from .agents import Agent, ResourceProfile, register_agent_kind
from .errors import ParameterError, RoleError
from .events import EventKind
from .model import AgentId, Role
from .wire import (LeaderClaim, LeaderHeartbeat, ProtocolMessage, Resign,
                   ScoreBeacon)

DEFAULT_WEIGHTS = (0.5, 0.25, 0.25)  # battery, cpu_free, mem_free
BEACON_ROUNDS = 3
BEACON_INTERVAL = 5     # ticks between follower score beacons
HEARTBEAT_INTERVAL = 5  # ticks between leader heartbeats
HEARTBEAT_TIMEOUT = 15  # silence after which followers re-elect
MEMBER_TTL = 15         # silence after which a leader drops a member
REPLY_WINDOW = 3        # min ticks between replies to the same peer


def resource_score(resources: ResourceProfile,
                   weights: tuple[float, float, float] = DEFAULT_WEIGHTS) -> float:
    if len(weights) != 3 or any(w < 0 for w in weights):
        raise ParameterError(f"weights must be three non-negatives, got {weights!r}")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ParameterError(f"weights must sum to 1, got {sum(weights)}")
    return (weights[0] * resources.battery
            + weights[1] * resources.cpu_free
            + weights[2] * resources.mem_free)


def elect(scores: dict[AgentId, float]) -> AgentId:
    """Winner is the highest score; ties go to the lowest uid."""
    if not scores:
        raise ParameterError("cannot elect from an empty score set")
    return max(sorted(scores), key=lambda uid: (scores[uid], -uid))


@register_agent_kind
class LeaderAgent(Agent):
    kind = "leader"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.my_score = resource_score(self.resources)
        self.leader_id: Optional[AgentId] = None
        self.leader_score: Optional[float] = None
        self.leader_members = 0  # size reported by the leader's heartbeat
        self.members: dict[AgentId, tuple[float, float]] = {}
        self._beacons: dict[AgentId, float] = {}
        self._rounds_left = 0
        self._election_deadline: Optional[float] = None
        self.heartbeat_deadline: Optional[float] = None
        self._last_reply: dict[AgentId, float] = {}
        self._last_beacon_out: Optional[float] = None
        self._last_heartbeat_out: Optional[float] = None

    # -- lifecycle ---------------------------------------------------------

    def on_boot(self):
        self._start_election()

    def reset_protocol(self):
        if self.role is Role.LEADER:
            self._broadcast(Resign(self.uid, self.stamp()))
        self._start_election()

    def resign(self):
        """Voluntarily step down and trigger a fresh election."""
        if self.role is not Role.LEADER:
            raise RoleError(f"agent {self.uid} is not the leader")
        self._broadcast(Resign(self.uid, self.stamp()))
        self._start_election()

    def _start_election(self):
        if self.role is not Role.UNASSIGNED:
            self.set_role(Role.UNASSIGNED, leader=None)
        self.leader_id = None
        self.leader_score = None
        self.members = {}
        self._beacons = {self.uid: self.my_score}
        self._rounds_left = BEACON_ROUNDS
        # One settle tick after the last round lets final replies land.
        self._election_deadline = self.now() + BEACON_ROUNDS + 1
        self.heartbeat_deadline = None

    # -- periodic work -------------------------------------------------------

    def periodic(self):
        now = self.now()
        if self.role is Role.UNASSIGNED:
            if self._rounds_left > 0:
                self._rounds_left -= 1
                self._broadcast(ScoreBeacon(self.uid, self.stamp(),
                                            score=self.my_score))
            elif self._election_deadline is not None and now >= self._election_deadline:
                self._election_deadline = None
                self._finish_election()
        elif self.role is Role.LEADER:
            cutoff = now - MEMBER_TTL
            for uid in [u for u, (_, seen) in self.members.items() if seen < cutoff]:
                del self.members[uid]
            if self._last_heartbeat_out is None or \
                    now - self._last_heartbeat_out >= HEARTBEAT_INTERVAL:
                self._last_heartbeat_out = now
                self._broadcast(LeaderHeartbeat(self.uid, self.stamp(),
                                                member_count=len(self.members)))
        elif self.role is Role.CLIENT:
            if self.heartbeat_deadline is not None and now >= self.heartbeat_deadline:
                self._start_election()
            elif self.leader_id is not None and (
                    self._last_beacon_out is None
                    or now - self._last_beacon_out >= BEACON_INTERVAL):
                self._last_beacon_out = now
                self.send(self.leader_id,
                          ScoreBeacon(self.uid, self.stamp(), score=self.my_score))

    def _broadcast(self, msg: ProtocolMessage):
        routes = self.world.smb.routes
        if not routes.has_node(self.uid):
            return
        for dst in routes.reachable(self.uid):
            self.send(dst, msg)

    def _finish_election(self):
        routes = self.world.smb.routes
        candidates = {u: s for u, s in self._beacons.items()
                      if u == self.uid or
                      (routes.has_node(u) and routes.has_node(self.uid)
                       and routes.authorize(self.uid, u))}
        self._beacons = {}
        winner = elect(candidates)
        now = self.now()
        if winner == self.uid:
            self.leader_id = self.uid
            self.leader_score = self.my_score
            self.members = {u: (s, now) for u, s in candidates.items()
                            if u != self.uid}
            self.set_role(Role.LEADER, leader=self.uid, score=self.my_score)
            self._last_heartbeat_out = now
            self._broadcast(LeaderClaim(self.uid, self.stamp(),
                                        score=self.my_score))
        else:
            self._adopt_leader(winner, candidates[winner])

    def _adopt_leader(self, uid: AgentId, score: Optional[float]):
        self.leader_id = uid
        self.leader_score = score
        self._rounds_left = 0
        self._election_deadline = None
        self.set_role(Role.CLIENT, leader=uid)
        now = self.now()
        self.heartbeat_deadline = now + HEARTBEAT_TIMEOUT
        self._last_beacon_out = now
        self.send(uid, ScoreBeacon(self.uid, self.stamp(), score=self.my_score))

    # -- message handling -------------------------------------------------------

    def on_message(self, src: AgentId, msg: ProtocolMessage):
        if isinstance(msg, ScoreBeacon):
            self._handle_beacon(src, msg.score)
        elif isinstance(msg, LeaderClaim):
            self._handle_claim(src, msg.score)
        elif isinstance(msg, LeaderHeartbeat):
            self._handle_heartbeat(src, msg.member_count)
        elif isinstance(msg, Resign):
            self._handle_resign(src)

    def _handle_beacon(self, src: AgentId, score: float):
        now = self.now()
        if self.role is Role.UNASSIGNED:
            self._beacons[src] = score
        elif self.role is Role.LEADER:
            self.members[src] = (score, now)
            self._maybe_reply(src)
        elif src == self.leader_id:
            self.leader_score = score  # a reply, not an elector: no echo
        else:
            self._maybe_reply(src)

    def _maybe_reply(self, src: AgentId):
        """Answer a peer's beacon so late joiners can collect scores."""
        now = self.now()
        last = self._last_reply.get(src)
        if last is None or now - last >= REPLY_WINDOW:
            self._last_reply[src] = now
            self.send(src, ScoreBeacon(self.uid, self.stamp(),
                                       score=self.my_score))

    def _handle_claim(self, src: AgentId, score: float):
        if src == self.uid:
            return
        if self.role is Role.LEADER:
            if (score, -src) > (self.my_score, -self.uid):
                self.world.emit(EventKind.ELECTION_CONFLICT, self.uid,
                                {"winner": src, "loser": self.uid,
                                 "winner_score": score,
                                 "loser_score": self.my_score})
                self._broadcast(Resign(self.uid, self.stamp()))
                self.members = {}
                self._adopt_leader(src, score)
            else:
                self.send(src, LeaderClaim(self.uid, self.stamp(),
                                           score=self.my_score))
            return
        if self.leader_id is None:
            self._adopt_leader(src, score)
        elif src == self.leader_id:
            self.leader_score = score
            self.heartbeat_deadline = self.now() + HEARTBEAT_TIMEOUT
        else:
            known = -1.0 if self.leader_score is None else self.leader_score
            if (score, -src) > (known, -self.leader_id):
                self._adopt_leader(src, score)

    def _handle_heartbeat(self, src: AgentId, member_count: int):
        if self.role is Role.LEADER:
            if src != self.uid:
                # Merged partitions: provoke claim-based resolution.
                self.send(src, LeaderClaim(self.uid, self.stamp(),
                                           score=self.my_score))
            return
        if self.role is Role.CLIENT:
            if src == self.leader_id:
                self.heartbeat_deadline = self.now() + HEARTBEAT_TIMEOUT
                self.leader_members = member_count
        else:
            # Joining a stable cloud: adopt the incumbent, abort the election.
            self._adopt_leader(src, None)

    def _handle_resign(self, src: AgentId):
        if self.role is Role.UNASSIGNED:
            self._beacons.pop(src, None)
        elif src == self.leader_id:
            self.leader_id = None
            self.leader_score = None
            self._start_election()

    # -- introspection -----------------------------------------------------------

    def membership_report(self) -> list[tuple[AgentId, float, float]]:
        """(uid, score, last_seen) per member; leaders only."""
        if self.role is not Role.LEADER:
            raise RoleError(f"agent {self.uid} is not the leader")
        return [(uid, score, seen)
                for uid, (score, seen) in sorted(self.members.items())]

    def settled(self) -> bool:
        return self.role in (Role.LEADER, Role.CLIENT)

    def state_view(self) -> dict:
        view = {"role": self.role.value, "leader": self.leader_id,
                "score": self.my_score}
        if self.role is Role.LEADER:
            view["members"] = len(self.members)
        return view
