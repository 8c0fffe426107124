"""k-hop clustering protocol.

Nodes boot unassigned, solicit their neighbors, and wait a fixed window for
head advertisements. A node that learns of zero heads within k hops assumes
the HEAD role and floods a TTL-limited advert; exactly one known head makes
it a MEMBER, two or more make it a GATEWAY. Heads never demote on new
information; they step down only through protocol reset or removal.

Advert hop counts carry the flood TTL, but stored head distances always come
from the management block, so stale gossip cannot leave a node affiliated
with a dead or out-of-range head. The boot-time flood only covers the graph
as it was; when topology changes, each head re-adverts directly to nodes
whose hop distance to it newly entered or shrank within the k budget, so
late arrivals and shortcut paths still learn every head in range.
"""
from __future__ import annotations

from typing import Optional

from .agents import Agent, register_agent_kind
from .events import EventKind
from .model import UNREACHABLE, AgentId, Role
from .smb import RouteTable
from .wire import HeadAdvert, HeadResign, ProtocolMessage, Solicit

SOLICIT_TIMEOUT = 5  # ticks an unassigned node waits for adverts


@register_agent_kind
class ClusteringAgent(Agent):
    kind = "clustering"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Message handlers can run before on_boot; state must already exist.
        self.known_heads: dict[AgentId, int] = {}
        self.my_head: Optional[AgentId] = None
        self.cluster_id: Optional[AgentId] = None
        self.solicit_deadline: Optional[float] = None
        self._last_neighbors: set[AgentId] = set()
        self._ball: dict[AgentId, int] = {}  # as head: who is within k, at what hops

    # -- lifecycle ---------------------------------------------------------

    def on_boot(self):
        self._begin_discovery()

    def reset_protocol(self):
        if self.role is Role.HEAD:
            for nbr in sorted(self._last_neighbors):
                self.send(nbr, HeadResign(self.uid, self.stamp(),
                                          head_id=self.uid))
        self.set_role(Role.UNASSIGNED, cluster=None)
        self._begin_discovery()

    def _begin_discovery(self):
        self.known_heads = {}
        self.my_head = None
        self.cluster_id = None
        self._ball = {}
        routes = self.world.smb.routes
        self._last_neighbors = set(routes.neighbors(self.uid)) \
            if routes.has_node(self.uid) else set()
        for nbr in sorted(self._last_neighbors):
            self.send(nbr, Solicit(self.uid, self.stamp()))
        self.solicit_deadline = self.now() + SOLICIT_TIMEOUT

    # -- message handling ----------------------------------------------------

    def on_message(self, src: AgentId, msg: ProtocolMessage):
        if isinstance(msg, Solicit):
            self._answer_solicit(src)
        elif isinstance(msg, HeadAdvert):
            self._handle_advert(src, msg)
        elif isinstance(msg, HeadResign):
            self._handle_resign(msg.head_id)

    def _answer_solicit(self, src: AgentId):
        k = self.world.params.k
        for head, dist in sorted(self.known_heads.items()):
            if dist + 1 <= k:
                self.send(src, HeadAdvert(self.uid, self.stamp(),
                                          head_id=head, hops_so_far=dist + 1))

    def _handle_advert(self, src: AgentId, msg: HeadAdvert):
        k = self.world.params.k
        if msg.hops_so_far < 0 or msg.hops_so_far > k:
            self.world.emit(EventKind.PROTOCOL_VIOLATION, self.uid,
                            {"from": src, "reason": "advert hops out of range",
                             "head": msg.head_id, "hops": msg.hops_so_far})
            return
        head = msg.head_id
        if head == self.uid:
            return
        routes = self.world.smb.routes
        if not routes.has_node(head) or not routes.has_node(self.uid):
            return  # stale: the advertised head no longer exists
        true_dist = routes.hops(self.uid, head)
        if true_dist is UNREACHABLE or true_dist > k:
            return
        current = self.known_heads.get(head)
        if current is not None and true_dist >= current:
            return
        self.known_heads[head] = true_dist
        if msg.hops_so_far < k:
            forwarded = HeadAdvert(self.uid, self.stamp(), head_id=head,
                                   hops_so_far=msg.hops_so_far + 1)
            for nbr in sorted(routes.neighbors(self.uid)):
                if nbr != src:
                    self.send(nbr, forwarded)
        self._on_head_set_changed()

    def _handle_resign(self, head: AgentId):
        if self.known_heads.pop(head, None) is None:
            return
        if self.role is Role.HEAD:
            return
        self._on_head_set_changed()

    def _on_head_set_changed(self):
        if self.role is Role.HEAD:
            return
        if self.solicit_deadline is not None:
            return  # window still open; classify when it closes
        if self.known_heads:
            self._classify()
        else:
            self._restart_discovery()

    # -- classification -------------------------------------------------------

    def periodic(self):
        if self.solicit_deadline is not None and self.now() >= self.solicit_deadline:
            self.solicit_deadline = None
            if self.known_heads:
                self._classify()
            else:
                self._assume_head()

    def _classify(self):
        heads = self.known_heads
        if self.role is Role.HEAD or not heads:
            return
        nearest = min(heads, key=lambda h: (heads[h], h))
        self.my_head = nearest
        self.cluster_id = nearest
        if len(heads) == 1:
            self.set_role(Role.MEMBER, cluster=nearest, head=nearest)
        else:
            self.set_role(Role.GATEWAY, cluster=nearest, head=nearest)

    def _assume_head(self):
        self.my_head = None
        self.cluster_id = self.uid
        self.known_heads[self.uid] = 0
        self.set_role(Role.HEAD, cluster=self.uid)
        routes = self.world.smb.routes
        if routes.has_node(self.uid):
            for nbr in sorted(routes.neighbors(self.uid)):
                self.send(nbr, HeadAdvert(self.uid, self.stamp(),
                                          head_id=self.uid, hops_so_far=1))
            # The flood above covers this ball; diffs start from here.
            self._ball = self._hop_ball(routes)

    def _restart_discovery(self):
        self.set_role(Role.UNASSIGNED, cluster=None)
        self._begin_discovery()

    # -- topology reaction ------------------------------------------------------

    def on_topology_change(self, routes: RouteTable):
        if not routes.has_node(self.uid):
            return
        k = self.world.params.k
        changed = False
        for head in list(self.known_heads):
            if head == self.uid:
                continue
            if not routes.has_node(head):
                del self.known_heads[head]
                changed = True
                continue
            dist = routes.hops(self.uid, head)
            if dist is UNREACHABLE or dist > k:
                del self.known_heads[head]
                changed = True
            elif dist != self.known_heads[head]:
                self.known_heads[head] = dist
                changed = True
        neighbors = set(routes.neighbors(self.uid))
        for nbr in sorted(neighbors - self._last_neighbors):
            self.send(nbr, Solicit(self.uid, self.stamp()))
        self._last_neighbors = neighbors
        if self.role is Role.HEAD:
            self._readvertise(routes)
        if changed:
            self._on_head_set_changed()

    def _hop_ball(self, routes: RouteTable) -> dict[AgentId, int]:
        k = self.world.params.k
        ball = {}
        for node in routes.reachable(self.uid):
            dist = routes.hops(node, self.uid)
            if dist is not UNREACHABLE and dist <= k:
                ball[node] = dist
        return ball

    def _readvertise(self, routes: RouteTable):
        """Tell nodes that newly fit (or moved closer within) the k budget."""
        fresh = self._hop_ball(routes)
        for node, dist in fresh.items():
            previous = self._ball.get(node)
            if previous is None or dist < previous:
                self.send(node, HeadAdvert(self.uid, self.stamp(),
                                           head_id=self.uid, hops_so_far=dist))
        self._ball = fresh

    # -- introspection -----------------------------------------------------------

    def settled(self) -> bool:
        return self.role is not Role.UNASSIGNED and self.solicit_deadline is None

    def state_view(self) -> dict:
        return {"role": self.role.value, "cluster": self.cluster_id,
                "head": self.my_head}
