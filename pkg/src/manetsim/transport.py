"""Datagram messaging between agents.

Two interchangeable backends with UDP semantics (best-effort, unordered
across peers, no delivery guarantee):

* SIM  -- an in-process channel with per-destination queues. Lossless and
  per-(src, dst) FIFO by default, optionally dropping a seeded random
  fraction of messages. Fully deterministic given the same send sequence.
* UDP  -- real datagrams on the loopback interface, one socket per agent.

Addresses derive from agent uids: port = base_port + uid, so knowing a
peer's uid is enough to reach it.
"""
from __future__ import annotations

import random
import socket
import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .errors import AddressInUseError, LifecycleError, ParameterError
from .model import AgentId

LOOPBACK_HOST = "127.0.0.1"
DEFAULT_BASE_PORT = 20000
# IPv4 UDP payload ceiling; also keeps payloads within the 64 KiB envelope.
MAX_PAYLOAD = 65507


class Backend(Enum):
    SIM = "SIM"
    UDP = "UDP"


@dataclass(frozen=True)
class NodeAddress:
    host: str
    port: int


@dataclass(frozen=True)
class Datagram:
    src: AgentId
    dst: AgentId
    payload: bytes
    enqueued_at: float


@dataclass(frozen=True)
class TransportConfig:
    backend: Backend = Backend.SIM
    base_port: int = DEFAULT_BASE_PORT
    loss_rate: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.loss_rate <= 1.0):
            raise ParameterError(f"loss_rate must be in [0,1], got {self.loss_rate}")
        if self.base_port < 1024:
            raise ParameterError(f"base_port must be >= 1024, got {self.base_port}")


def address_for(uid: AgentId, cfg: TransportConfig) -> NodeAddress:
    """Deterministic uid -> address mapping (injective for valid uids)."""
    if uid < 0:
        raise ParameterError(f"uid must be non-negative, got {uid}")
    port = cfg.base_port + uid
    if port > 65535:
        raise ParameterError(f"port {port} for uid {uid} exceeds 65535")
    return NodeAddress(LOOPBACK_HOST, port)


class Endpoint:
    """One agent's receive queue plus its send handle."""

    def __init__(self, uid: AgentId, address: NodeAddress):
        self.uid = uid
        self.address = address
        self.closed = False

    def send(self, dst: AgentId, payload: bytes) -> bool:
        raise NotImplementedError

    def poll(self, limit: Optional[int] = None) -> list[Datagram]:
        """Remove and return queued datagrams, oldest first.

        With ``limit``, at most that many are taken; the rest stay queued.
        """
        raise NotImplementedError

    def close(self):
        self.closed = True

    def _check_open(self):
        if self.closed:
            raise LifecycleError(f"endpoint {self.uid} is closed")


def _check_payload(payload: bytes):
    if len(payload) > MAX_PAYLOAD:
        raise ParameterError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")


class SimEndpoint(Endpoint):
    def __init__(self, uid, address, network: "SimNetwork"):
        super().__init__(uid, address)
        self._network = network

    def send(self, dst: AgentId, payload: bytes) -> bool:
        self._check_open()
        _check_payload(payload)
        return self._network._deliver(self.uid, dst, payload)

    def poll(self, limit: Optional[int] = None) -> list[Datagram]:
        self._check_open()
        return self._network._drain(self.uid, limit)

    def close(self):
        if not self.closed:
            self._network._unbind(self.uid)
        super().close()


class SimNetwork:
    """In-process loopback channel. Thread-safe; one queue per bound uid."""

    def __init__(self, cfg: TransportConfig, loss_rng: Optional[random.Random] = None,
                 clock: Callable[[], float] = lambda: 0.0):
        self.cfg = cfg
        self._queues: dict[AgentId, deque[Datagram]] = {}
        self._lock = threading.Lock()
        self._loss_rng = loss_rng or random.Random(0)
        self._clock = clock

    def bind(self, uid: AgentId) -> SimEndpoint:
        address = address_for(uid, self.cfg)
        with self._lock:
            if uid in self._queues:
                raise AddressInUseError(f"uid {uid} already bound")
            self._queues[uid] = deque()
        return SimEndpoint(uid, address, self)

    def _unbind(self, uid: AgentId):
        with self._lock:
            self._queues.pop(uid, None)

    def _deliver(self, src: AgentId, dst: AgentId, payload: bytes) -> bool:
        # Loss is decided per send so the RNG stream is reproducible.
        if self.cfg.loss_rate > 0 and self._loss_rng.random() < self.cfg.loss_rate:
            return False
        with self._lock:
            queue = self._queues.get(dst)
            if queue is None:
                return False  # unknown destination: dropped, UDP semantics
            queue.append(Datagram(src, dst, payload, self._clock()))
        return True

    def _drain(self, uid: AgentId, limit: Optional[int] = None) -> list[Datagram]:
        with self._lock:
            queue = self._queues.get(uid)
            if queue is None:
                return []
            if limit is None or limit >= len(queue):
                out = list(queue)
                queue.clear()
            else:
                out = [queue.popleft() for _ in range(limit)]
        return out

    def close(self):
        with self._lock:
            self._queues.clear()


class UdpEndpoint(Endpoint):
    def __init__(self, uid, address, sock: socket.socket, network: "UdpNetwork"):
        super().__init__(uid, address)
        self._sock = sock
        self._network = network

    def send(self, dst: AgentId, payload: bytes) -> bool:
        self._check_open()
        _check_payload(payload)
        addr = address_for(dst, self._network.cfg)
        try:
            self._sock.sendto(payload, (addr.host, addr.port))
        except OSError:
            return False
        return True

    def poll(self, limit: Optional[int] = None) -> list[Datagram]:
        self._check_open()
        out: list[Datagram] = []
        base = self._network.cfg.base_port
        now = self._network._clock()
        while limit is None or len(out) < limit:
            try:
                data, (_, port) = self._sock.recvfrom(MAX_PAYLOAD + 1)
            except BlockingIOError:
                break
            except OSError:
                break
            out.append(Datagram(port - base, self.uid, data, now))
        return out

    def close(self):
        if not self.closed:
            self._network._unbind(self.uid)
            self._sock.close()
        super().close()


class UdpNetwork:
    """Loopback UDP backend: one real socket per agent."""

    def __init__(self, cfg: TransportConfig, clock: Callable[[], float] = lambda: 0.0):
        self.cfg = cfg
        self._bound: set[AgentId] = set()
        self._lock = threading.Lock()
        self._clock = clock

    def bind(self, uid: AgentId) -> UdpEndpoint:
        address = address_for(uid, self.cfg)
        with self._lock:
            if uid in self._bound:
                raise AddressInUseError(f"uid {uid} already bound")
            sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            try:
                sock.bind((address.host, address.port))
            except OSError as exc:
                sock.close()
                raise AddressInUseError(f"uid {uid}: {exc}") from exc
            sock.setblocking(False)
            try:
                sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, 1 << 20)
            except OSError:
                pass
            self._bound.add(uid)
        return UdpEndpoint(uid, address, sock, self)

    def _unbind(self, uid: AgentId):
        with self._lock:
            self._bound.discard(uid)

    def close(self):
        pass


def make_network(cfg: TransportConfig, loss_rng: Optional[random.Random] = None,
                 clock: Callable[[], float] = lambda: 0.0):
    if cfg.backend is Backend.SIM:
        return SimNetwork(cfg, loss_rng=loss_rng, clock=clock)
    return UdpNetwork(cfg, clock=clock)
