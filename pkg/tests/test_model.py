"""Geometry, adjacency, and hop-distance primitives."""
from __future__ import annotations

import math
import random

import pytest

from manetsim import (
    ParameterError,
    Position,
    SimParams,
    UNREACHABLE,
    UnknownAgentError,
    bfs_hops,
    build_adjacency,
    euclidean_distance,
    hop_distance,
)
from oracles import oracle_adjacency, oracle_bfs_levels, oracle_floyd_warshall


class TestDistance:
    def test_pythagorean_triple(self):
        assert euclidean_distance(Position(0, 0), Position(3, 4)) == 5.0

    def test_zero(self):
        assert euclidean_distance(Position(7.5, -2), Position(7.5, -2)) == 0.0

    def test_symmetry_on_random_points(self):
        rng = random.Random(101)
        for _ in range(200):
            a = Position(rng.uniform(-50, 50), rng.uniform(-50, 50))
            b = Position(rng.uniform(-50, 50), rng.uniform(-50, 50))
            assert euclidean_distance(a, b) == euclidean_distance(b, a)

    def test_matches_hypot(self):
        rng = random.Random(102)
        for _ in range(200):
            a = Position(rng.uniform(0, 100), rng.uniform(0, 100))
            b = Position(rng.uniform(0, 100), rng.uniform(0, 100))
            assert euclidean_distance(a, b) == pytest.approx(
                math.hypot(a.x - b.x, a.y - b.y), abs=1e-12)


class TestSimParams:
    def test_defaults(self):
        p = SimParams()
        assert (p.k, p.radio_range, p.world, p.seed, p.tick_ms) == (
            2, 25.0, (100.0, 100.0), 0, 100)

    @pytest.mark.parametrize("kwargs", [
        {"k": 0},
        {"k": -3},
        {"radio_range": 0.0},
        {"radio_range": -1.0},
        {"world": (0.0, 100.0)},
        {"world": (100.0, -5.0)},
        {"tick_ms": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ParameterError):
            SimParams(**kwargs)

    def test_in_world_boundary_inclusive(self):
        p = SimParams(world=(100.0, 60.0))
        assert p.in_world(Position(0, 0))
        assert p.in_world(Position(100, 60))
        assert not p.in_world(Position(100.0001, 30))
        assert not p.in_world(Position(50, -0.0001))


class TestAdjacency:
    def test_boundary_inclusive(self):
        # (0,0)-(3,4) is exactly 5 apart: the link exists at range 5.
        snap = build_adjacency({1: Position(0, 0), 2: Position(3, 4)}, 5.0)
        assert snap.edges == frozenset({(1, 2)})
        assert snap.neighbors(1) == (2,)
        snap = build_adjacency({1: Position(0, 0), 2: Position(3, 4)}, 4.999)
        assert snap.edges == frozenset()
        assert snap.neighbors(1) == ()

    def test_no_self_edges(self):
        snap = build_adjacency({5: Position(1, 1)}, 10.0)
        assert snap.edges == frozenset()
        assert snap.neighbors(5) == ()

    def test_edges_stored_low_high(self):
        snap = build_adjacency(
            {9: Position(0, 0), 2: Position(1, 0), 4: Position(2, 0)}, 1.5)
        assert snap.edges == frozenset({(2, 9), (2, 4)})

    def test_rejects_nonpositive_range(self):
        with pytest.raises(ParameterError):
            build_adjacency({1: Position(0, 0)}, 0.0)

    def test_unknown_node_neighbors(self):
        snap = build_adjacency({1: Position(0, 0)}, 5.0)
        with pytest.raises(UnknownAgentError):
            snap.neighbors(99)

    def test_matches_exact_rational_oracle(self):
        rng = random.Random(7)
        for trial in range(40):
            n = rng.randint(2, 30)
            r = rng.choice([5.0, 12.5, 20.0, 30.0])
            positions = {uid: Position(rng.uniform(0, 100), rng.uniform(0, 100))
                         for uid in range(n)}
            snap = build_adjacency(positions, r)
            expected = oracle_adjacency(positions, r)
            for uid in positions:
                assert list(snap.neighbors(uid)) == expected[uid], (
                    f"trial {trial}, node {uid}")


def _random_snapshot(rng, n, r=25.0):
    positions = {uid: Position(rng.uniform(0, 100), rng.uniform(0, 100))
                 for uid in range(n)}
    return build_adjacency(positions, r)


class TestHopDistance:
    def test_line_graph(self):
        # 0 - 1 - 2 - 3 spaced 10 apart, range 10: hops equal index gaps.
        positions = {i: Position(10.0 * i, 0.0) for i in range(4)}
        snap = build_adjacency(positions, 10.0)
        assert hop_distance(snap, 0, 0) == 0
        assert hop_distance(snap, 0, 1) == 1
        assert hop_distance(snap, 0, 3) == 3
        assert hop_distance(snap, 3, 0) == 3

    def test_partition_is_unreachable(self):
        positions = {0: Position(0, 0), 1: Position(5, 0), 2: Position(90, 90)}
        snap = build_adjacency(positions, 10.0)
        assert hop_distance(snap, 0, 2) is UNREACHABLE
        assert not hop_distance(snap, 0, 2)  # falsy sentinel
        assert hop_distance(snap, 0, 1) == 1

    def test_unknown_node_raises(self):
        snap = _random_snapshot(random.Random(1), 5)
        with pytest.raises(UnknownAgentError):
            hop_distance(snap, 0, 17)
        with pytest.raises(UnknownAgentError):
            bfs_hops(snap, 17)

    def test_matches_floyd_warshall_on_random_graphs(self):
        rng = random.Random(13)
        for trial in range(50):
            n = rng.randint(2, 28)
            snap = _random_snapshot(rng, n, r=rng.choice([15.0, 25.0, 40.0]))
            adj = {u: list(snap.neighbors(u)) for u in snap.positions}
            table = oracle_floyd_warshall(adj)
            for a in snap.positions:
                for b in snap.positions:
                    got = hop_distance(snap, a, b)
                    want = table.get((a, b))
                    if want is None:
                        assert got is UNREACHABLE, f"trial {trial} {a}->{b}"
                    else:
                        assert got == want, f"trial {trial} {a}->{b}"

    def test_bfs_hops_matches_level_oracle(self):
        rng = random.Random(29)
        for _ in range(25):
            snap = _random_snapshot(rng, rng.randint(1, 25))
            adj = {u: list(snap.neighbors(u)) for u in snap.positions}
            for src in snap.positions:
                assert bfs_hops(snap, src) == oracle_bfs_levels(adj, src)
