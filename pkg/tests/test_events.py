"""Event log, serialization, and run metrics."""
from __future__ import annotations

import json
import threading

import pytest

from manetsim import (
    EventKind,
    EventLog,
    ParameterError,
    SimEvent,
    compute_metrics,
)


def emit_n(log, n, kind=EventKind.MSG_SENT):
    for i in range(n):
        log.emit(i, kind, i % 3, {"i": i})


class TestEventLog:
    def test_sequence_starts_at_zero_and_is_gapless(self):
        log = EventLog()
        emit_n(log, 10)
        assert [ev.seq for ev in log.iter_all()] == list(range(10))
        assert log.last_seq == 9
        assert len(log) == 10

    def test_empty_log(self):
        log = EventLog()
        assert len(log) == 0
        assert log.last_seq == -1
        assert list(log.iter_all()) == []
        assert log.tail(5) == []

    def test_tail(self):
        log = EventLog()
        emit_n(log, 7)
        assert [ev.seq for ev in log.tail(3)] == [4, 5, 6]
        assert log.tail(0) == []

    def test_emit_returns_the_event(self):
        log = EventLog()
        ev = log.emit(42, EventKind.SPAWN, 7, {"x": 1.0, "y": 2.0})
        assert (ev.seq, ev.time, ev.kind, ev.actor) == (0, 42, EventKind.SPAWN, 7)
        assert ev.detail == {"x": 1.0, "y": 2.0}

    def test_subscribers_see_every_event_in_order(self):
        log = EventLog()
        seen = []
        log.subscribe(seen.append)
        emit_n(log, 5)
        assert [ev.seq for ev in seen] == [0, 1, 2, 3, 4]
        log.unsubscribe(seen.append)
        emit_n(log, 1)
        assert len(seen) == 5

    def test_spill_to_disk_preserves_everything(self, tmp_path):
        spill = tmp_path / "spill.ndjson"
        log = EventLog(spill_path=str(spill), memory_limit=100)
        emit_n(log, 1000)
        assert len(log) == 1000
        assert spill.exists()
        events = list(log.iter_all())
        assert [ev.seq for ev in events] == list(range(1000))
        assert events[0].detail == {"i": 0}

    def test_write_then_read_ndjson_round_trip(self, tmp_path):
        log = EventLog()
        log.emit(0, EventKind.SPAWN, 1, {"x": 0.5, "y": 1.5, "kind": "clustering"})
        log.emit(3, EventKind.ROLE_CHANGE, 1,
                 {"from": "UNASSIGNED", "to": "HEAD", "cluster": 1})
        log.emit(4, EventKind.TOPOLOGY_CHANGE, "SMB",
                 {"version": 2, "nodes": [1], "edges": []})
        path = tmp_path / "run.log"
        log.write_ndjson(str(path))
        back = EventLog.read_ndjson(str(path))
        assert back == list(log.iter_all())

    def test_ndjson_lines_have_sorted_keys(self, tmp_path):
        log = EventLog()
        log.emit(0, EventKind.MSG_DROPPED, 2, {"reason": "lost", "dst": 3})
        path = tmp_path / "run.log"
        log.write_ndjson(str(path))
        line = path.read_text().strip()
        parsed = json.loads(line)
        assert list(parsed) == sorted(parsed)
        assert list(parsed["detail"]) == sorted(parsed["detail"])
        assert '", "' not in line  # compact separators

    def test_rejects_bad_memory_limit(self):
        with pytest.raises(ParameterError):
            EventLog(memory_limit=0)

    def test_concurrent_emit_assigns_unique_seqs(self):
        log = EventLog()

        def worker():
            for i in range(500):
                log.emit(i, EventKind.BARRIER, "SMB", {})

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        seqs = [ev.seq for ev in log.iter_all()]
        assert len(seqs) == 2000
        assert sorted(seqs) == list(range(2000))

    def test_event_json_round_trip(self):
        ev = SimEvent(5, 12, EventKind.ELECTION_CONFLICT, 3,
                      {"winner": 1, "loser": 3})
        assert SimEvent.from_json(ev.to_json()) == ev

    def test_kind_vocabulary_is_closed(self):
        assert {k.value for k in EventKind} == {
            "SPAWN", "DESPAWN", "MSG_SENT", "MSG_DELIVERED", "MSG_DROPPED",
            "ROLE_CHANGE", "ELECTION_CONFLICT", "PROTOCOL_VIOLATION",
            "TOPOLOGY_CHANGE", "BARRIER"}


def _ev(seq, time, kind, actor=0, detail=None):
    return SimEvent(seq, time, kind, actor, detail or {})


class TestMetrics:
    def test_isolated_head_counts_as_cluster_of_one(self):
        nodes = [{"uid": 0, "role": "HEAD", "cluster": 0}]
        m = compute_metrics([], nodes)
        assert m.cluster_count == 1
        assert m.cluster_sizes == {1: 1}
        assert m.gateway_count == 0
        assert m.node_count == 1
        assert m.convergence_tick is None

    def test_two_pairs(self):
        # Two two-node clusters: sizes {2: 2}.
        nodes = [
            {"uid": 0, "role": "HEAD", "cluster": 0},
            {"uid": 1, "role": "MEMBER", "cluster": 0},
            {"uid": 2, "role": "HEAD", "cluster": 2},
            {"uid": 3, "role": "MEMBER", "cluster": 2},
        ]
        m = compute_metrics([], nodes)
        assert m.cluster_count == 2
        assert m.cluster_sizes == {2: 2}

    def test_gateway_counts_in_its_affiliated_cluster(self):
        nodes = [
            {"uid": 0, "role": "HEAD", "cluster": 0},
            {"uid": 1, "role": "GATEWAY", "cluster": 0},
            {"uid": 2, "role": "HEAD", "cluster": 2},
        ]
        m = compute_metrics([], nodes)
        assert m.gateway_count == 1
        assert m.cluster_sizes == {1: 1, 2: 1}
        assert sum(size * count for size, count in m.cluster_sizes.items()) == 3

    def test_message_and_convergence_accounting(self):
        events = [
            _ev(0, 0, EventKind.SPAWN),
            _ev(1, 1, EventKind.MSG_SENT),
            _ev(2, 1, EventKind.MSG_DELIVERED),
            _ev(3, 2, EventKind.MSG_SENT),
            _ev(4, 6, EventKind.ROLE_CHANGE),
            _ev(5, 9, EventKind.ROLE_CHANGE),
            _ev(6, 11, EventKind.MSG_SENT),
        ]
        nodes = [{"uid": 0, "role": "HEAD", "cluster": 0}]
        m = compute_metrics(events, nodes)
        assert m.messages_total == 3
        assert m.convergence_tick == 9

    def test_leader_grouping_by_component(self):
        nodes = [
            {"uid": 0, "role": "LEADER", "leader": 0},
            {"uid": 1, "role": "CLIENT", "leader": 0},
            {"uid": 5, "role": "LEADER", "leader": 5},
        ]
        m = compute_metrics([], nodes, edges=[(0, 1)])
        assert m.leader_ids == {0: 0, 5: 5}
        m = compute_metrics([], nodes)  # no edges: keyed by leader uid
        assert m.leader_ids == {0: 0, 5: 5}

    def test_to_dict_is_json_ready(self):
        nodes = [{"uid": 0, "role": "HEAD", "cluster": 0}]
        d = compute_metrics([], nodes, converged=False).to_dict()
        json.dumps(d)
        assert d["converged"] is False
        assert d["cluster_sizes"] == {"1": 1}

    def test_ten_thousand_event_stress(self):
        log = EventLog()
        emit_n(log, 10_000)
        nodes = [{"uid": 0, "role": "HEAD", "cluster": 0}]
        m = compute_metrics(log.iter_all(), nodes)
        assert m.messages_total == 10_000
