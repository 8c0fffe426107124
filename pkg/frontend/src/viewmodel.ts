// Client-side state, rebuilt purely from the frames the server sends.
// No simulation logic lives here: a SNAPSHOT replaces the topology and
// every DELTA/EVENT folds in on top, so replaying the same frames always
// yields the same ViewModel.

import type {
  DeltaFrame,
  Edge,
  EventRecord,
  Frame,
  NodeRecord,
  Params,
  SnapshotFrame,
} from "./protocol.js";

export const EVENT_SCROLLBACK = 500;

// Tints for cluster regions; assignment is by ascending cluster id so the
// same topology colors identically no matter the frame order it arrived in.
export const CLUSTER_TINTS = [
  "#ffe0b2",
  "#c8e6c9",
  "#bbdefb",
  "#f8bbd0",
  "#d1c4e9",
  "#fff9c4",
  "#b2dfdb",
  "#ffcdd2",
];

export type Connection = "CONNECTED" | "RECONNECTING";

export interface ViewModel {
  protocol: string | null;
  running: boolean;
  tick: number;
  lastSeq: number;
  params: Params | null;
  nodes: Map<number, NodeRecord>;
  edges: Set<string>;
  clusters: Map<number, string>;
  eventFeed: EventRecord[];
  connection: Connection;
}

export function initialViewModel(): ViewModel {
  return {
    protocol: null,
    running: false,
    tick: 0,
    lastSeq: -1,
    params: null,
    nodes: new Map(),
    edges: new Set(),
    clusters: new Map(),
    eventFeed: [],
    connection: "RECONNECTING",
  };
}

export function edgeKey(a: number, b: number): string {
  return a < b ? `${a}-${b}` : `${b}-${a}`;
}

export function edgeList(vm: ViewModel): Edge[] {
  const pairs = [...vm.edges].map((key) => {
    const [a, b] = key.split("-");
    return [Number(a), Number(b)] as Edge;
  });
  pairs.sort((p, q) => p[0] - q[0] || p[1] - q[1]);
  return pairs;
}

function clusterColors(nodes: Map<number, NodeRecord>): Map<number, string> {
  const ids = new Set<number>();
  for (const rec of nodes.values()) {
    if (typeof rec.cluster === "number") {
      ids.add(rec.cluster);
    }
  }
  const colors = new Map<number, string>();
  [...ids].sort((a, b) => a - b).forEach((id, i) => {
    colors.set(id, CLUSTER_TINTS[i % CLUSTER_TINTS.length]);
  });
  return colors;
}

function applySnapshot(vm: ViewModel, frame: SnapshotFrame): ViewModel {
  const nodes = new Map(frame.nodes.map((rec) => [rec.uid, rec]));
  return {
    ...vm,
    protocol: frame.protocol,
    running: frame.running,
    tick: frame.tick,
    lastSeq: frame.seq,
    params: frame.params,
    nodes,
    edges: new Set(frame.edges.map(([a, b]) => edgeKey(a, b))),
    clusters: clusterColors(nodes),
  };
}

function applyDelta(vm: ViewModel, frame: DeltaFrame): ViewModel {
  const nodes = new Map(vm.nodes);
  for (const rec of frame.changed) {
    nodes.set(rec.uid, rec);
  }
  for (const uid of frame.removed) {
    nodes.delete(uid);
  }
  const edges = new Set(vm.edges);
  for (const [a, b] of frame.edges_added) {
    edges.add(edgeKey(a, b));
  }
  for (const [a, b] of frame.edges_removed) {
    edges.delete(edgeKey(a, b));
  }
  return {
    ...vm,
    tick: frame.tick,
    lastSeq: Math.max(vm.lastSeq, frame.seq),
    params: frame.params ?? vm.params,
    nodes,
    edges,
    clusters: clusterColors(nodes),
  };
}

export function applyFrame(vm: ViewModel, frame: Frame): ViewModel {
  switch (frame.kind) {
    case "SNAPSHOT":
      return applySnapshot(vm, frame);
    case "DELTA":
      return applyDelta(vm, frame);
    case "EVENT": {
      const eventFeed = [...vm.eventFeed, frame.event].slice(-EVENT_SCROLLBACK);
      return {
        ...vm,
        eventFeed,
        lastSeq: Math.max(vm.lastSeq, frame.event.seq),
      };
    }
    case "ACK":
      // Acks are correlated by the client, not folded into the view.
      return vm;
  }
}

export function setConnection(vm: ViewModel, state: Connection): ViewModel {
  return vm.connection === state ? vm : { ...vm, connection: state };
}

// The comparable core of a ViewModel: what a reconnecting client must
// reproduce exactly once it has caught up to the same event seq.
export interface TopologySignature {
  lastSeq: number;
  nodes: NodeRecord[];
  edges: Edge[];
}

export function topologySignature(vm: ViewModel): TopologySignature {
  const nodes = [...vm.nodes.values()].sort((a, b) => a.uid - b.uid);
  return { lastSeq: vm.lastSeq, nodes, edges: edgeList(vm) };
}
