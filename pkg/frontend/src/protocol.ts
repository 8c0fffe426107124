// Wire format of the simulator's control stream. One SNAPSHOT on connect,
// then EVENT and DELTA frames; commands are answered with an ACK carrying
// the command's id.

export type Role =
  | "UNASSIGNED"
  | "HEAD"
  | "MEMBER"
  | "GATEWAY"
  | "LEADER"
  | "CLIENT";

export interface NodeRecord {
  uid: number;
  kind: string;
  x: number;
  y: number;
  role: Role;
  // clustering protocol
  cluster?: number | null;
  head?: number | null;
  // leader protocol
  leader?: number | null;
  score?: number;
  members?: number;
}

export interface Params {
  k: number;
  radio_range: number;
  world: [number, number];
  tick_ms: number;
  seed: number;
  loss_rate: number;
}

export type Edge = [number, number];

export interface SnapshotFrame {
  kind: "SNAPSHOT";
  seq: number;
  tick: number;
  protocol: string;
  running: boolean;
  params: Params;
  nodes: NodeRecord[];
  edges: Edge[];
}

export interface EventRecord {
  seq: number;
  time: number;
  kind: string;
  actor: number | null;
  detail: Record<string, unknown>;
}

export interface EventFrame {
  kind: "EVENT";
  event: EventRecord;
}

export interface DeltaFrame {
  kind: "DELTA";
  tick: number;
  seq: number;
  changed: NodeRecord[];
  removed: number[];
  edges_added: Edge[];
  edges_removed: Edge[];
  params?: Params;
}

export interface AckFrame {
  kind: "ACK";
  id: string | number | null;
  ok: boolean;
  error?: string;
  result?: Record<string, unknown>;
}

export type Frame = SnapshotFrame | EventFrame | DeltaFrame | AckFrame;

const FRAME_KINDS = new Set(["SNAPSHOT", "EVENT", "DELTA", "ACK"]);

export function parseFrame(raw: string): Frame {
  const doc = JSON.parse(raw);
  if (typeof doc !== "object" || doc === null || !FRAME_KINDS.has(doc.kind)) {
    throw new Error(`not a control frame: ${raw.slice(0, 80)}`);
  }
  return doc as Frame;
}

export type CommandName =
  | "START"
  | "PAUSE"
  | "STEP"
  | "SNAPSHOT"
  | "ADD_NODE"
  | "REMOVE_NODE"
  | "MOVE_NODE"
  | "SET_PARAM";

export interface Command {
  cmd: CommandName;
  id?: string | number;
  [field: string]: unknown;
}
