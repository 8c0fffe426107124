// Topology rendering, split in two: buildScene turns a ViewModel into a
// plain display list (testable anywhere), drawScene paints that list onto
// a canvas 2D context.

import type { Role } from "./protocol.js";
import type { ViewModel } from "./viewmodel.js";
import { edgeList } from "./viewmodel.js";

export type RoleColors = Record<Role, string>;

// Heads and leaders black, members and clients green, gateways pink.
export const ROLE_COLORS: RoleColors = {
  UNASSIGNED: "#9e9e9e",
  HEAD: "#000000",
  MEMBER: "#2e7d32",
  GATEWAY: "#ec6a9c",
  LEADER: "#000000",
  CLIENT: "#2e7d32",
};

export const NODE_RADIUS = 7;

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export function worldScale(world: [number, number], vp: Viewport): number {
  const [w, h] = world;
  return Math.min((vp.width - 2 * vp.margin) / w, (vp.height - 2 * vp.margin) / h);
}

export function worldToCanvas(
  x: number,
  y: number,
  world: [number, number],
  vp: Viewport,
): [number, number] {
  const s = worldScale(world, vp);
  return [vp.margin + x * s, vp.margin + y * s];
}

export function canvasToWorld(
  px: number,
  py: number,
  world: [number, number],
  vp: Viewport,
): [number, number] {
  const s = worldScale(world, vp);
  return [(px - vp.margin) / s, (py - vp.margin) / s];
}

export interface SceneNode {
  uid: number;
  px: number;
  py: number;
  color: string;
  tint: string | null;
  label: string;
}

export interface SceneEdge {
  a: number;
  b: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Scene {
  border: { x: number; y: number; width: number; height: number };
  edges: SceneEdge[];
  nodes: SceneNode[];
  banner: string | null;
}

export function buildScene(
  vm: ViewModel,
  vp: Viewport,
  colors: RoleColors = ROLE_COLORS,
): Scene {
  const world = vm.params ? vm.params.world : ([1, 1] as [number, number]);
  const s = worldScale(world, vp);
  const nodes: SceneNode[] = [...vm.nodes.values()]
    .sort((a, b) => a.uid - b.uid)
    .map((rec) => {
      const [px, py] = worldToCanvas(rec.x, rec.y, world, vp);
      return {
        uid: rec.uid,
        px,
        py,
        color: colors[rec.role],
        tint:
          typeof rec.cluster === "number"
            ? vm.clusters.get(rec.cluster) ?? null
            : null,
        label: String(rec.uid),
      };
    });
  const at = new Map(nodes.map((n) => [n.uid, n]));
  const edges: SceneEdge[] = [];
  for (const [a, b] of edgeList(vm)) {
    const na = at.get(a);
    const nb = at.get(b);
    if (na && nb) {
      edges.push({ a, b, x1: na.px, y1: na.py, x2: nb.px, y2: nb.py });
    }
  }
  return {
    border: {
      x: vp.margin,
      y: vp.margin,
      width: world[0] * s,
      height: world[1] * s,
    },
    edges,
    nodes,
    banner: vm.connection === "RECONNECTING" ? "RECONNECTING" : null,
  };
}

// The subset of CanvasRenderingContext2D that drawScene touches; narrow so
// tests can record calls without a DOM.
export interface Canvas2DLike {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  textAlign: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export function drawScene(scene: Scene, ctx: Canvas2DLike, vp: Viewport): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.strokeStyle = "#666666";
  ctx.lineWidth = 1;
  ctx.strokeRect(scene.border.x, scene.border.y, scene.border.width, scene.border.height);

  for (const node of scene.nodes) {
    if (node.tint) {
      ctx.fillStyle = node.tint;
      ctx.beginPath();
      ctx.arc(node.px, node.py, NODE_RADIUS * 2, 0, Math.PI * 2);
      ctx.fill();
    }
  }
  ctx.strokeStyle = "#888888";
  for (const edge of scene.edges) {
    ctx.beginPath();
    ctx.moveTo(edge.x1, edge.y1);
    ctx.lineTo(edge.x2, edge.y2);
    ctx.stroke();
  }
  for (const node of scene.nodes) {
    ctx.fillStyle = node.color;
    ctx.beginPath();
    ctx.arc(node.px, node.py, NODE_RADIUS, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = "#333333";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(node.label, node.px, node.py - NODE_RADIUS - 3);
  }
  if (scene.banner) {
    ctx.fillStyle = "#c62828";
    ctx.font = "bold 16px sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(scene.banner, 12, 24);
  }
}
