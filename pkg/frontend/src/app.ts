// Single-page wiring: one ControlClient feeds the ViewModel reducer, and
// every frame schedules a repaint of the canvas, the event feed, and the
// panels. All mutations go through commands; the server remains the only
// source of truth.

import { ControlClient } from "./client.js";
import { buildCloudPane } from "./cloudpane.js";
import type { Canvas2DLike, Viewport } from "./render.js";
import {
  NODE_RADIUS,
  buildScene,
  canvasToWorld,
  drawScene,
  worldToCanvas,
} from "./render.js";
import type { ViewModel } from "./viewmodel.js";
import { applyFrame, initialViewModel, setConnection } from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

const canvas = el<HTMLCanvasElement>("topology");
const ctx = canvas.getContext("2d") as unknown as Canvas2DLike;
const vp: Viewport = { width: canvas.width, height: canvas.height, margin: 20 };

let vm: ViewModel = initialViewModel();
let paintQueued = false;
let lastFeedSeq = -2;

function schedulePaint(): void {
  if (paintQueued) {
    return;
  }
  paintQueued = true;
  requestAnimationFrame(() => {
    paintQueued = false;
    paint();
  });
}

function paint(): void {
  drawScene(buildScene(vm, vp), ctx, vp);
  el("status").textContent =
    `${vm.connection} | tick ${vm.tick} | ${vm.running ? "running" : "paused"}`;
  el("status").className = vm.connection === "CONNECTED" ? "ok" : "warn";
  paintParams();
  paintFeed();
  paintCloudPane();
}

function paintParams(): void {
  if (!vm.params) {
    return;
  }
  const k = el<HTMLInputElement>("param-k");
  const loss = el<HTMLInputElement>("param-loss");
  const tick = el<HTMLInputElement>("param-tick");
  if (document.activeElement !== k) {
    k.value = String(vm.params.k);
  }
  if (document.activeElement !== loss) {
    loss.value = String(vm.params.loss_rate);
  }
  if (document.activeElement !== tick) {
    tick.value = String(vm.params.tick_ms);
  }
}

function paintFeed(): void {
  if (vm.lastSeq === lastFeedSeq) {
    return;
  }
  lastFeedSeq = vm.lastSeq;
  const feed = el("feed");
  const rows = vm.eventFeed.slice(-120).map((ev) => {
    const detail = JSON.stringify(ev.detail);
    return `<div class="ev"><span class="seq">#${ev.seq}</span> ` +
      `t${ev.time} <b>${ev.kind}</b> actor=${ev.actor} ${detail}</div>`;
  });
  feed.innerHTML = rows.join("");
  feed.scrollTop = feed.scrollHeight;
}

function paintCloudPane(): void {
  const pane = el("cloud");
  const info = buildCloudPane(vm);
  if (!info) {
    pane.style.display = "none";
    return;
  }
  pane.style.display = "block";
  const headline = info.electing
    ? "<b>re-election in progress</b>"
    : info.leader === null
      ? "no devices"
      : `leader <b>${info.leader}</b>, members: ${info.memberCount ?? "?"}`;
  const rows = info.devices.map(
    (d) =>
      `<tr><td>${d.uid}</td><td>${d.role}</td>` +
      `<td>${d.score === null ? "" : d.score.toFixed(3)}</td></tr>`,
  );
  pane.innerHTML =
    `<h3>Cloud status</h3><p>${headline}</p>` +
    `<table><tr><th>uid</th><th>role</th><th>score</th></tr>${rows.join("")}</table>`;
}

function toast(text: string): void {
  const box = document.createElement("div");
  box.className = "toast";
  box.textContent = text;
  el("toasts").appendChild(box);
  setTimeout(() => box.remove(), 4000);
}

function dispatch(cmd: Parameters<ControlClient["send"]>[0]): void {
  client.send(cmd).then(
    (ack) => {
      if (!ack.ok) {
        toast(`${cmd.cmd} rejected: ${ack.error}`);
      }
    },
    (err: Error) => toast(err.message),
  );
}

const query = new URLSearchParams(location.search);
const url =
  query.get("url") ??
  `ws://${location.hostname || "127.0.0.1"}:${query.get("port") ?? "8765"}`;

const client = new ControlClient({
  url,
  onFrame: (frame) => {
    vm = applyFrame(vm, frame);
    schedulePaint();
  },
  onConnection: (state) => {
    vm = setConnection(vm, state);
    schedulePaint();
  },
});

// -- canvas interaction: click adds, drag moves, shift-click removes --------

function nodeAt(px: number, py: number): number | null {
  if (!vm.params) {
    return null;
  }
  let best: number | null = null;
  let bestDist = NODE_RADIUS + 4;
  for (const rec of vm.nodes.values()) {
    const [nx, ny] = worldToCanvas(rec.x, rec.y, vm.params.world, vp);
    const dist = Math.hypot(nx - px, ny - py);
    if (dist < bestDist) {
      best = rec.uid;
      bestDist = dist;
    }
  }
  return best;
}

let dragUid: number | null = null;
let dragMoved = false;

canvas.addEventListener("mousedown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  dragUid = nodeAt(ev.clientX - rect.left, ev.clientY - rect.top);
  dragMoved = false;
});

canvas.addEventListener("mousemove", (ev) => {
  if (dragUid === null || !vm.params) {
    return;
  }
  dragMoved = true;
  const rect = canvas.getBoundingClientRect();
  const [x, y] = canvasToWorld(
    ev.clientX - rect.left,
    ev.clientY - rect.top,
    vm.params.world,
    vp,
  );
  dispatch({ cmd: "MOVE_NODE", uid: dragUid, x, y });
});

canvas.addEventListener("mouseup", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const px = ev.clientX - rect.left;
  const py = ev.clientY - rect.top;
  const uid = dragUid;
  dragUid = null;
  if (!vm.params) {
    return;
  }
  if (uid !== null && !dragMoved && ev.shiftKey) {
    dispatch({ cmd: "REMOVE_NODE", uid });
    return;
  }
  if (uid === null && !dragMoved) {
    const [x, y] = canvasToWorld(px, py, vm.params.world, vp);
    const [w, h] = vm.params.world;
    if (x >= 0 && x <= w && y >= 0 && y <= h) {
      dispatch({ cmd: "ADD_NODE", x, y });
    }
  }
});

// -- control buttons and settings -------------------------------------------

el("btn-start").addEventListener("click", () => dispatch({ cmd: "START" }));
el("btn-pause").addEventListener("click", () => dispatch({ cmd: "PAUSE" }));
el("btn-step").addEventListener("click", () => dispatch({ cmd: "STEP", n: 1 }));

function bindParam(inputId: string, key: string, parse: (v: string) => number) {
  el(`${inputId}-apply`).addEventListener("click", () => {
    const value = parse(el<HTMLInputElement>(inputId).value);
    dispatch({ cmd: "SET_PARAM", key, value });
  });
}

bindParam("param-k", "k", (v) => parseInt(v, 10));
bindParam("param-loss", "loss_rate", (v) => parseFloat(v));
bindParam("param-tick", "tick_ms", (v) => parseInt(v, 10));

client.connect();
schedulePaint();
