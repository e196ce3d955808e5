// Browser entry: wires the console logic to a WebSocket, canvases, and the
// real keyboard. Everything interesting lives in console.ts; this file is
// deliberately thin DOM glue.

import { TeleopConsole, DEFAULT_TICK_HZ } from "./console.js";
import { depthToRgba, hudLines, rgbToRgba } from "./render.js";
import type { Observation } from "./observation.js";

const params = new URLSearchParams(window.location.search);
const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
const port = params.get("port") ?? "8765";

const status = document.getElementById("status") as HTMLPreElement;
const cameras = document.getElementById("cameras") as HTMLDivElement;

const canvases = new Map<string, { rgb: HTMLCanvasElement; depth: HTMLCanvasElement }>();

function canvasFor(cam: string, width: number, height: number) {
  let entry = canvases.get(cam);
  if (!entry) {
    const block = document.createElement("div");
    block.className = "cam";
    const label = document.createElement("div");
    label.textContent = cam;
    const rgb = document.createElement("canvas");
    const depth = document.createElement("canvas");
    block.append(label, rgb, depth);
    cameras.append(block);
    entry = { rgb, depth };
    canvases.set(cam, entry);
  }
  for (const c of [entry.rgb, entry.depth]) {
    if (c.width !== width || c.height !== height) {
      c.width = width;
      c.height = height;
    }
  }
  return entry;
}

function paint(canvas: HTMLCanvasElement, rgba: Uint8ClampedArray, width: number, height: number) {
  const img = new ImageData(width, height);
  img.data.set(rgba);
  canvas.getContext("2d")!.putImageData(img, 0, 0);
}

function draw(obs: Observation) {
  for (const [cam, img] of Object.entries(obs.rgb)) {
    const { rgb, depth } = canvasFor(cam, img.width, img.height);
    paint(rgb, rgbToRgba(img.data, img.width, img.height), img.width, img.height);
    const d = obs.depth[cam];
    if (d) paint(depth, depthToRgba(d.data, d.width, d.height), d.width, d.height);
  }
}

const ws = new WebSocket(`ws://${host}:${port}/`);
ws.binaryType = "arraybuffer";

const console2 = new TeleopConsole({
  send: (frame) => {
    if (ws.readyState === WebSocket.OPEN) ws.send(frame);
  },
});

ws.onmessage = (ev) => {
  if (ev.data instanceof ArrayBuffer) void console2.onMessage(ev.data);
};
ws.onclose = () => {
  status.textContent = "disconnected";
};

window.addEventListener("keydown", (ev) => {
  if (ev.repeat) return;
  console2.onKey(ev.key.toLowerCase(), true);
});
window.addEventListener("keyup", (ev) => {
  console2.onKey(ev.key.toLowerCase(), false);
});

const tickUs = Math.round(1e6 / DEFAULT_TICK_HZ);
let tick = 0;
setInterval(() => {
  console2.tick(tick * tickUs);
  tick += 1;
}, 1000 / DEFAULT_TICK_HZ);

function renderLoop() {
  if (console2.latest) draw(console2.latest);
  status.textContent = hudLines(console2.latest, console2.stats).join("\n")
    + (console2.done ? "\nsession done" : "");
  requestAnimationFrame(renderLoop);
}
renderLoop();
