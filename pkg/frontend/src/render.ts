// Canvas-free pixel and HUD helpers, kept pure so they test in Node.

import type { Observation } from "./observation.js";

/** Row-major RGB bytes -> RGBA suitable for ImageData. */
export function rgbToRgba(rgb: Uint8Array, width: number, height: number): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  for (let p = 0, s = 0, d = 0; p < width * height; p++, s += 3, d += 4) {
    out[d] = rgb[s]!;
    out[d + 1] = rgb[s + 1]!;
    out[d + 2] = rgb[s + 2]!;
    out[d + 3] = 255;
  }
  return out;
}

/**
 * Depth in millimeters -> grayscale RGBA, near = bright. Zero depth means
 * the ray hit nothing; paint it a dark blue so holes are distinguishable
 * from valid far returns.
 */
export function depthToRgba(
  depth: Uint16Array,
  width: number,
  height: number,
  maxMm = 4000,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  for (let p = 0, d = 0; p < width * height; p++, d += 4) {
    const mm = depth[p]!;
    if (mm === 0) {
      out[d] = 10;
      out[d + 1] = 12;
      out[d + 2] = 32;
    } else {
      const v = Math.max(0, Math.min(255, Math.round(255 * (1 - mm / maxMm))));
      out[d] = v;
      out[d + 1] = v;
      out[d + 2] = v;
    }
    out[d + 3] = 255;
  }
  return out;
}

export interface HudStats {
  framesReceived: number;
  integrityErrors: number;
  commandsSent: number;
}

export function hudLines(obs: Observation | null, stats: HudStats): string[] {
  const lines = [
    `frames ${stats.framesReceived}  sent ${stats.commandsSent}  errors ${stats.integrityErrors}`,
  ];
  if (obs) {
    const [dx, dy, dth] = obs.baseOdomDelta;
    const [gl, gr] = obs.gripperState;
    lines.push(`sim ${obs.simTime.toFixed(2)}s  odom ${dx.toFixed(3)} ${dy.toFixed(3)} ${dth.toFixed(3)}`);
    lines.push(`grippers L ${gl.toFixed(2)} R ${gr.toFixed(2)}`);
    for (const [name, pose] of Object.entries(obs.eePoses)) {
      const [x, y, z] = pose.position;
      lines.push(`${name} ee ${x.toFixed(3)} ${y.toFixed(3)} ${z.toFixed(3)}`);
    }
  } else {
    lines.push("waiting for observations...");
  }
  return lines;
}
