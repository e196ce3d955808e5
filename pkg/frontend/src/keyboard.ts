// Held keys -> per-tick command contributions.
//
// This mirrors the native keyboard parser exactly — same targets, same
// gains, same gripper toggle and explicit base-stop behavior — so a browser
// operator and a native operator pressing the same keys put identical bytes
// on the wire. The parity is pinned by the shared keyboard_command vectors.

import type { CommandMessage, FieldName } from "./actions.js";

export interface KeyTarget {
  field: "left_arm" | "right_arm" | "base" | "torso" | "left_gripper" | "right_gripper";
  axis: number; // 0-5 for arms, 0-2 for base, 0 otherwise
  sign: number;
}

const ARM_AXES: Record<string, number> = { x: 0, y: 1, z: 2, rx: 3, ry: 4, rz: 5 };
const BASE_AXES: Record<string, number> = { vx: 0, vy: 1, wz: 2 };

export function parseKeyTarget(spec: string): KeyTarget {
  let s = spec.trim();
  let sign = 1.0;
  if (s.endsWith("+") || s.endsWith("-")) {
    sign = s.endsWith("-") ? -1.0 : 1.0;
    s = s.slice(0, -1);
  }
  if (s === "left_gripper" || s === "right_gripper" || s === "torso") {
    return { field: s, axis: 0, sign };
  }
  const dot = s.indexOf(".");
  if (dot > 0) {
    const head = s.slice(0, dot);
    const axis = s.slice(dot + 1);
    if (head === "base" && axis in BASE_AXES) {
      return { field: "base", axis: BASE_AXES[axis]!, sign };
    }
    if ((head === "left_arm" || head === "right_arm") && axis in ARM_AXES) {
      return { field: head, axis: ARM_AXES[axis]!, sign };
    }
  }
  throw new Error(`unknown keymap target '${spec}'`);
}

export interface KeyboardGains {
  translationGain: number; // m per tick per held key
  rotationGain: number; // rad per tick
  baseLinearGain: number; // m/s
  baseAngularGain: number; // rad/s
  torsoGain: number; // normalized height per tick
  torsoInitial: number;
}

// Matches the bundled local_keyboard session, and the shared vectors.
export const DEFAULT_GAINS: KeyboardGains = {
  translationGain: 0.01,
  rotationGain: 0.05,
  baseLinearGain: 0.6,
  baseAngularGain: 1.0471975511965976, // 60 deg/s
  torsoGain: 0.02,
  torsoInitial: 0.0,
};

export const DEFAULT_KEYMAP: Record<string, string> = {
  w: "base.vx+", s: "base.vx-",
  a: "base.vy+", d: "base.vy-",
  q: "base.wz+", e: "base.wz-",
  i: "right_arm.x+", k: "right_arm.x-",
  j: "right_arm.y+", l: "right_arm.y-",
  u: "right_arm.z+", o: "right_arm.z-",
  g: "right_gripper",
  t: "torso+", b: "torso-",
};

const clamp01 = (v: number) => (v < 0 ? 0 : v > 1 ? 1 : v);

export class KeyboardTracker {
  private keymap = new Map<string, KeyTarget>();
  private held = new Set<string>();
  private grippers: Record<"left_gripper" | "right_gripper", number> = {
    left_gripper: 0.0,
    right_gripper: 0.0,
  };
  private gripperDirty = new Set<"left_gripper" | "right_gripper">();
  private torso: number;
  private baseWasActive = false;

  constructor(
    readonly deviceId: string,
    keymap: Record<string, string> = DEFAULT_KEYMAP,
    readonly gains: KeyboardGains = DEFAULT_GAINS,
  ) {
    for (const [key, target] of Object.entries(keymap)) {
      if (this.keymap.has(key)) throw new Error(`key '${key}' assigned twice`);
      this.keymap.set(key, parseKeyTarget(target));
    }
    this.torso = clamp01(gains.torsoInitial);
  }

  keyEvent(code: string, pressed: boolean): void {
    if (pressed) {
      if (this.held.has(code)) return; // auto-repeat
      this.held.add(code);
      const target = this.keymap.get(code);
      if (target && (target.field === "left_gripper" || target.field === "right_gripper")) {
        const cur = this.grippers[target.field];
        this.grippers[target.field] = cur >= 0.5 ? 0.0 : 1.0;
        this.gripperDirty.add(target.field);
      }
    } else {
      this.held.delete(code);
    }
  }

  tick(timestampUs: number): CommandMessage {
    const arm: Record<"left_arm" | "right_arm", number[]> = {
      left_arm: [0, 0, 0, 0, 0, 0],
      right_arm: [0, 0, 0, 0, 0, 0],
    };
    const armActive = { left_arm: false, right_arm: false };
    const base = [0, 0, 0];
    let baseActive = false;
    let torsoStep = 0;
    let torsoActive = false;
    const g = this.gains;

    for (const code of this.held) {
      const t = this.keymap.get(code);
      if (!t) continue;
      if (t.field === "base") {
        const gain = t.axis === 2 ? g.baseAngularGain : g.baseLinearGain;
        base[t.axis]! += gain * t.sign;
        baseActive = true;
      } else if (t.field === "left_arm" || t.field === "right_arm") {
        const gain = t.axis < 3 ? g.translationGain : g.rotationGain;
        arm[t.field][t.axis]! += gain * t.sign;
        armActive[t.field] = true;
      } else if (t.field === "torso") {
        torsoStep += g.torsoGain * t.sign;
        torsoActive = true;
      }
    }

    const cmd: CommandMessage = { timestampUs, sources: {} };
    const tag = (name: FieldName) => {
      cmd.sources[name] = this.deviceId;
    };
    if (baseActive) {
      cmd.base = base;
      tag("base");
    } else if (this.baseWasActive) {
      // releasing the last base key is an explicit stop, not silence
      cmd.base = [0, 0, 0];
      tag("base");
    }
    this.baseWasActive = baseActive;
    for (const name of ["left_arm", "right_arm"] as const) {
      if (armActive[name]) {
        if (name === "left_arm") cmd.leftArm = arm[name];
        else cmd.rightArm = arm[name];
        tag(name);
      }
    }
    if (torsoActive) {
      this.torso = clamp01(this.torso + torsoStep);
      cmd.torso = this.torso;
      tag("torso");
    }
    for (const name of this.gripperDirty) {
      if (name === "left_gripper") cmd.leftGripper = this.grippers[name];
      else cmd.rightGripper = this.grippers[name];
      tag(name);
    }
    this.gripperDirty.clear();
    return cmd;
  }
}
