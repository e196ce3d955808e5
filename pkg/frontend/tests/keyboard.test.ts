import { describe, expect, it } from "vitest";

import { encodeCommand } from "../src/actions.js";
import {
  DEFAULT_GAINS,
  DEFAULT_KEYMAP,
  KeyboardTracker,
  type KeyboardGains,
  parseKeyTarget,
} from "../src/keyboard.js";
import { vectorBytes, vectorJson } from "./vectors.js";

interface KeyboardMeta {
  device_id: string;
  config: Record<string, number>;
  keymap: Record<string, string>;
  steps: Array<{ events: [string, boolean][]; tick: number; file: string }>;
}

function gainsFromConfig(cfg: Record<string, number>): KeyboardGains {
  return {
    translationGain: cfg.translation_gain!,
    rotationGain: cfg.rotation_gain!,
    baseLinearGain: cfg.base_linear_gain!,
    baseAngularGain: cfg.base_angular_gain!,
    torsoGain: cfg.torso_gain!,
    torsoInitial: cfg.torso_initial ?? 0.0,
  };
}

describe("keyboard parity with the native parser", () => {
  it("replays the shared key script to byte-identical payloads", () => {
    const meta = vectorJson<KeyboardMeta>("keyboard_commands.json");
    const tracker = new KeyboardTracker(
      meta.device_id,
      meta.keymap,
      gainsFromConfig(meta.config),
    );
    for (const step of meta.steps) {
      for (const [code, pressed] of step.events) tracker.keyEvent(code, pressed);
      const payload = encodeCommand(tracker.tick(step.tick));
      expect(payload, `step ${step.file}`).toEqual(vectorBytes(step.file));
    }
  });

  it("ships the same default bindings the bundled session uses", () => {
    const meta = vectorJson<KeyboardMeta>("keyboard_commands.json");
    expect(DEFAULT_KEYMAP).toEqual(meta.keymap);
    expect(gainsFromConfig(meta.config)).toEqual(DEFAULT_GAINS);
  });
});

describe("key handling", () => {
  it("parses targets with optional sign", () => {
    expect(parseKeyTarget("base.wz-")).toEqual({ field: "base", axis: 2, sign: -1 });
    expect(parseKeyTarget("left_arm.ry+")).toEqual({ field: "left_arm", axis: 4, sign: 1 });
    expect(parseKeyTarget("torso")).toEqual({ field: "torso", axis: 0, sign: 1 });
    expect(() => parseKeyTarget("base.warp")).toThrow(/unknown keymap target/);
  });

  it("toggles the gripper on press, ignoring auto-repeat", () => {
    const t = new KeyboardTracker("kb");
    t.keyEvent("g", true);
    t.keyEvent("g", true); // auto-repeat must not toggle back
    expect(t.tick(0).rightGripper).toBe(1.0);
    t.keyEvent("g", false);
    t.keyEvent("g", true);
    expect(t.tick(1).rightGripper).toBe(0.0);
  });

  it("emits an explicit stop when the last base key lifts", () => {
    const t = new KeyboardTracker("kb");
    t.keyEvent("w", true);
    expect(t.tick(0).base).toEqual([0.6, 0, 0]);
    t.keyEvent("w", false);
    const stop = t.tick(1);
    expect(stop.base).toEqual([0, 0, 0]);
    expect(stop.sources.base).toBe("kb");
    expect(t.tick(2).base).toBeUndefined(); // one stop edge, then silence
  });

  it("accumulates and clamps the torso target", () => {
    const t = new KeyboardTracker("kb");
    t.keyEvent("t", true);
    let last = 0;
    for (let i = 0; i < 60; i++) last = t.tick(i).torso!;
    expect(last).toBe(1.0); // 60 ticks x 0.02 clamps at the top
  });
});
