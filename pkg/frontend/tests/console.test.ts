import { describe, expect, it } from "vitest";

import { decodeCommand } from "../src/actions.js";
import { TeleopConsole } from "../src/console.js";
import { FrameDecoder, MSG_ACTION, MSG_OBSERVATION, MSG_CONTROL, encodeFrame } from "../src/wire.js";
import { hudLines } from "../src/render.js";
import { vectorBytes } from "./vectors.js";

const TICK_US = 50_000; // 20 Hz

function collectFrames() {
  const sent: Array<{ tickUs: number; frame: Uint8Array }> = [];
  let now = 0;
  const console_ = new TeleopConsole({
    send: (frame) => sent.push({ tickUs: now, frame }),
  });
  const tickAt = (t: number) => {
    now = t;
    console_.tick(t);
  };
  return { console_, sent, tickAt };
}

describe("command timing", () => {
  it("puts a keypress on the wire within two 20 Hz frames", () => {
    const { console_, sent, tickAt } = collectFrames();
    const pressAt = 12_345; // between tick 0 and tick 1
    let pressed = false;
    for (let tick = 0; tick < 10; tick++) {
      const t = tick * TICK_US;
      if (!pressed && pressAt <= t) {
        console_.onKey("w", true);
        pressed = true;
      }
      tickAt(t);
    }
    const hit = sent.find(({ frame }) => {
      const frames = new FrameDecoder().feed(frame);
      if (frames[0]?.msgType !== MSG_ACTION) return false;
      const cmd = decodeCommand(frames[0].payload);
      return cmd.base?.[0] === Math.fround(0.6);
    });
    expect(hit).toBeDefined();
    expect(hit!.tickUs - pressAt).toBeLessThanOrEqual(2 * TICK_US);
  });

  it("sends nothing while idle", () => {
    const { console_, sent, tickAt } = collectFrames();
    for (let tick = 0; tick < 5; tick++) tickAt(tick * TICK_US);
    expect(sent).toHaveLength(0);
    expect(console_.stats.commandsSent).toBe(0);
  });

  it("tags commands with the console device id", () => {
    const { console_, sent, tickAt } = collectFrames();
    console_.onKey("t", true);
    tickAt(0);
    const frames = new FrameDecoder().feed(sent[0]!.frame);
    expect(decodeCommand(frames[0]!.payload).sources.torso).toBe("console");
  });
});

describe("incoming frames", () => {
  it("decodes observations and tracks the latest", async () => {
    const { console_ } = collectFrames();
    const seen: number[] = [];
    const withHook = new TeleopConsole({
      send: () => {},
      onObservation: (obs) => seen.push(obs.simTime),
    });
    const frame = encodeFrame(MSG_OBSERVATION, vectorBytes("observation_frame.bin"));
    await withHook.onMessage(frame);
    expect(withHook.latest?.simTime).toBe(3.25);
    expect(withHook.latest?.rgb["head"]?.width).toBe(8);
    expect(withHook.stats.observations).toBe(1);
    expect(seen).toEqual([3.25]);
    expect(console_.stats.framesReceived).toBe(0); // untouched instance
  });

  it("handles frames split across socket messages", async () => {
    const { console_ } = collectFrames();
    const frame = encodeFrame(MSG_OBSERVATION, vectorBytes("observation_frame.bin"));
    await console_.onMessage(frame.subarray(0, 9));
    expect(console_.latest).toBeNull();
    await console_.onMessage(frame.subarray(9));
    expect(console_.latest?.simTime).toBe(3.25);
  });

  it("flags completion on a done control frame", async () => {
    const { console_ } = collectFrames();
    const done = new TextEncoder().encode('{"kind":"done","success":true}');
    await console_.onMessage(encodeFrame(MSG_CONTROL, done));
    expect(console_.done).toBe(true);
  });
});

describe("hud", () => {
  it("summarizes stats with or without an observation", () => {
    const stats = { framesReceived: 3, integrityErrors: 0, commandsSent: 2 };
    expect(hudLines(null, stats)[1]).toMatch(/waiting/);
    expect(hudLines(null, stats)[0]).toContain("frames 3");
  });
});
