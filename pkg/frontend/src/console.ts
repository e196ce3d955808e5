// Console session logic, DOM-free: socket bytes in, action frames out.
//
// The browser entry point owns the WebSocket and canvases; this class owns
// everything testable — frame decoding, observation state, key tracking,
// and the fixed-rate command tick. A key pressed between ticks is encoded
// into the very next tick's frame, so at the default 20 Hz an input reaches
// the wire within one rendered frame, two in the worst case.

import { encodeCommand, isEmptyCommand } from "./actions.js";
import { KeyboardTracker, type KeyboardGains } from "./keyboard.js";
import { decodeObservation, type Observation } from "./observation.js";
import { FrameDecoder, MSG_OBSERVATION, MSG_CONTROL, MSG_ACTION, encodeFrame } from "./wire.js";

export const DEFAULT_TICK_HZ = 20;

export interface ConsoleStats {
  framesReceived: number;
  observations: number;
  integrityErrors: number;
  droppedBytes: number;
  commandsSent: number;
}

export interface ConsoleOptions {
  send: (frame: Uint8Array) => void;
  deviceId?: string;
  keymap?: Record<string, string>;
  gains?: KeyboardGains;
  onObservation?: (obs: Observation) => void;
  onControl?: (msg: Record<string, unknown>) => void;
}

export class TeleopConsole {
  readonly tracker: KeyboardTracker;
  latest: Observation | null = null;
  done = false;
  private readonly decoder = new FrameDecoder();
  private readonly opts: ConsoleOptions;
  private decodeChain: Promise<void> = Promise.resolve();
  private sent = 0;
  private received = 0;
  private observations = 0;

  constructor(opts: ConsoleOptions) {
    this.opts = opts;
    this.tracker = new KeyboardTracker(opts.deviceId ?? "console", opts.keymap, opts.gains);
  }

  get stats(): ConsoleStats {
    return {
      framesReceived: this.received,
      observations: this.observations,
      integrityErrors: this.decoder.integrityErrors,
      droppedBytes: this.decoder.droppedBytes,
      commandsSent: this.sent,
    };
  }

  onKey(code: string, pressed: boolean): void {
    this.tracker.keyEvent(code, pressed);
  }

  /**
   * Feed one binary socket message. Observation decoding is asynchronous
   * (native inflate); frames are chained so they apply in arrival order.
   * The returned promise settles when every frame in this message has been
   * applied — callers that only stream can ignore it.
   */
  onMessage(data: ArrayBuffer | Uint8Array): Promise<void> {
    const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
    for (const frame of this.decoder.feed(bytes)) {
      this.received += 1;
      if (frame.msgType === MSG_OBSERVATION) {
        this.decodeChain = this.decodeChain.then(async () => {
          const obs = await decodeObservation(frame.payload);
          this.observations += 1;
          this.latest = obs;
          this.opts.onObservation?.(obs);
        });
      } else if (frame.msgType === MSG_CONTROL) {
        this.decodeChain = this.decodeChain.then(() => {
          const msg = JSON.parse(new TextDecoder().decode(frame.payload));
          if (msg && msg.kind === "done") this.done = true;
          this.opts.onControl?.(msg);
        });
      }
      // heartbeats and echoed actions carry nothing the console displays
    }
    return this.decodeChain;
  }

  /** One control tick: encode what the keyboard produced and ship it. */
  tick(timestampUs: number): boolean {
    const cmd = this.tracker.tick(timestampUs);
    if (isEmptyCommand(cmd)) return false;
    this.opts.send(encodeFrame(MSG_ACTION, encodeCommand(cmd)));
    this.sent += 1;
    return true;
  }
}
