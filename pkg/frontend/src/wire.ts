// Channel frame container: 12-byte header ("TM", version, msg_type, payload
// length, payload CRC-32) followed by the payload. See docs/wire_format.md
// in the repository root — this file must stay byte-compatible with the
// Python encoder/decoder.

import { crc32 } from "./crc32.js";

export const WIRE_VERSION = 1;
export const HEADER_LEN = 12;
export const MAX_PAYLOAD = 16 * 1024 * 1024;

export const MSG_ACTION = 0;
export const MSG_OBSERVATION = 1;
export const MSG_HEARTBEAT = 2;
export const MSG_CONTROL = 3;

const MAGIC_0 = 0x54; // "T"
const MAGIC_1 = 0x4d; // "M"
const MSG_TYPES = new Set([MSG_ACTION, MSG_OBSERVATION, MSG_HEARTBEAT, MSG_CONTROL]);

export interface Frame {
  msgType: number;
  payload: Uint8Array;
}

export function encodeFrame(msgType: number, payload: Uint8Array): Uint8Array {
  if (!MSG_TYPES.has(msgType)) throw new Error(`bad msg_type ${msgType}`);
  if (payload.length > MAX_PAYLOAD) throw new Error(`payload too large: ${payload.length}`);
  const out = new Uint8Array(HEADER_LEN + payload.length);
  const view = new DataView(out.buffer);
  out[0] = MAGIC_0;
  out[1] = MAGIC_1;
  out[2] = WIRE_VERSION;
  out[3] = msgType;
  view.setUint32(4, payload.length, true);
  view.setUint32(8, crc32(payload), true);
  out.set(payload, HEADER_LEN);
  return out;
}

function findMagic(buf: Uint8Array, from: number): number {
  for (let i = from; i + 1 < buf.length; i++) {
    if (buf[i] === MAGIC_0 && buf[i + 1] === MAGIC_1) return i;
  }
  return -1;
}

/**
 * Incremental decoder with the same resynchronization behavior as the
 * native side: corrupt or truncated regions are skipped byte-by-byte until
 * the next verifiable frame, and every skipped corruption is counted.
 */
export class FrameDecoder {
  private buf = new Uint8Array(0);
  droppedBytes = 0;
  integrityErrors = 0;

  feed(data: Uint8Array): Frame[] {
    if (this.buf.length === 0) {
      this.buf = data.slice();
    } else {
      const joined = new Uint8Array(this.buf.length + data.length);
      joined.set(this.buf, 0);
      joined.set(data, this.buf.length);
      this.buf = joined;
    }
    const frames: Frame[] = [];
    for (;;) {
      const frame = this.tryNext();
      if (frame === null) break;
      frames.push(frame);
    }
    return frames;
  }

  pending(): number {
    return this.buf.length;
  }

  private tryNext(): Frame | null {
    for (;;) {
      const start = findMagic(this.buf, 0);
      if (start < 0) {
        // keep the last byte: it may be the first half of a magic
        const drop = Math.max(0, this.buf.length - 1);
        if (drop > 0) {
          this.droppedBytes += drop;
          this.buf = this.buf.slice(drop);
        }
        return null;
      }
      if (start > 0) {
        this.droppedBytes += start;
        this.buf = this.buf.slice(start);
      }
      if (this.buf.length < HEADER_LEN) return null;
      const view = new DataView(this.buf.buffer, this.buf.byteOffset, this.buf.byteLength);
      const version = this.buf[2]!;
      const msgType = this.buf[3]!;
      const plen = view.getUint32(4, true);
      const crc = view.getUint32(8, true);
      if (version !== WIRE_VERSION || !MSG_TYPES.has(msgType) || plen > MAX_PAYLOAD) {
        this.integrityErrors += 1;
        this.droppedBytes += 1;
        this.buf = this.buf.slice(1); // false header: resume scanning
        continue;
      }
      if (this.buf.length < HEADER_LEN + plen) return null; // still arriving
      const payload = this.buf.slice(HEADER_LEN, HEADER_LEN + plen);
      if (crc32(payload) !== crc) {
        this.integrityErrors += 1;
        this.droppedBytes += 1;
        this.buf = this.buf.slice(1);
        continue;
      }
      this.buf = this.buf.slice(HEADER_LEN + plen);
      return { msgType, payload };
    }
  }
}
