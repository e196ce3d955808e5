// Observation payload decoder (channel msg_type 1).
//
// Fixed little-endian layout plus per-plane deflate; the image bytes that
// come out must match the simulator's render buffers exactly — the view is
// pixel-perfect or it throws, never approximate.

export interface EePose {
  position: [number, number, number];
  orientation: [number, number, number, number]; // wxyz
}

export interface RgbImage {
  width: number;
  height: number;
  data: Uint8Array; // row-major RGB
}

export interface DepthImage {
  width: number;
  height: number;
  data: Uint16Array; // millimeters, 0 = no hit
}

export interface Observation {
  simTime: number;
  baseOdomDelta: [number, number, number];
  gripperState: [number, number];
  eePoses: Record<string, EePose>;
  rgb: Record<string, RgbImage>;
  depth: Record<string, DepthImage>;
}

export const OBS_VERSION = 1;

async function inflate(data: Uint8Array): Promise<Uint8Array> {
  // DecompressionStream("deflate") consumes the zlib wrapper the encoder
  // writes; available natively in browsers and in Node >= 18.
  const stream = new Blob([data as BlobPart]).stream()
    .pipeThrough(new DecompressionStream("deflate"));
  return new Uint8Array(await new Response(stream).arrayBuffer());
}

class Reader {
  private off = 0;
  private view: DataView;

  constructor(private buf: Uint8Array) {
    this.view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  }

  private need(n: number): void {
    if (this.off + n > this.buf.length) {
      throw new Error(`truncated at offset ${this.off}: need ${n} more bytes`);
    }
  }

  u8(): number {
    this.need(1);
    return this.buf[this.off++]!;
  }

  u16(): number {
    this.need(2);
    const v = this.view.getUint16(this.off, true);
    this.off += 2;
    return v;
  }

  u32(): number {
    this.need(4);
    const v = this.view.getUint32(this.off, true);
    this.off += 4;
    return v;
  }

  f64(): number {
    this.need(8);
    const v = this.view.getFloat64(this.off, true);
    this.off += 8;
    return v;
  }

  bytes(n: number): Uint8Array {
    this.need(n);
    const out = this.buf.slice(this.off, this.off + n);
    this.off += n;
    return out;
  }

  name(): string {
    const n = this.u8();
    return new TextDecoder("utf-8", { fatal: true }).decode(this.bytes(n));
  }

  remaining(): number {
    return this.buf.length - this.off;
  }
}

export async function decodeObservation(payload: Uint8Array): Promise<Observation> {
  const r = new Reader(payload);
  const version = r.u8();
  if (version !== OBS_VERSION) throw new Error(`unsupported observation version ${version}`);

  const simTime = r.f64();
  const baseOdomDelta: [number, number, number] = [r.f64(), r.f64(), r.f64()];
  const gripperState: [number, number] = [r.f64(), r.f64()];

  const eePoses: Record<string, EePose> = {};
  const poseCount = r.u8();
  for (let i = 0; i < poseCount; i++) {
    const name = r.name();
    eePoses[name] = {
      position: [r.f64(), r.f64(), r.f64()],
      orientation: [r.f64(), r.f64(), r.f64(), r.f64()],
    };
  }

  const rgb: Record<string, RgbImage> = {};
  const rgbCount = r.u8();
  for (let i = 0; i < rgbCount; i++) {
    const cam = r.name();
    const width = r.u16();
    const height = r.u16();
    const compLen = r.u32();
    const data = await inflate(r.bytes(compLen));
    if (data.length !== width * height * 3) {
      throw new Error(`rgb[${cam}]: expected ${width * height * 3} bytes, got ${data.length}`);
    }
    rgb[cam] = { width, height, data };
  }

  const depth: Record<string, DepthImage> = {};
  const depthCount = r.u8();
  for (let i = 0; i < depthCount; i++) {
    const cam = r.name();
    const width = r.u16();
    const height = r.u16();
    const compLen = r.u32();
    const raw = await inflate(r.bytes(compLen));
    if (raw.length !== width * height * 2) {
      throw new Error(`depth[${cam}]: expected ${width * height * 2} bytes, got ${raw.length}`);
    }
    const view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
    const data = new Uint16Array(width * height);
    for (let p = 0; p < data.length; p++) data[p] = view.getUint16(2 * p, true);
    depth[cam] = { width, height, data };
  }

  if (r.remaining() !== 0) {
    throw new Error(`${r.remaining()} trailing bytes in observation payload`);
  }
  return { simTime, baseOdomDelta, gripperState, eePoses, rgb, depth };
}
