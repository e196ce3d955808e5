// Action command payloads (channel msg_type 0) and the 17-slot f32 vector.
//
// Slot layout:
//   0-2  left arm translation   3-5  left arm rotation    6  left gripper
//   7-9  right arm translation  10-12 right arm rotation  13 right gripper
//   14   base vx                15 base vy                16 base wz
// The torso target travels beside the vector, not inside it.

export const ACTION_DIM = 17;
export const ACTION_BYTES = ACTION_DIM * 4;

export type FieldName =
  | "left_arm"
  | "right_arm"
  | "left_gripper"
  | "right_gripper"
  | "base"
  | "torso";

export const COMMAND_FIELDS: readonly FieldName[] = [
  "left_arm",
  "right_arm",
  "left_gripper",
  "right_gripper",
  "base",
  "torso",
];

export interface CommandMessage {
  timestampUs: number;
  /** [tx, ty, tz, rx, ry, rz] per-tick delta; undefined = field absent */
  leftArm?: number[];
  rightArm?: number[];
  leftGripper?: number;
  rightGripper?: number;
  /** [vx, vy, wz] */
  base?: number[];
  torso?: number;
  /** device tag per present field; a field is present iff it is tagged */
  sources: Partial<Record<FieldName, string>>;
}

const FIELD_BIT: Record<FieldName, number> = {
  left_arm: 1 << 0,
  right_arm: 1 << 1,
  left_gripper: 1 << 2,
  right_gripper: 1 << 3,
  base: 1 << 4,
  torso: 1 << 5,
};

function fieldValue(cmd: CommandMessage, name: FieldName): number[] | number | undefined {
  switch (name) {
    case "left_arm": return cmd.leftArm;
    case "right_arm": return cmd.rightArm;
    case "left_gripper": return cmd.leftGripper;
    case "right_gripper": return cmd.rightGripper;
    case "base": return cmd.base;
    case "torso": return cmd.torso;
  }
}

export function isEmptyCommand(cmd: CommandMessage): boolean {
  return Object.keys(cmd.sources).length === 0;
}

/** Flatten the present fields into the 17-slot layout (absent = zeros). */
export function flattenCommand(cmd: CommandMessage): Float32Array {
  const vec = new Float32Array(ACTION_DIM);
  if (cmd.leftArm) for (let i = 0; i < 6; i++) vec[i] = cmd.leftArm[i]!;
  if (cmd.leftGripper !== undefined) vec[6] = cmd.leftGripper;
  if (cmd.rightArm) for (let i = 0; i < 6; i++) vec[7 + i] = cmd.rightArm[i]!;
  if (cmd.rightGripper !== undefined) vec[13] = cmd.rightGripper;
  if (cmd.base) for (let i = 0; i < 3; i++) vec[14 + i] = cmd.base[i]!;
  return vec;
}

const encoder = new TextEncoder();
const decoder = new TextDecoder("utf-8", { fatal: true });

export function encodeCommand(cmd: CommandMessage): Uint8Array {
  let mask = 0;
  const tags: Uint8Array[] = [];
  let tagBytes = 0;
  for (const name of COMMAND_FIELDS) {
    if (fieldValue(cmd, name) === undefined) continue;
    const tag = cmd.sources[name];
    if (tag === undefined) throw new Error(`present field ${name} has no source tag`);
    mask |= FIELD_BIT[name];
    const raw = encoder.encode(tag);
    if (raw.length > 255) throw new Error(`source tag too long: ${raw.length} bytes`);
    tags.push(raw);
    tagBytes += 1 + raw.length;
  }

  const out = new Uint8Array(8 + 1 + ACTION_BYTES + 4 + tagBytes);
  const view = new DataView(out.buffer);
  view.setBigUint64(0, BigInt(Math.trunc(cmd.timestampUs)), true);
  out[8] = mask;
  const vec = flattenCommand(cmd);
  for (let i = 0; i < ACTION_DIM; i++) view.setFloat32(9 + 4 * i, vec[i]!, true);
  view.setFloat32(9 + ACTION_BYTES, cmd.torso ?? 0.0, true);
  let off = 9 + ACTION_BYTES + 4;
  for (const raw of tags) {
    out[off++] = raw.length;
    out.set(raw, off);
    off += raw.length;
  }
  return out;
}

export function decodeCommand(payload: Uint8Array): CommandMessage {
  if (payload.length < 8 + 1 + ACTION_BYTES + 4) {
    throw new Error(`action payload too short: ${payload.length}`);
  }
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  const timestampUs = Number(view.getBigUint64(0, true));
  const mask = payload[8]!;
  const vec: number[] = [];
  for (let i = 0; i < ACTION_DIM; i++) vec.push(view.getFloat32(9 + 4 * i, true));
  const torsoVal = view.getFloat32(9 + ACTION_BYTES, true);

  let off = 9 + ACTION_BYTES + 4;
  const sources: Partial<Record<FieldName, string>> = {};
  for (const name of COMMAND_FIELDS) {
    if (!(mask & FIELD_BIT[name])) continue;
    if (off >= payload.length) throw new Error("action payload truncated in source tags");
    const n = payload[off]!;
    off += 1;
    if (off + n > payload.length) throw new Error("action payload truncated in source tags");
    sources[name] = decoder.decode(payload.subarray(off, off + n));
    off += n;
  }
  if (off !== payload.length) {
    throw new Error(`${payload.length - off} trailing bytes in action payload`);
  }

  const cmd: CommandMessage = { timestampUs, sources };
  if (mask & FIELD_BIT.left_arm) cmd.leftArm = vec.slice(0, 6);
  if (mask & FIELD_BIT.right_arm) cmd.rightArm = [...vec.slice(7, 13)];
  if (mask & FIELD_BIT.left_gripper) cmd.leftGripper = vec[6]!;
  if (mask & FIELD_BIT.right_gripper) cmd.rightGripper = vec[13]!;
  if (mask & FIELD_BIT.base) cmd.base = vec.slice(14, 17);
  if (mask & FIELD_BIT.torso) cmd.torso = torsoVal;
  return cmd;
}
