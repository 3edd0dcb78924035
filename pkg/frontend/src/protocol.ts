// Wire types for the bridge protocol, version 1.  Field names and units
// mirror docs/protocol.md exactly: radians, metres, seconds everywhere.

export const PROTOCOL_VERSION = 1;

export type Point = [number, number];

export interface VehicleGeometry {
  l_f: number;
  l_r: number;
  l_f_bumper: number;
  width: number;
}

export interface ObstacleShape {
  outline: Point[]; // the four rectangle corners
  bound: Point[];   // sampled s = 0 contour
}

export interface HelloMessage {
  type: "hello";
  version: number;
  session: string;
  scenario: string;
  mode: "live" | "sim";
  assisted: boolean;
  t_s: number;
  alpha: number;
  delta_limit: number;
  speed: number;
  vehicle: VehicleGeometry;
  path: Point[];
  obstacles: ObstacleShape[];
  start: { x: number; y: number; heading: number };
}

export interface StateMessage {
  type: "state";
  tick: number;
  t: number;
  x: number;
  y: number;
  heading: number;
  delta_fbl: number;
  delta_ref: number;
  delta_applied: number;
  p_fl: number;
  p_fr: number;
  alpha: number;
  intervention: boolean;
  fault: boolean;
  overruns: number;
  client_ts: number | null;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = HelloMessage | StateMessage | ErrorMessage;

export function isHello(msg: unknown): msg is HelloMessage {
  const m = msg as HelloMessage;
  return (
    typeof m === "object" && m !== null &&
    m.type === "hello" &&
    typeof m.version === "number" &&
    typeof m.t_s === "number" &&
    typeof m.delta_limit === "number" &&
    Array.isArray(m.path) &&
    Array.isArray(m.obstacles)
  );
}

export function isState(msg: unknown): msg is StateMessage {
  const m = msg as StateMessage;
  return (
    typeof m === "object" && m !== null &&
    m.type === "state" &&
    typeof m.tick === "number" &&
    typeof m.x === "number" &&
    typeof m.delta_applied === "number"
  );
}

export function isError(msg: unknown): msg is ErrorMessage {
  const m = msg as ErrorMessage;
  return (
    typeof m === "object" && m !== null &&
    m.type === "error" &&
    typeof m.message === "string"
  );
}

export function parseServerMessage(raw: unknown): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(String(raw));
  } catch {
    return null;
  }
  if (isHello(data) || isState(data) || isError(data)) return data;
  return null;
}

// Steering input lives in [-1, 1] on the client and is scaled to the
// steering box by the server; both clamps exist so neither side trusts
// the other.

export function clampNormalized(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(1, Math.max(-1, value));
}

export function normalizedToRadians(value: number, deltaLimit: number): number {
  return clampNormalized(value) * deltaLimit;
}

export function steerMessage(normalized: number, clientTs?: number): object {
  const msg: { type: string; normalized: number; client_ts?: number } = {
    type: "steer",
    normalized: clampNormalized(normalized),
  };
  if (clientTs !== undefined) msg.client_ts = clientTs;
  return msg;
}
