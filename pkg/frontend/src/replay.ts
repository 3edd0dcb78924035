import type { HelloMessage, ObstacleShape, Point, StateMessage } from "./protocol";
import { PROTOCOL_VERSION } from "./protocol";

// Reader for the headless run trace format, so the cockpit doubles as a
// figure viewer: load a trace, scrub through it, and see exactly what a
// live session would have shown.

export const TRACE_COLUMNS = [
  "t", "x", "y", "heading",
  "delta_fbl", "delta_ref", "delta_applied",
  "p_fl", "p_fr",
  "cost_ref", "cost_field", "cost_rate",
  "sqp_iters", "slack_used", "solve_time", "fault",
] as const;

const FORMAT_NAME = "telesteer-trace";
const FORMAT_VERSION = "1";
const INTERVENTION_RAD = (0.5 * Math.PI) / 180;

export interface TraceRecord {
  t: number;
  x: number;
  y: number;
  heading: number;
  delta_fbl: number;
  delta_ref: number;
  delta_applied: number;
  p_fl: number;
  p_fr: number;
  cost_ref: number;
  cost_field: number;
  cost_rate: number;
  sqp_iters: number;
  slack_used: boolean;
  solve_time: number;
  fault: boolean;
}

export interface ParsedTrace {
  scenarioName: string;
  scenarioHash: string;
  scenario: any; // the embedded canonical scenario object
  assisted: boolean;
  seed: number;
  tS: number;
  records: TraceRecord[];
}

export function parseTrace(text: string): ParsedTrace {
  const meta: Record<string, string> = {};
  const records: TraceRecord[] = [];
  let versionSeen = false;

  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (line === "") continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      if (body.startsWith(FORMAT_NAME)) {
        const ver = body.slice(FORMAT_NAME.length).trim();
        if (ver !== FORMAT_VERSION) {
          throw new Error(`unsupported trace version ${ver}`);
        }
        versionSeen = true;
      } else {
        const colon = body.indexOf(":");
        if (colon >= 0) {
          meta[body.slice(0, colon).trim()] = body.slice(colon + 1).trim();
        }
      }
      continue;
    }
    if (!versionSeen) throw new Error("not a trace file: missing format line");
    records.push(parseRecordLine(line));
  }
  if (!versionSeen) throw new Error("not a trace file: missing format line");
  if (meta["columns"] !== TRACE_COLUMNS.join(" ")) {
    throw new Error("trace column layout does not match this reader");
  }

  return {
    scenarioName: meta["scenario-name"] ?? "",
    scenarioHash: meta["scenario-hash"] ?? "",
    scenario: meta["scenario-json"] ? JSON.parse(meta["scenario-json"]) : null,
    assisted: meta["assisted"] === "1",
    seed: parseInt(meta["seed"] ?? "0", 10),
    tS: parseFloat(meta["tick"] ?? "0.05"),
    records,
  };
}

function parseRecordLine(line: string): TraceRecord {
  const parts = line.split(/\s+/);
  if (parts.length !== TRACE_COLUMNS.length) {
    throw new Error(
      `trace line has ${parts.length} fields, expected ${TRACE_COLUMNS.length}`,
    );
  }
  const num = (i: number) => Number(parts[i]);
  return {
    t: num(0), x: num(1), y: num(2), heading: num(3),
    delta_fbl: num(4), delta_ref: num(5), delta_applied: num(6),
    p_fl: num(7), p_fr: num(8),
    cost_ref: num(9), cost_field: num(10), cost_rate: num(11),
    sqp_iters: parseInt(parts[12], 10),
    slack_used: parts[13] === "1",
    solve_time: num(14),
    fault: parts[15] === "1",
  };
}

// Displayed obstacle geometry, rebuilt from the scenario embedded in
// the trace header.  Mirrors the documented bound construction: the
// superellipse through all four rectangle corners has semi-axes scaled
// by 2^(1/n).
export function superellipseOutline(
  length: number, width: number, order: number, samples = 96,
): Point[] {
  const f = Math.pow(2, 1 / order);
  const a = (f * length) / 2;
  const b = (f * width) / 2;
  const exp = 2 / order;
  const pts: Point[] = [];
  for (let i = 0; i < samples; i++) {
    const th = (2 * Math.PI * i) / samples;
    const c = Math.cos(th);
    const s = Math.sin(th);
    pts.push([
      a * Math.sign(c) * Math.pow(Math.abs(c), exp),
      b * Math.sign(s) * Math.pow(Math.abs(s), exp),
    ]);
  }
  return pts;
}

function placed(points: Point[], x: number, y: number, heading: number): Point[] {
  const c = Math.cos(heading);
  const s = Math.sin(heading);
  return points.map(([u, w]) => [x + u * c - w * s, y + u * s + w * c]);
}

export function helloFromTrace(trace: ParsedTrace): HelloMessage {
  const sc = trace.scenario;
  if (!sc) throw new Error("trace has no embedded scenario");
  const obstacles: ObstacleShape[] = (sc.obstacles ?? []).map((o: any) => {
    const hl = o.length / 2;
    const hw = o.width / 2;
    const corners: Point[] = [[hl, hw], [hl, -hw], [-hl, -hw], [-hl, hw]];
    return {
      outline: placed(corners, o.x, o.y, o.heading),
      bound: placed(
        superellipseOutline(o.length, o.width, sc.field.order), o.x, o.y, o.heading,
      ),
    };
  });
  return {
    type: "hello",
    version: PROTOCOL_VERSION,
    session: "replay",
    scenario: trace.scenarioName,
    mode: "sim",
    assisted: trace.assisted,
    t_s: trace.tS,
    alpha: sc.field.alpha,
    delta_limit: sc.mpc.delta_max,
    speed: sc.speed,
    vehicle: sc.vehicle,
    path: sc.path,
    obstacles,
    start: sc.start,
  };
}

// Replay frames reuse the live state-message shape so the render path
// is identical; the intervention rule is the same one the service
// applies.
export function recordToState(rec: TraceRecord, tick: number, alpha: number): StateMessage {
  return {
    type: "state",
    tick,
    t: rec.t,
    x: rec.x,
    y: rec.y,
    heading: rec.heading,
    delta_fbl: rec.delta_fbl,
    delta_ref: rec.delta_ref,
    delta_applied: rec.delta_applied,
    p_fl: rec.p_fl,
    p_fr: rec.p_fr,
    alpha,
    intervention: Math.abs(rec.delta_applied - rec.delta_ref) > INTERVENTION_RAD,
    fault: rec.fault,
    overruns: 0,
    client_ts: null,
  };
}

export class ReplayScrubber {
  private index = 0;

  constructor(readonly trace: ParsedTrace) {
    if (trace.records.length === 0) throw new Error("trace has no ticks");
  }

  get length(): number {
    return this.trace.records.length;
  }

  get position(): number {
    return this.index;
  }

  seek(i: number): number {
    this.index = Math.min(this.length - 1, Math.max(0, Math.floor(i)));
    return this.index;
  }

  stepBy(n: number): number {
    return this.seek(this.index + n);
  }

  frame(): StateMessage {
    const alpha = this.trace.scenario?.field?.alpha ?? 1;
    return recordToState(this.trace.records[this.index], this.index, alpha);
  }
}
