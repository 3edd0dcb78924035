import type { HelloMessage, StateMessage } from "./protocol";
import { clampNormalized } from "./protocol";

export type ConnectionState = "connecting" | "connected" | "closed";

// Fixed-capacity ring buffer for the strip charts: O(1) push, oldest
// samples fall off the far end.
export class RingBuffer<T> {
  private readonly slots: (T | undefined)[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be at least 1");
    this.slots = new Array(capacity);
  }

  push(item: T): void {
    this.slots[(this.head + this.count) % this.capacity] = item;
    if (this.count < this.capacity) {
      this.count++;
    } else {
      this.head = (this.head + 1) % this.capacity;
    }
  }

  get length(): number {
    return this.count;
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }

  toArray(): T[] {
    const out: T[] = [];
    for (let i = 0; i < this.count; i++) {
      out.push(this.slots[(this.head + i) % this.capacity] as T);
    }
    return out;
  }
}

export interface SteeringSample {
  t: number;
  ref: number;
  applied: number;
}

export interface PotentialSample {
  t: number;
  fl: number;
  fr: number;
}

export interface EdgePair {
  flx: number;
  fly: number;
  frx: number;
  fry: number;
}

export interface Camera {
  centerX: number;
  centerY: number;
  pixelsPerMeter: number;
}

// Everything render_frame needs, fed exclusively by server messages.
// The view model never integrates dynamics itself; the only derived
// geometry is the front-corner trail, computed from received poses and
// the hello-message vehicle dimensions.
export class CockpitViewModel {
  connection: ConnectionState = "connecting";
  hello: HelloMessage | null = null;
  latest: StateMessage | null = null;
  staleDropped = 0;
  input = 0; // normalized steering in [-1, 1]
  readonly steering: RingBuffer<SteeringSample>;
  readonly potentials: RingBuffer<PotentialSample>;
  readonly trail: RingBuffer<EdgePair>;
  camera: Camera = { centerX: 0, centerY: 0, pixelsPerMeter: 18 };

  constructor(chartCapacity = 400) {
    this.steering = new RingBuffer(chartCapacity);
    this.potentials = new RingBuffer(chartCapacity);
    this.trail = new RingBuffer(chartCapacity);
  }

  applyHello(msg: HelloMessage): void {
    this.hello = msg;
    this.connection = "connected";
    this.clearRun();
    this.camera = {
      centerX: msg.start.x,
      centerY: msg.start.y,
      pixelsPerMeter: this.camera.pixelsPerMeter,
    };
  }

  // Rendered tick never decreases: frames arriving late or duplicated
  // are counted and dropped, never shown.
  applyState(msg: StateMessage): boolean {
    if (this.latest !== null && msg.tick <= this.latest.tick) {
      this.staleDropped++;
      return false;
    }
    this.latest = msg;
    this.steering.push({ t: msg.t, ref: msg.delta_ref, applied: msg.delta_applied });
    this.potentials.push({ t: msg.t, fl: msg.p_fl, fr: msg.p_fr });
    if (this.hello) {
      this.trail.push(frontEdges(msg, this.hello.vehicle));
    }
    this.camera = {
      centerX: msg.x,
      centerY: msg.y,
      pixelsPerMeter: this.camera.pixelsPerMeter,
    };
    return true;
  }

  // Called when the user requests a reset, so the next run's tick 0 is
  // accepted again.
  clearRun(): void {
    this.latest = null;
    this.steering.clear();
    this.potentials.clear();
    this.trail.clear();
  }

  setInput(value: number): void {
    this.input = clampNormalized(value);
  }

  steerRadians(): number {
    return this.hello ? this.input * this.hello.delta_limit : 0;
  }

  markClosed(): void {
    this.connection = "closed";
  }

  latencyMs(nowMs: number): number | null {
    const ts = this.latest?.client_ts;
    if (ts === null || ts === undefined) return null;
    return nowMs - ts;
  }
}

export function frontEdges(
  pose: { x: number; y: number; heading: number },
  vehicle: { l_f_bumper: number; width: number },
): EdgePair {
  const c = Math.cos(pose.heading);
  const s = Math.sin(pose.heading);
  const lf = vehicle.l_f_bumper;
  const hw = vehicle.width / 2;
  return {
    flx: pose.x + lf * c - hw * s,
    fly: pose.y + lf * s + hw * c,
    frx: pose.x + lf * c + hw * s,
    fry: pose.y + lf * s - hw * c,
  };
}
