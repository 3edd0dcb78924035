import { clampNormalized } from "./protocol";

export type SteeringSource = "keyboard" | "slider" | "gamepad";

// Keyboard steering is incremental, like trim: arrows nudge the value
// and it stays where you leave it.  KeyC recenters.  The advance step
// is pure so it can be tested without a DOM.
export class KeyboardSteering {
  private readonly held = new Set<string>();

  constructor(readonly ratePerSecond = 1.6) {}

  keydown(code: string): void {
    this.held.add(code);
  }

  keyup(code: string): void {
    this.held.delete(code);
  }

  blur(): void {
    this.held.clear();
  }

  advance(value: number, dtSeconds: number): number {
    if (this.held.has("KeyC")) return 0;
    const left = this.held.has("ArrowLeft") || this.held.has("KeyA") ? 1 : 0;
    const right = this.held.has("ArrowRight") || this.held.has("KeyD") ? 1 : 0;
    // steering left is positive, matching the vehicle's heading convention
    return clampNormalized(value + (left - right) * this.ratePerSecond * dtSeconds);
  }
}

// Gamepad axis 0 reads positive to the right; flip it so full left
// stick means full left steering.
export function gamepadSteering(axisValue: number, deadzone = 0.08): number {
  if (Math.abs(axisValue) < deadzone) return 0;
  return clampNormalized(-axisValue);
}

// At most one steer message leaves per client frame, and only when the
// value actually changed; between flushes the latest set() wins.
export class SteeringEmitter {
  private pending: number | null = null;
  private lastSent: number | null = null;

  set(value: number): void {
    this.pending = clampNormalized(value);
  }

  flush(): number | null {
    if (this.pending === null || this.pending === this.lastSent) {
      this.pending = null;
      return null;
    }
    this.lastSent = this.pending;
    this.pending = null;
    return this.lastSent;
  }

  reset(): void {
    this.pending = null;
    this.lastSent = null;
  }
}
