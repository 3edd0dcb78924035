import { describe, expect, it } from "vitest";

import { KeyboardSteering, SteeringEmitter, gamepadSteering } from "../src/input";

describe("KeyboardSteering", () => {
  it("nudges incrementally and holds where released", () => {
    const kb = new KeyboardSteering(2.0);
    kb.keydown("ArrowLeft");
    let v = kb.advance(0, 0.1);
    expect(v).toBeCloseTo(0.2, 12);
    kb.keyup("ArrowLeft");
    expect(kb.advance(v, 0.1)).toBeCloseTo(0.2, 12); // stays put
  });

  it("opposite keys cancel; C recenters; WASD works", () => {
    const kb = new KeyboardSteering(2.0);
    kb.keydown("KeyA");
    kb.keydown("KeyD");
    expect(kb.advance(0.3, 0.1)).toBeCloseTo(0.3, 12);
    kb.keydown("KeyC");
    expect(kb.advance(0.3, 0.1)).toBe(0);
  });

  it("clamps at full lock", () => {
    const kb = new KeyboardSteering(10.0);
    kb.keydown("ArrowRight");
    expect(kb.advance(0, 1.0)).toBe(-1);
    kb.blur();
    expect(kb.advance(-1, 1.0)).toBe(-1);
  });
});

describe("gamepadSteering", () => {
  it("applies the deadzone and flips stick-right to steer-right", () => {
    expect(gamepadSteering(0.03)).toBe(0);
    expect(gamepadSteering(-0.02)).toBe(0);
    expect(gamepadSteering(0.5)).toBe(-0.5); // stick right = negative steer
    expect(gamepadSteering(-1.0)).toBe(1.0);
    expect(gamepadSteering(1.7)).toBe(-1.0);
  });
});

describe("SteeringEmitter", () => {
  it("sends at most one value per flush, latest wins", () => {
    const em = new SteeringEmitter();
    em.set(0.1);
    em.set(0.2);
    em.set(0.3);
    expect(em.flush()).toBe(0.3);
    expect(em.flush()).toBeNull(); // nothing new
  });

  it("suppresses resends of the same value", () => {
    const em = new SteeringEmitter();
    em.set(0.5);
    expect(em.flush()).toBe(0.5);
    em.set(0.5);
    expect(em.flush()).toBeNull();
    em.set(0.6);
    expect(em.flush()).toBe(0.6);
  });

  it("clamps what it will send and resets cleanly", () => {
    const em = new SteeringEmitter();
    em.set(5);
    expect(em.flush()).toBe(1);
    em.reset();
    em.set(1);
    expect(em.flush()).toBe(1); // resend allowed after reset
  });
});
