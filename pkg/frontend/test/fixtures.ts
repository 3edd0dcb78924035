import type { HelloMessage, StateMessage } from "../src/protocol";

export function makeHello(overrides: Partial<HelloMessage> = {}): HelloMessage {
  return {
    type: "hello",
    version: 1,
    session: "abc123def456",
    scenario: "parking_lot",
    mode: "live",
    assisted: true,
    t_s: 0.05,
    alpha: 1.0,
    delta_limit: 0.6108652381980153,
    speed: 3.0,
    vehicle: { l_f: 1.3, l_r: 1.5, l_f_bumper: 2.1, width: 1.8 },
    path: [[-2, 0], [70, 0]],
    obstacles: [
      {
        outline: [[14.3, -1.3], [14.3, -3.1], [9.7, -3.1], [9.7, -1.3]],
        bound: [[14.7, -2.2], [12.0, -1.0], [9.3, -2.2], [12.0, -3.4]],
      },
    ],
    start: { x: 0, y: 0, heading: 0 },
    ...overrides,
  };
}

export function makeState(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    type: "state",
    tick: 0,
    t: 0,
    x: 0,
    y: 0,
    heading: 0,
    delta_fbl: 0,
    delta_ref: 0,
    delta_applied: 0,
    p_fl: 0.01,
    p_fr: 0.02,
    alpha: 1.0,
    intervention: false,
    fault: false,
    overruns: 0,
    client_ts: null,
    ...overrides,
  };
}
