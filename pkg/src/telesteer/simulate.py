"""Closed-loop scenario execution.

One engine instance owns one run: the synthetic teleoperator (or a live
override fed in by the service layer) produces the steering reference,
the predictive corrector turns it into an applied angle when assistance
is on, and the plant integrates one sampling period with the higher-order
stepper.  The same tick method drives both batch runs and live sessions,
so their behavior is identical by construction.
"""

from __future__ import annotations

import math
import statistics

from .mpc import SteeringController, SteeringProblem
from .scenarios import Scenario
from .simtrace import SimTrace, TickRecord
from .teleop import TeleopTracker
from .vehicle import front_edges, rk4_step

__all__ = [
    "SimEngine",
    "run_scenario",
    "final_line_offset",
    "benchmark",
]


class SimEngine:
    """Stateful tick-by-tick runner for one scenario instance."""

    def __init__(self, scenario: Scenario, assisted: bool, seed: int = 0) -> None:
        self.scenario = scenario
        self.assisted = assisted
        self.field = scenario.field_spec()
        self.tracker = TeleopTracker(scenario.desired_path(), scenario.gains)
        self.controller = SteeringController(scenario.mpc)
        self.pose = scenario.start
        self.v = scenario.speed
        self.delta_applied = 0.0
        self.warm = None
        self.tick_index = 0
        self.fault = False
        self.overruns = 0
        self.trace = SimTrace(
            scenario_name=scenario.name,
            scenario_hash=scenario.content_hash(),
            scenario_json=scenario.canonical_json(),
            assisted=assisted,
            seed=seed,
            t_s=scenario.mpc.t_s,
        )

    def _clip_applied(self, delta: float) -> float:
        cfg = self.scenario.mpc
        lo = max(cfg.delta_min, self.delta_applied + cfg.rate_min * cfg.t_s)
        hi = min(cfg.delta_max, self.delta_applied + cfg.rate_max * cfg.t_s)
        return min(max(delta, lo), hi)

    def tick(
        self,
        delta_ref_override: float | None = None,
        enforce_deadline: bool = False,
    ) -> TickRecord:
        """Advance one sampling period and append the trace record.

        delta_ref_override replaces the synthetic teleoperator (live
        sessions); it is clamped to the steering magnitude bounds.  With
        enforce_deadline set, a solve running longer than the sampling
        period keeps the previously applied steering for this tick and
        counts an overrun instead of pretending the result arrived in
        time.
        """
        cfg = self.scenario.mpc
        t_now = self.tick_index * cfg.t_s

        if delta_ref_override is None:
            delta_fbl, delta_ref = self.tracker.reference_parts(
                self.pose, self.v, self.delta_applied
            )
        else:
            delta_ref = min(max(delta_ref_override, cfg.delta_min), cfg.delta_max)
            delta_fbl = delta_ref

        cost_terms = (0.0, 0.0, 0.0)
        sqp_iters = 0
        slack_used = False
        solve_time = 0.0

        if self.assisted and not self.fault:
            problem = SteeringProblem(
                pose=self.pose,
                delta_ref=delta_ref,
                delta_prev=self.delta_applied,
                v=self.v,
                field=self.field,
                vehicle=self.scenario.vehicle,
            )
            sol = self.controller.solve(problem, warm=self.warm)
            self.warm = sol
            cost_terms = sol.cost_terms
            sqp_iters = sol.sqp_iters
            slack_used = sol.slack_used
            solve_time = sol.solve_time
            if sol.fault:
                self.fault = True
                self.v = 0.0
                applied = self._clip_applied(sol.delta0)
            elif enforce_deadline and solve_time > cfg.t_s:
                self.overruns += 1
                applied = self.delta_applied
            else:
                applied = sol.delta0
        else:
            applied = self._clip_applied(delta_ref)

        edges = front_edges(self.pose, self.scenario.vehicle)
        p_fl = float(self.field.value(edges.x_fl, edges.y_fl))
        p_fr = float(self.field.value(edges.x_fr, edges.y_fr))

        record = TickRecord(
            t=t_now,
            x=self.pose.x,
            y=self.pose.y,
            heading=self.pose.heading,
            delta_fbl=delta_fbl,
            delta_ref=delta_ref,
            delta_applied=applied,
            p_fl=p_fl,
            p_fr=p_fr,
            cost_ref=cost_terms[0],
            cost_field=cost_terms[1],
            cost_rate=cost_terms[2],
            sqp_iters=sqp_iters,
            slack_used=slack_used,
            solve_time=solve_time,
            fault=self.fault,
        )
        self.trace.append(record)

        self.pose = rk4_step(
            self.pose, applied, self.v, cfg.t_s, self.scenario.vehicle
        )
        self.delta_applied = applied
        self.tick_index += 1
        return record


def run_scenario(scenario: Scenario, assisted: bool, seed: int = 0) -> SimTrace:
    """Execute a full run and return its trace."""
    engine = SimEngine(scenario, assisted=assisted, seed=seed)
    for _ in range(scenario.n_ticks):
        engine.tick()
    return engine.trace


def final_line_offset(scenario: Scenario, trace: SimTrace) -> float:
    """Signed lateral distance from the last logged pose to the line
    carrying the final path segment."""
    if not trace.records:
        raise ValueError("empty trace")
    last = trace.records[-1]
    return scenario.desired_path().final_line_offset(last.x, last.y)


def benchmark(scenario: Scenario, ticks: int) -> dict:
    """Wall-clock summary of the per-tick solve in an assisted run.

    Runs the closed loop for the requested number of ticks regardless of
    the scenario's nominal duration; logging cost is excluded because the
    solve is timed inside the controller.
    """
    if ticks < 100:
        raise ValueError("benchmark needs at least 100 ticks")
    engine = SimEngine(scenario, assisted=True)
    times = []
    for _ in range(ticks):
        record = engine.tick()
        times.append(record.solve_time)
    ordered = sorted(times)
    return {
        "ticks": ticks,
        "median_s": statistics.median(times),
        "p95_s": ordered[min(len(ordered) - 1, int(math.ceil(0.95 * len(ordered))) - 1)],
        "max_s": max(times),
        "mean_s": statistics.fmean(times),
    }
