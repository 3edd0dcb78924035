"""Semi-autonomous predictive steering corrector.

Every sampling instant the controller minimizes, over a horizon of future
steering angles, a cost that (a) keeps the first move close to the
operator's reference, (b) sums the obstacle potential at the predicted
front corners and (c) smooths the steering rate, subject to hard magnitude
and rate limits plus an upper bound on the potential at every predicted
corner.  The nonlinear problem is attacked by sequential quadratic
programming: dynamics are linearized along the operating trajectory and
condensed so the QP decision vector is just the steering sequence, the
potential cost gets a Gauss-Newton curvature (eigenvalue-clamped to be
convex), and the potential bound is linearized with one shared softening
slack.  At most three QP rounds per tick, warm-started by shifting the
previous tick's solution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np

from .field import FieldSpec
from .qp import DenseQpSolver, QuadProgram
from .vehicle import (
    VehicleParams,
    VehiclePose,
    euler_step,
    front_edge_jacobian,
    front_edges,
    linearize_step,
)

__all__ = [
    "MpcConfig",
    "SteeringProblem",
    "SteeringSolution",
    "SteeringController",
    "rollout",
    "cost_reference",
    "cost_potential",
    "cost_smoothness",
]

DEG = math.pi / 180.0


@dataclass(frozen=True)
class MpcConfig:
    """Controller tuning.  Angles in radians, times in seconds.

    alpha_cap None means "use the field's own boundary value", which makes
    the shape boundary itself the uncrossable level.
    """

    horizon: int = 12
    t_d: float = 0.2
    t_s: float = 0.05
    w_ref: float = 500.0
    w_field: float = 0.15
    w_rate: float = 200.0
    delta_min: float = -35.0 * DEG
    delta_max: float = 35.0 * DEG
    rate_min: float = -30.0 * DEG
    rate_max: float = 30.0 * DEG
    alpha_cap: float | None = None
    sqp_max_iter: int = 3
    sqp_tol: float = 1e-4
    slack_lin: float = 1e4
    slack_quad: float = 1e4

    def __post_init__(self) -> None:
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2")
        if self.t_d <= 0.0 or self.t_s <= 0.0:
            raise ValueError("time steps must be positive")
        if min(self.w_ref, self.w_field, self.w_rate) < 0.0:
            raise ValueError("weights must be nonnegative")
        if self.delta_min >= self.delta_max or self.rate_min >= self.rate_max:
            raise ValueError("bounds must be proper intervals")
        if self.sqp_max_iter < 1:
            raise ValueError("need at least one QP round")


@dataclass(frozen=True)
class SteeringProblem:
    """One tick's inputs: measured pose, operator reference, previously
    applied steering, speed, the obstacle field and vehicle geometry."""

    pose: VehiclePose
    delta_ref: float
    delta_prev: float
    v: float
    field: FieldSpec
    vehicle: VehicleParams

    def __post_init__(self) -> None:
        vals = (
            self.pose.x,
            self.pose.y,
            self.pose.heading,
            self.delta_ref,
            self.delta_prev,
            self.v,
        )
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("steering problem contains non-finite values")
        if abs(self.delta_ref) > math.pi / 2:
            raise ValueError("reference steering beyond +-pi/2")
        if self.v < 0.0:
            raise ValueError("speed must be nonnegative")


@dataclass
class SteeringSolution:
    """Optimized steering sequence plus everything a log line needs."""

    delta_seq: np.ndarray
    predicted_states: np.ndarray  # (N, 3)
    predicted_edges: np.ndarray  # (N, 4)
    cost_terms: tuple[float, float, float]  # (reference, potential, rate)
    sqp_iters: int
    qp_stats: list[dict]
    max_predicted_potential: float
    slack_used: bool
    solve_time: float
    fault: bool = False
    initial_operating_point: np.ndarray | None = None
    penalized_costs: list[float] = dataclass_field(default_factory=list)

    @property
    def delta0(self) -> float:
        return float(self.delta_seq[0])


def rollout(
    pose: VehiclePose,
    delta_seq: np.ndarray,
    v: float,
    t_d: float,
    params: VehicleParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Predicted states and front-corner outputs for a steering sequence.

    Row i holds the state/edges after i+1 prediction steps; the current
    pose itself is not included.
    """
    n = len(delta_seq)
    states = np.empty((n, 3))
    edges = np.empty((n, 4))
    cur = pose
    for i in range(n):
        cur = euler_step(cur, float(delta_seq[i]), v, t_d, params)
        states[i] = cur.as_array()
        edges[i] = front_edges(cur, params).as_array()
    return states, edges


def cost_reference(delta0: float, delta_ref: float, w_ref: float) -> float:
    """Quadratic penalty on the first move's deviation from the operator
    reference; later horizon entries are deliberately free."""
    err = delta0 - delta_ref
    return w_ref * err * err


def cost_potential(edges: np.ndarray, field: FieldSpec, w_field: float) -> float:
    """Potential summed at both front corners over the predicted horizon."""
    if field.empty or len(edges) == 0:
        return 0.0
    p_fl = np.asarray(field.value(edges[:, 0], edges[:, 1]))
    p_fr = np.asarray(field.value(edges[:, 2], edges[:, 3]))
    return float(w_field * (p_fl.sum() + p_fr.sum()))


def cost_smoothness(delta_seq: np.ndarray, w_rate: float) -> float:
    """Sum of squared consecutive steering differences."""
    d = np.diff(np.asarray(delta_seq, dtype=float))
    return float(w_rate * (d * d).sum())


def _max_potential(edges: np.ndarray, field: FieldSpec) -> float:
    if field.empty or len(edges) == 0:
        return 0.0
    p_fl = np.asarray(field.value(edges[:, 0], edges[:, 1]))
    p_fr = np.asarray(field.value(edges[:, 2], edges[:, 3]))
    return float(max(p_fl.max(), p_fr.max()))


def _psd_clamp(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * np.maximum(vals, 0.0)) @ vecs.T


class SteeringController:
    """Reusable per-session controller.  Single-threaded; distinct
    instances are fully independent."""

    def __init__(self, config: MpcConfig | None = None, qp_dump: Callable | None = None):
        self.config = config or MpcConfig()
        self.solver = DenseQpSolver()
        self.qp_dump = qp_dump

    # -- cost bookkeeping ---------------------------------------------

    def _alpha_cap(self, problem: SteeringProblem) -> float:
        if self.config.alpha_cap is not None:
            return self.config.alpha_cap
        return problem.field.alpha

    def _penalized(self, seq: np.ndarray, problem: SteeringProblem):
        cfg = self.config
        states, edges = rollout(problem.pose, seq, problem.v, cfg.t_d, problem.vehicle)
        terms = (
            cost_reference(float(seq[0]), problem.delta_ref, cfg.w_ref),
            cost_potential(edges, problem.field, cfg.w_field),
            cost_smoothness(seq, cfg.w_rate),
        )
        max_p = _max_potential(edges, problem.field)
        viol = max(0.0, max_p - self._alpha_cap(problem))
        total = sum(terms) + cfg.slack_lin * viol + cfg.slack_quad * viol * viol
        return total, terms, max_p, states, edges

    # -- hard-constraint helpers --------------------------------------

    def _first_step_window(self, delta_prev: float) -> tuple[float, float]:
        cfg = self.config
        lo = max(cfg.delta_min, delta_prev + cfg.rate_min * cfg.t_s)
        hi = min(cfg.delta_max, delta_prev + cfg.rate_max * cfg.t_s)
        return lo, hi

    def _clip_feasible(self, seq: np.ndarray, delta_prev: float) -> np.ndarray:
        """Forward pass clipping the sequence into the hard magnitude and
        rate limits; always succeeds because the windows chain."""
        cfg = self.config
        out = np.asarray(seq, dtype=float).copy()
        lo, hi = self._first_step_window(delta_prev)
        out[0] = min(max(out[0], lo), hi)
        for i in range(1, len(out)):
            lo = max(cfg.delta_min, out[i - 1] + cfg.rate_min * cfg.t_d)
            hi = min(cfg.delta_max, out[i - 1] + cfg.rate_max * cfg.t_d)
            out[i] = min(max(out[i], lo), hi)
        return out

    def _hard_feasible(self, seq: np.ndarray, delta_prev: float, tol: float = 1e-9) -> bool:
        cfg = self.config
        if np.any(seq < cfg.delta_min - tol) or np.any(seq > cfg.delta_max + tol):
            return False
        first_rate = (seq[0] - delta_prev) / cfg.t_s
        if not cfg.rate_min - tol <= first_rate <= cfg.rate_max + tol:
            return False
        rates = np.diff(seq) / cfg.t_d
        if len(rates) and (
            np.any(rates < cfg.rate_min - tol) or np.any(rates > cfg.rate_max + tol)
        ):
            return False
        return True

    def _sanitize(self, seq: np.ndarray, delta_prev: float) -> np.ndarray:
        """Exact final clip: magnitude bounds on every entry, the actuation
        rate window on the first.  Moves nothing beyond solver tolerance."""
        cfg = self.config
        out = np.clip(np.asarray(seq, dtype=float), cfg.delta_min, cfg.delta_max)
        lo, hi = self._first_step_window(delta_prev)
        out[0] = min(max(out[0], lo), hi)
        return out

    # -- QP assembly ---------------------------------------------------

    def _assemble(self, op: np.ndarray, problem: SteeringProblem):
        cfg = self.config
        n = cfg.horizon
        with_slack = not problem.field.empty
        nz = n + 1 if with_slack else n
        alpha_cap = self._alpha_cap(problem)

        states, edges = rollout(problem.pose, op, problem.v, cfg.t_d, problem.vehicle)

        H = np.zeros((nz, nz))
        g = np.zeros(nz)

        H[0, 0] += 2.0 * cfg.w_ref
        g[0] += -2.0 * cfg.w_ref * problem.delta_ref

        diff = np.zeros((n - 1, n))
        idx = np.arange(n - 1)
        diff[idx, idx] = -1.0
        diff[idx, idx + 1] = 1.0
        H[:n, :n] += 2.0 * cfg.w_rate * diff.T @ diff

        rows: list[np.ndarray] = []
        rhs: list[float] = []

        # actuation rate limits: the first step spans one sampling period,
        # later steps span one prediction interval
        first = np.zeros(nz)
        first[0] = 1.0
        rows.append(first)
        rhs.append(problem.delta_prev + cfg.rate_max * cfg.t_s)
        rows.append(-first)
        rhs.append(-(problem.delta_prev + cfg.rate_min * cfg.t_s))
        for i in range(1, n):
            row = np.zeros(nz)
            row[i] = 1.0
            row[i - 1] = -1.0
            rows.append(row)
            rhs.append(cfg.rate_max * cfg.t_d)
            rows.append(-row)
            rhs.append(-cfg.rate_min * cfg.t_d)

        if with_slack:
            H[n, n] += 2.0 * cfg.slack_quad
            g[n] += cfg.slack_lin

            # input-to-state sensitivities along the operating trajectory
            sens = np.zeros((3, n))
            prev_pose = problem.pose
            sens_list = []
            for i in range(n):
                A, B, _ = linearize_step(
                    prev_pose, float(op[i]), problem.v, cfg.t_d, problem.vehicle
                )
                sens = A @ sens
                sens[:, i] += B[:, 0]
                sens_list.append(sens.copy())
                prev_pose = VehiclePose.from_array(states[i])

            for i in range(n):
                pose_i = VehiclePose.from_array(states[i])
                edge_jac = front_edge_jacobian(pose_i, problem.vehicle) @ sens_list[i]
                for lo_col in (0, 2):  # front-left then front-right corner
                    px, py = edges[i, lo_col], edges[i, lo_col + 1]
                    M = edge_jac[lo_col : lo_col + 2]  # (2, n)
                    grad = np.array(problem.field.gradient(px, py))
                    curv = _psd_clamp(problem.field.hessian_matrix(px, py))
                    K = cfg.w_field * (M.T @ curv @ M)
                    H[:n, :n] += K
                    g[:n] += cfg.w_field * (M.T @ grad) - K @ op

                    p_val = float(problem.field.value(px, py))
                    row = np.zeros(nz)
                    row[:n] = grad @ M
                    row[n] = -1.0
                    rows.append(row)
                    rhs.append(alpha_cap - p_val + float(grad @ M @ op))

        lb = np.full(nz, cfg.delta_min)
        ub = np.full(nz, cfg.delta_max)
        if with_slack:
            lb[n] = 0.0
            ub[n] = np.inf

        qp = QuadProgram(
            H=H, g=g, A_ineq=np.array(rows), b_ineq=np.array(rhs), lb=lb, ub=ub
        )

        # feasible warm start: clipped operating point plus whatever slack
        # the linearized potential rows need at it
        z0 = np.zeros(nz)
        z0[:n] = self._clip_feasible(op, problem.delta_prev)
        if with_slack:
            lin = np.array(rows) @ z0 - np.array(rhs)
            z0[n] = max(0.0, float(lin[2 * n :].max(initial=0.0)))
        return qp, z0, with_slack

    # -- main entry ----------------------------------------------------

    def solve(
        self, problem: SteeringProblem, warm: SteeringSolution | None = None
    ) -> SteeringSolution:
        t_start = time.perf_counter()
        cfg = self.config
        n = cfg.horizon

        if warm is not None and len(warm.delta_seq) == n:
            op = np.concatenate([warm.delta_seq[1:], warm.delta_seq[-1:]])
        else:
            op = np.zeros(n)
        initial_op = op.copy()

        op_feasible = self._hard_feasible(op, problem.delta_prev)
        qp_stats: list[dict] = []
        penalized: list[float] = []
        fault = False
        iters = 0

        for k in range(cfg.sqp_max_iter):
            qp, z0, with_slack = self._assemble(op, problem)
            if self.qp_dump is not None:
                self.qp_dump(k, qp)
            sol = self.solver.solve(qp, warm_start=z0)
            iters = k + 1
            qp_stats.append(
                {
                    "status": sol.status,
                    "iterations": sol.iterations,
                    "kkt_residual": sol.kkt_residual,
                    "slack": float(sol.z[n]) if with_slack else 0.0,
                }
            )
            if sol.status == "infeasible":
                fault = True
                break

            proposal = self._sanitize(sol.z[:n], problem.delta_prev)

            if k == 0 and not op_feasible:
                # entering the feasible set: nothing comparable to safeguard
                # against yet
                accepted = proposal
                cost_acc = self._penalized(accepted, problem)[0]
            else:
                ref_cost = penalized[-1] if penalized else self._penalized(op, problem)[0]
                gate = ref_cost * (1.0 + 1e-9) + 1e-12
                cand = proposal
                cost_cand = self._penalized(cand, problem)[0]
                if cost_cand > gate:
                    best, best_cost = cand, cost_cand
                    for _ in range(4):
                        cand = self._sanitize(0.5 * (cand + op), problem.delta_prev)
                        cost_cand = self._penalized(cand, problem)[0]
                        if cost_cand < best_cost:
                            best, best_cost = cand, cost_cand
                    if best_cost > gate:
                        # no candidate improves; keep the operating point
                        penalized.append(ref_cost)
                        break
                    accepted, cost_acc = best, best_cost
                else:
                    accepted, cost_acc = cand, cost_cand

            step = float(np.abs(accepted - op).max())
            op = accepted
            op_feasible = True
            penalized.append(cost_acc)
            if step < cfg.sqp_tol:
                break

        if fault:
            final = self._sanitize(self._clip_feasible(initial_op, problem.delta_prev),
                                   problem.delta_prev)
        else:
            final = op
        _, terms, max_p, states, edges = self._penalized(final, problem)

        return SteeringSolution(
            delta_seq=final,
            predicted_states=states,
            predicted_edges=edges,
            cost_terms=terms,
            sqp_iters=iters,
            qp_stats=qp_stats,
            max_predicted_potential=max_p,
            slack_used=max_p - self._alpha_cap(problem) > 1e-6,
            solve_time=time.perf_counter() - t_start,
            fault=fault,
            initial_operating_point=initial_op,
            penalized_costs=penalized,
        )
