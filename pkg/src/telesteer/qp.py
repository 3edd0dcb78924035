"""Dense convex quadratic programming by a primal active-set method.

Solves  min 1/2 z'Hz + g'z  subject to  A z <= b  and box bounds on z.
Problems here are small (a dozen variables, a few dozen rows), dense, and
solved thousands of times in a row with good warm starts, which is the
sweet spot for an active-set method: a warm start near the optimum
finishes in one or two iterations, and pivoting is deterministic.

Constraint indexing is uniform: rows [0, m) are the general inequalities,
rows [m, m+n) the upper bounds z_i <= ub_i, rows [m+n, m+2n) the lower
bounds -z_i <= -lb_i.  Multipliers and the active set are reported in that
numbering.  Infinite bounds occupy their slot but can never activate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["QuadProgram", "QpSolution", "DenseQpSolver"]

_FEAS_TOL = 1e-10
_ZERO_STEP = 1e-11
_MULT_TOL = 1e-10
_PHASE1_TOL = 1e-9


@dataclass
class QuadProgram:
    """One dense QP.  H must be symmetric; it is regularized to be positive
    definite before solving if its smallest eigenvalue falls below 1e-8.
    A_ineq rows encode A z <= b.  lb/ub entries may be +-inf.
    """

    H: np.ndarray
    g: np.ndarray
    A_ineq: np.ndarray | None = None
    b_ineq: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.H = np.asarray(self.H, dtype=float)
        self.g = np.asarray(self.g, dtype=float).ravel()
        n = self.g.size
        if self.H.shape != (n, n):
            raise ValueError("H must be n x n matching g")
        scale = max(1.0, float(np.abs(self.H).max()))
        if float(np.abs(self.H - self.H.T).max()) > 1e-12 * scale:
            raise ValueError("H must be symmetric")
        if self.A_ineq is None:
            self.A_ineq = np.zeros((0, n))
            self.b_ineq = np.zeros(0)
        else:
            self.A_ineq = np.asarray(self.A_ineq, dtype=float).reshape(-1, n)
            self.b_ineq = np.asarray(self.b_ineq, dtype=float).ravel()
            if self.b_ineq.size != self.A_ineq.shape[0]:
                raise ValueError("b_ineq length must match A_ineq rows")
        self.lb = (
            np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        )
        self.ub = (
            np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel()
        )
        if self.lb.size != n or self.ub.size != n:
            raise ValueError("bound vectors must have length n")
        if np.any(self.lb > self.ub):
            raise ValueError("lb must not exceed ub")

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def m(self) -> int:
        return self.A_ineq.shape[0]


@dataclass
class QpSolution:
    """Minimizer plus diagnostics.  active_set/lagrange use the combined row
    numbering documented in the module docstring; objective_history tracks
    the (regularized) objective along the final optimization phase."""

    z: np.ndarray
    status: str  # "optimal" | "max_iter" | "infeasible"
    active_set: list[int] = field(default_factory=list)
    lagrange: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    kkt_residual: float = np.inf
    objective_history: list[float] = field(default_factory=list)
    certificate: np.ndarray | None = None


def _combined_rows(qp: QuadProgram) -> tuple[np.ndarray, np.ndarray]:
    n, m = qp.n, qp.m
    eye = np.eye(n)
    A = np.vstack([qp.A_ineq, eye, -eye])
    b = np.concatenate([qp.b_ineq, qp.ub, -qp.lb])
    return A, b


class DenseQpSolver:
    """Primal active-set solver instance.

    Holds no state across calls beyond configuration, so solving the same
    problem twice gives bit-identical results.  One instance per control
    session; instances are independent.
    """

    def __init__(self, big_m: float = 1e8, max_iter_factor: int = 10):
        self.big_m = big_m
        self.max_iter_factor = max_iter_factor

    # -- public API ----------------------------------------------------

    def solve(self, qp: QuadProgram, warm_start: np.ndarray | None = None) -> QpSolution:
        n = qp.n
        H = self._regularized(qp.H)
        A, b = _combined_rows(qp)

        z0 = np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=float).ravel().copy()
        z0 = np.clip(z0, qp.lb, qp.ub)

        general = A[: qp.m]
        viol = float((general @ z0 - b[: qp.m]).max()) if qp.m else 0.0
        if viol > _FEAS_TOL:
            z0, phase1 = self._phase1(H, qp, z0)
            if z0 is None:
                return phase1
        return self._primal(H, qp.g, A, b, z0, cap=self._cap(n, A.shape[0]))

    # -- internals -----------------------------------------------------

    def _cap(self, n: int, m: int) -> int:
        return max(50, self.max_iter_factor * (n + m))

    @staticmethod
    def _regularized(H: np.ndarray) -> np.ndarray:
        H = 0.5 * (H + H.T)
        lam_min = float(np.linalg.eigvalsh(H).min()) if H.size else 0.0
        if lam_min < 1e-8:
            H = H + (1e-8 - lam_min) * np.eye(H.shape[0])
        return H

    def _phase1(self, H, qp: QuadProgram, z0):
        """Big-M feasibility: one extra slack relaxes every general row."""
        n, m = qp.n, qp.m
        scale = max(1.0, float(np.abs(qp.g).max()), float(np.abs(H).max()))
        big_m = self.big_m * scale

        for _ in range(3):
            H_aug = np.zeros((n + 1, n + 1))
            H_aug[:n, :n] = H
            H_aug[n, n] = scale
            g_aug = np.concatenate([qp.g, [big_m]])
            A_rows = np.hstack([qp.A_ineq, -np.ones((m, 1))])
            eye = np.eye(n + 1)
            A_aug = np.vstack([A_rows, eye, -eye])
            lb_aug = np.concatenate([qp.lb, [0.0]])
            ub_aug = np.concatenate([qp.ub, [np.inf]])
            b_aug = np.concatenate([qp.b_ineq, ub_aug, -lb_aug])

            t0 = max(0.0, float((qp.A_ineq @ z0 - qp.b_ineq).max()))
            start = np.concatenate([z0, [t0]])
            sol = self._primal(
                H_aug, g_aug, A_aug, b_aug, start, cap=self._cap(n + 1, A_aug.shape[0])
            )
            t_star = float(sol.z[n])
            if t_star <= _PHASE1_TOL:
                return sol.z[:n], None
            big_m *= 100.0

        certificate = sol.lagrange[:m].copy()
        norm = float(np.abs(certificate).sum())
        if norm > 0.0:
            certificate /= norm
        return None, QpSolution(
            z=sol.z[:n],
            status="infeasible",
            iterations=sol.iterations,
            certificate=certificate,
        )

    def _primal(self, H, g, A, b, z0, cap: int) -> QpSolution:
        n = g.size
        z = z0.copy()
        work = self._initial_working_set(A, b, z, n)
        row_norms = np.linalg.norm(A, axis=1)
        history: list[float] = []
        iterations = 0

        while iterations < cap:
            iterations += 1
            Aw = A[work]
            r_w = b[np.array(work, dtype=int)] - Aw @ z if work else np.zeros(0)
            p, lam_w, dep = self._eqp(H, H @ z + g, Aw, r_w)
            if dep is not None:
                # a working row went linearly dependent; shed it
                work.pop(dep)
                continue

            if float(np.abs(p).max(initial=0.0)) <= _ZERO_STEP:
                if lam_w.size == 0 or float(lam_w.min()) >= -_MULT_TOL:
                    return self._finish(H, g, A, b, z, work, lam_w, iterations, history)
                # drop the most negative multiplier; argmin takes the lowest
                # index on ties
                work.pop(int(np.argmin(lam_w)))
                continue

            alpha, blocking = self._step_length(A, b, z, p, work, row_norms)
            z = z + min(1.0, alpha) * p
            history.append(float(0.5 * z @ H @ z + g @ z))
            if blocking is not None and alpha < 1.0:
                work.append(blocking)
                work.sort()

        # out of budget: report the current (feasible) iterate
        Aw = A[work]
        r_w = b[np.array(work, dtype=int)] - Aw @ z if work else np.zeros(0)
        _, lam_w, dep = self._eqp(H, H @ z + g, Aw, r_w)
        if dep is not None:
            work.pop(dep)
            Aw = A[work]
            r_w = b[np.array(work, dtype=int)] - Aw @ z if work else np.zeros(0)
            _, lam_w, _ = self._eqp(H, H @ z + g, Aw, r_w)
        sol = self._finish(H, g, A, b, z, work, lam_w, iterations, history)
        sol.status = "max_iter"
        return sol

    @staticmethod
    def _initial_working_set(A, b, z, n: int) -> list[int]:
        """Linearly independent rows active at the start point, lowest
        indices first; gives warm starts their short path to the optimum."""
        residual = b - A @ z
        active = np.flatnonzero(np.isfinite(b) & (np.abs(residual) <= 1e-9))
        work: list[int] = []
        stack: list[np.ndarray] = []
        for idx in active:
            if len(work) == n:
                break
            candidate = stack + [A[idx]]
            if np.linalg.matrix_rank(np.array(candidate), tol=1e-10) == len(candidate):
                work.append(int(idx))
                stack = candidate
        return work

    @staticmethod
    def _eqp(H, q, Aw, r_w) -> tuple[np.ndarray, np.ndarray, int | None]:
        """Step to the quadratic model's minimizer over the working surface.

        Solves Aw p = r_w (the residual term re-centers any drift off the
        working rows) via a null-space factorization of Aw', which stays
        accurate where a raw KKT solve degrades.  Returns (p, multipliers,
        dependent_row): when the working rows are rank deficient the index
        of the offending row is reported instead of a step.
        """
        k = Aw.shape[0]
        if k == 0:
            return np.linalg.solve(H, -q), np.zeros(0), None
        Q, R = np.linalg.qr(Aw.T, mode="complete")
        Rk = R[:k, :]
        diag = np.abs(np.diag(Rk))
        small = np.flatnonzero(diag <= 1e-12 * max(1.0, float(diag.max(initial=0.0))))
        if small.size:
            return np.zeros(0), np.zeros(0), int(small[0])
        Y, Z = Q[:, :k], Q[:, k:]
        p_y = Y @ np.linalg.solve(Rk.T, r_w)
        if Z.shape[1]:
            ZH = Z.T @ H
            p_z = np.linalg.solve(ZH @ Z, -(Z.T @ q + ZH @ p_y))
            p = p_y + Z @ p_z
        else:
            p = p_y
        lam = np.linalg.solve(Rk, Y.T @ -(q + H @ p))
        return p, lam, None

    @staticmethod
    def _step_length(A, b, z, p, work, row_norms) -> tuple[float, int | None]:
        """Largest step along p before a new row blocks; ties go to the
        lowest row index via the ascending scan.

        Rows nearly orthogonal to p are skipped: a row that is a linear
        combination of the working set has a'p = 0 exactly, so a tiny
        numerical a'p would otherwise admit a dependent row.
        """
        ap = A @ p
        residual = b - A @ z
        p_norm = float(np.linalg.norm(p))
        alpha = np.inf
        blocking = None
        in_work = set(work)
        for i in range(A.shape[0]):
            if i in in_work or not np.isfinite(b[i]):
                continue
            if ap[i] <= 1e-10 * max(1e-3, row_norms[i] * p_norm):
                continue
            ratio = max(0.0, residual[i]) / ap[i]
            if ratio < alpha - 1e-15:
                alpha = ratio
                blocking = i
        return alpha, blocking

    @staticmethod
    def _finish(H, g, A, b, z, work, lam_w, iterations, history) -> QpSolution:
        lagrange = np.zeros(A.shape[0])
        if work:
            lagrange[np.array(work, dtype=int)] = lam_w
        stationarity = float(np.abs(H @ z + g + A.T @ lagrange).max(initial=0.0))
        finite = np.isfinite(b)
        primal = float(np.maximum(A[finite] @ z - b[finite], 0.0).max(initial=0.0))
        comp = float(np.abs(lagrange[finite] * (A[finite] @ z - b[finite])).max(initial=0.0))
        return QpSolution(
            z=z,
            status="optimal",
            active_set=sorted(work),
            lagrange=lagrange,
            iterations=iterations,
            kkt_residual=max(stationarity, primal, comp),
            objective_history=history,
        )
