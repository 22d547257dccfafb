"""Condensed finite-horizon tracking MPC over the linearized error system.

The predicted error sequence is written as ``dX = M dU + H dx0``, which
turns the tracking objective into a small dense QP in the stacked input
correction ``dU`` alone. With only box input bounds the QP is solved either
in closed form (when the unconstrained minimizer is feasible) or by the
projected-gradient solver in :mod:`manifold_mpc.boxqp`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from . import boxqp
from .dynamics import CanonicalSystem, LinearizedErrorDynamics, ReferencePoint, linearize
from .errors import IllConditionedWeightsError, OutOfChartError, TrackingLostError

ACTIVE_BOUND_ATOL = 1e-9


def _check_spd(mat, name):
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square")
    if np.abs(mat - mat.T).max() > 1e-12 * max(1.0, np.abs(mat).max()):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} must be positive definite") from exc
    return mat


@dataclass(frozen=True)
class MpcConfig:
    """Horizon, step, weights, input bounds and solver settings.

    ``P_N`` defaults to the stage state weight when omitted. Weights are
    validated as symmetric positive definite by factorization; degenerate
    bounds (u_min == u_max on a channel) are rejected.
    """

    horizon: int
    dt: float
    Q: np.ndarray
    R: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    P_N: Optional[np.ndarray] = None
    tol: float = 1e-8
    max_iter: int = 1000

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")
        object.__setattr__(self, "Q", _check_spd(self.Q, "Q"))
        object.__setattr__(self, "R", _check_spd(self.R, "R"))
        p_n = self.Q if self.P_N is None else _check_spd(self.P_N, "P_N")
        if p_n.shape != self.Q.shape:
            raise ValueError("P_N must have the same shape as Q")
        object.__setattr__(self, "P_N", p_n)
        u_min = np.asarray(self.u_min, dtype=float)
        u_max = np.asarray(self.u_max, dtype=float)
        if u_min.shape != u_max.shape or u_min.ndim != 1:
            raise ValueError("u_min/u_max must be vectors of equal length")
        if not np.all(u_min < u_max):
            raise ValueError("u_min must be strictly below u_max on every channel")
        if u_min.shape[0] != self.R.shape[0]:
            raise ValueError("input bounds must match the input weight size")
        object.__setattr__(self, "u_min", u_min)
        object.__setattr__(self, "u_max", u_max)
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ValueError("tol must be > 0 and max_iter >= 1")

    @property
    def state_dim(self):
        return self.Q.shape[0]

    @property
    def input_dim(self):
        return self.R.shape[0]


@dataclass(frozen=True)
class CondensedQp:
    """Stacked prediction matrices, block weights and stacked input bounds."""

    M: np.ndarray       # (N*n, N*m)
    H: np.ndarray       # (N*n, n)
    Q_bar: np.ndarray   # (N*n, N*n) block diag(Q, ..., Q, P_N)
    R_bar: np.ndarray   # (N*m, N*m) block diag(R, ..., R)
    du_min: np.ndarray  # (N*m,)
    du_max: np.ndarray  # (N*m,)

    def hessian(self):
        return self.M.T @ self.Q_bar @ self.M + self.R_bar

    def gradient_map(self):
        """Matrix G with objective gradient 2*(hessian @ dU + G @ dx0)."""
        return self.M.T @ self.Q_bar @ self.H

    def objective(self, du, dx0):
        """Tracking objective up to the constant dx0' H' Q_bar H dx0 term."""
        return boxqp.objective(self.hessian(), self.gradient_map() @ dx0, du)


@dataclass
class MpcSolution:
    du: np.ndarray          # stacked input corrections, length N*m
    u0: np.ndarray          # first input to apply
    dx_pred: np.ndarray     # predicted error sequence, length N*n
    objective: float
    iterations: int
    active_bounds: int
    converged: bool
    solve_time: float = 0.0

    @property
    def du0(self):
        return self.du[: len(self.u0)]


def build_condensed(dyn: Sequence[LinearizedErrorDynamics], cfg: MpcConfig) -> CondensedQp:
    """Stack per-step error dynamics into the condensed prediction form."""
    n_steps = cfg.horizon
    if len(dyn) != n_steps:
        raise ValueError(f"expected {n_steps} linearizations, got {len(dyn)}")
    n = cfg.state_dim
    m = cfg.input_dim
    for d in dyn:
        if d.F_x.shape != (n, n) or d.F_u.shape != (n, m):
            raise ValueError("linearization shapes inconsistent with config")

    M = np.zeros((n_steps * n, n_steps * m))
    H = np.zeros((n_steps * n, n))
    h_prev = np.eye(n)
    for i, d in enumerate(dyn):
        rows = slice(i * n, (i + 1) * n)
        if i > 0:
            M[rows, : i * m] = d.F_x @ M[(i - 1) * n : i * n, : i * m]
        M[rows, i * m : (i + 1) * m] = d.F_u
        H[rows] = d.F_x @ h_prev
        h_prev = H[rows]

    q_blocks = [cfg.Q] * (n_steps - 1) + [cfg.P_N]
    Q_bar = scipy.linalg.block_diag(*q_blocks)
    R_bar = scipy.linalg.block_diag(*([cfg.R] * n_steps))
    du_min = np.concatenate([cfg.u_min - d.u_d for d in dyn])
    du_max = np.concatenate([cfg.u_max - d.u_d for d in dyn])
    return CondensedQp(M=M, H=H, Q_bar=Q_bar, R_bar=R_bar, du_min=du_min, du_max=du_max)


def solve_unconstrained(qp: CondensedQp, dx0) -> np.ndarray:
    """Closed-form minimizer of the condensed objective, ignoring bounds."""
    dx0 = np.asarray(dx0, dtype=float)
    hess = qp.hessian()
    rhs = -(qp.gradient_map() @ dx0)
    try:
        factor = scipy.linalg.cho_factor(hess)
    except scipy.linalg.LinAlgError as exc:
        raise IllConditionedWeightsError("condensed Hessian failed to factorize") from exc
    return scipy.linalg.cho_solve(factor, rhs)


def solve_box_qp(qp: CondensedQp, dx0, warm_start=None, tol: float = 1e-8,
                 max_iter: int = 1000) -> MpcSolution:
    """Solve the condensed QP under the stacked input bounds.

    The unconstrained minimizer is used directly when feasible. Otherwise
    the projected-gradient solver starts from the better of the clipped
    closed-form point and the (clipped) warm start, which guarantees the
    final objective never exceeds that of the clipped closed-form solution.
    """
    dx0 = np.asarray(dx0, dtype=float)
    hess = qp.hessian()
    q = qp.gradient_map() @ dx0
    try:
        factor = scipy.linalg.cho_factor(hess)
    except scipy.linalg.LinAlgError as exc:
        raise IllConditionedWeightsError("condensed Hessian failed to factorize") from exc
    du_free = scipy.linalg.cho_solve(factor, -q)

    if np.all(du_free >= qp.du_min) and np.all(du_free <= qp.du_max):
        du = du_free
        iterations = 0
        converged = True
        val = boxqp.objective(hess, q, du)
    else:
        x0 = np.clip(du_free, qp.du_min, qp.du_max)
        if warm_start is not None:
            warm = np.clip(np.asarray(warm_start, dtype=float), qp.du_min, qp.du_max)
            if boxqp.objective(hess, q, warm) < boxqp.objective(hess, q, x0):
                x0 = warm
        res = boxqp.solve(hess, q, qp.du_min, qp.du_max, x0=x0, tol=tol, max_iter=max_iter)
        du, iterations, converged, val = res.x, res.iterations, res.converged, res.objective

    active = int(np.sum((du <= qp.du_min + ACTIVE_BOUND_ATOL)
                        | (du >= qp.du_max - ACTIVE_BOUND_ATOL)))
    return MpcSolution(
        du=du,
        u0=np.zeros(0),  # filled by the caller once u_d is known
        dx_pred=qp.M @ du + qp.H @ dx0,
        objective=val,
        iterations=iterations,
        active_bounds=active,
        converged=converged,
    )


def mpc_step(system: CanonicalSystem, cfg: MpcConfig, x_now,
             ref_window: Sequence[ReferencePoint], warm_start=None,
             _linearizer=None) -> MpcSolution:
    """One controller tick: lift the state error, linearize along the
    reference window, solve the condensed QP and extract the first input."""
    if len(ref_window) != cfg.horizon:
        raise ValueError(f"reference window must hold {cfg.horizon} points")
    t0 = time.perf_counter()
    try:
        dx0 = system.manifold.boxminus(x_now, ref_window[0].x)
    except OutOfChartError as exc:
        raise TrackingLostError("state error left the reference chart") from exc

    lin = _linearizer or (lambda ref: linearize(system, ref, cfg.dt))
    dyn = [lin(ref) for ref in ref_window]
    qp = build_condensed(dyn, cfg)
    sol = solve_box_qp(qp, dx0, warm_start=warm_start, tol=cfg.tol, max_iter=cfg.max_iter)
    m = cfg.input_dim
    sol.u0 = np.clip(sol.du[:m] + np.asarray(ref_window[0].u, dtype=float),
                     cfg.u_min, cfg.u_max)
    sol.solve_time = time.perf_counter() - t0
    return sol


class MpcController:
    """Stateful wrapper around :func:`mpc_step` that carries the previous
    solution, shifted one step, as the next warm start, and memoizes
    linearizations of repeated reference points (consecutive windows share
    all but one point). One controller instance drives one loop; it is not
    safe to share concurrently."""

    def __init__(self, system: CanonicalSystem, cfg: MpcConfig):
        self.system = system
        self.cfg = cfg
        self._warm: Optional[np.ndarray] = None
        self._cache: dict = {}

    def reset(self):
        self._warm = None
        self._cache.clear()

    def _linearize(self, ref: ReferencePoint) -> LinearizedErrorDynamics:
        key = (np.asarray(ref.x).tobytes(), np.asarray(ref.u).tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = linearize(self.system, ref, self.cfg.dt)
            self._cache[key] = hit
            while len(self._cache) > 4 * self.cfg.horizon:
                self._cache.pop(next(iter(self._cache)))
        return hit

    def step(self, x_now, ref_window: Sequence[ReferencePoint]) -> MpcSolution:
        sol = mpc_step(self.system, self.cfg, x_now, ref_window,
                       warm_start=self._warm, _linearizer=self._linearize)
        m = self.cfg.input_dim
        self._warm = np.concatenate([sol.du[m:], sol.du[-m:]])
        return sol
