"""Closed-loop rollout harness and tracking metrics.

The truth model is the same canonical dynamics propagated at a finer
substep with the zero-order-held input, so the only model mismatch in a
clean run is discretization. Disturbances are injected additively on the
perturbation vector before the manifold update, which keeps every truth
state exactly on the manifold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import CanonicalSystem
from .errors import OutOfChartError, TrackingLostError
from .mpc import MpcConfig, MpcController


@dataclass
class Scenario:
    """A fully-built closed-loop experiment."""

    name: str
    description: str
    system: CanonicalSystem
    reference: object  # anything with point(k) -> ReferencePoint
    mpc: MpcConfig
    duration: float
    dx_init: np.ndarray
    seed: int = 0
    substeps: int = 10
    noise_std: Optional[np.ndarray] = None  # per-channel std on f, length exo_dim
    pos_slice: slice = field(default=slice(0, 3))   # ambient position block
    att_slice: slice = field(default=slice(0, 0))   # rotation block of dx

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        ticks = self.duration / self.mpc.dt
        if abs(ticks - round(ticks)) > 1e-9:
            raise ValueError("duration must be an integer multiple of dt")
        self.dx_init = np.asarray(self.dx_init, dtype=float)
        if self.dx_init.shape != (self.system.manifold.dim,):
            raise ValueError("dx_init must match the manifold dimension")
        if self.noise_std is not None:
            self.noise_std = np.asarray(self.noise_std, dtype=float)
            if self.noise_std.shape != (self.system.manifold.exo_dim,):
                raise ValueError("noise_std must match the exogenous dimension")

    @property
    def ticks(self):
        return int(round(self.duration / self.mpc.dt))


@dataclass
class SimTrace:
    """Tick-indexed record of a closed-loop run."""

    t: np.ndarray
    x: np.ndarray            # (ticks, ambient_dim)
    x_ref: np.ndarray
    dx: np.ndarray           # (ticks, dim)
    u: np.ndarray            # (ticks, input_dim)
    u_d: np.ndarray
    iterations: np.ndarray
    solve_time_us: np.ndarray
    active_bounds: np.ndarray
    converged: np.ndarray
    failed: bool
    pos_slice: slice
    att_slice: slice

    def __len__(self):
        return len(self.t)


def rollout(scenario: Scenario) -> SimTrace:
    """Run the MPC loop against the truth model for the scenario duration.

    Deterministic for a given scenario and seed. If the tracking error ever
    leaves the reference chart the trace is truncated and flagged failed.
    """
    sys_ = scenario.system
    m = sys_.manifold
    cfg = scenario.mpc
    ref = scenario.reference
    ticks = scenario.ticks
    rng = np.random.default_rng(scenario.seed)
    controller = MpcController(sys_, cfg)

    x = m.boxplus(ref.point(0).x, scenario.dx_init)
    amb, n, mu = m.ambient_dim, m.dim, cfg.input_dim
    rec = {
        "t": np.zeros(ticks),
        "x": np.zeros((ticks, amb)),
        "x_ref": np.zeros((ticks, amb)),
        "dx": np.zeros((ticks, n)),
        "u": np.zeros((ticks, mu)),
        "u_d": np.zeros((ticks, mu)),
        "iterations": np.zeros(ticks, dtype=int),
        "solve_time_us": np.zeros(ticks),
        "active_bounds": np.zeros(ticks, dtype=int),
        "converged": np.ones(ticks, dtype=bool),
    }
    failed = False
    done = 0
    h = cfg.dt / scenario.substeps
    for k in range(ticks):
        m.check_point(x)
        window = [ref.point(k + i) for i in range(cfg.horizon)]
        try:
            dx = m.boxminus(x, window[0].x)
            sol = controller.step(x, window)
        except (TrackingLostError, OutOfChartError):
            failed = True
            break
        rec["t"][k] = k * cfg.dt
        rec["x"][k] = x
        rec["x_ref"][k] = window[0].x
        rec["dx"][k] = dx
        rec["u"][k] = sol.u0
        rec["u_d"][k] = window[0].u
        rec["iterations"][k] = sol.iterations
        rec["solve_time_us"][k] = sol.solve_time * 1e6
        rec["active_bounds"][k] = sol.active_bounds
        rec["converged"][k] = sol.converged
        done = k + 1

        for _ in range(scenario.substeps):
            f_val = sys_.f(x, sol.u0)
            if scenario.noise_std is not None:
                f_val = f_val + rng.normal(0.0, 1.0, size=f_val.shape) * scenario.noise_std
            x = m.oplus(x, h * f_val)

    return SimTrace(
        t=rec["t"][:done],
        x=rec["x"][:done],
        x_ref=rec["x_ref"][:done],
        dx=rec["dx"][:done],
        u=rec["u"][:done],
        u_d=rec["u_d"][:done],
        iterations=rec["iterations"][:done],
        solve_time_us=rec["solve_time_us"][:done],
        active_bounds=rec["active_bounds"][:done],
        converged=rec["converged"][:done],
        failed=failed,
        pos_slice=scenario.pos_slice,
        att_slice=scenario.att_slice,
    )


def metrics(trace: SimTrace) -> dict:
    """Summary statistics of a trace, SI units with unit-suffixed keys."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    pos_err = np.linalg.norm(trace.x[:, trace.pos_slice] - trace.x_ref[:, trace.pos_slice], axis=1)
    att_err = np.linalg.norm(trace.dx[:, trace.att_slice], axis=1)
    out = {
        "ticks": float(len(trace)),
        "duration_s": float(trace.t[-1] - trace.t[0]) if len(trace) > 1 else 0.0,
        "rms_pos_err_m": float(np.sqrt(np.mean(pos_err**2))),
        "max_pos_err_m": float(pos_err.max()),
        "rms_att_err_rad": float(np.sqrt(np.mean(att_err**2))),
        "max_att_err_rad": float(att_err.max()),
        "mean_solve_time_ms": float(np.mean(trace.solve_time_us)) / 1e3,
        "p99_solve_time_ms": float(np.percentile(trace.solve_time_us, 99)) / 1e3,
        "mean_qp_iterations": float(np.mean(trace.iterations)),
        "bound_active_rate": float(np.mean(trace.active_bounds > 0)),
        "nonconverged_ticks": float(np.sum(~trace.converged)),
        "failed": float(trace.failed),
    }
    return out
