"""Canonical discrete-time system representation and error-state
linearization.

A system is described by ``x_{k+1} = x_k (+) dt * f(x_k, u_k)`` where the
state lives on a manifold and ``f`` maps (state, input) to an exogenous
perturbation vector. Deviations from a reference are expressed through the
manifold charts, which keeps the linearized error system minimal and free
of parametrization singularities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import OutOfChartError
from .manifolds import Manifold


@dataclass(frozen=True)
class CanonicalSystem:
    """Manifold + system-specific perturbation function and its Jacobians.

    Attributes
    ----------
    manifold : Manifold
        State space.
    input_dim : int
        Dimension of the input vector u.
    f : callable (x, u) -> ndarray (exo_dim,)
        Exogenous perturbation rate.
    dfdx : callable (x, u) -> ndarray (exo_dim, dim)
        Jacobian of f with respect to a chart perturbation of the state,
        evaluated at (x, u).
    dfdu : callable (x, u) -> ndarray (exo_dim, input_dim)
        Jacobian of f with respect to the input.
    """

    manifold: Manifold
    input_dim: int
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dfdx: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dfdu: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ReferencePoint:
    """One sample of a reference trajectory: desired state and input."""

    x: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class LinearizedErrorDynamics:
    """One-step error transition dx_{k+1} ~= F_x dx_k + F_u du_k, together
    with the reference point and step the matrices were evaluated at."""

    F_x: np.ndarray
    F_u: np.ndarray
    x_d: np.ndarray
    u_d: np.ndarray
    dt: float


def step(system: CanonicalSystem, x, u, dt: float):
    """Propagate the state one sampling period with zero-order-held input."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("input has non-finite entries")
    return system.manifold.oplus(x, dt * system.f(x, u))


def error_state(manifold: Manifold, x, x_d):
    """Minimal-coordinate deviation of ``x`` from the reference ``x_d``."""
    return manifold.boxminus(x, x_d)


def linearize(system: CanonicalSystem, ref: ReferencePoint, dt: float) -> LinearizedErrorDynamics:
    """Assemble the linearized error system at a reference point.

    The manifold contributes the transport blocks; the system contributes
    the Jacobians of ``f``. Both are combined as
    ``F_x = G_x + dt * G_f @ dfdx`` and ``F_u = dt * G_f @ dfdu``.
    """
    m = system.manifold
    x_d = np.asarray(ref.x, dtype=float)
    u_d = np.asarray(ref.u, dtype=float)
    v = dt * system.f(x_d, u_d)
    g_x = m.gx(x_d, v)
    g_f = m.gf(x_d, v)
    F_x = g_x + dt * g_f @ system.dfdx(x_d, u_d)
    F_u = dt * g_f @ system.dfdu(x_d, u_d)
    return LinearizedErrorDynamics(F_x=F_x, F_u=F_u, x_d=x_d, u_d=u_d, dt=dt)


def fd_error_jacobians(system: CanonicalSystem, ref: ReferencePoint, dt: float, h: float = 1e-6):
    """Central-difference Jacobians of the full nonlinear one-step error map.

    Numerical oracle for :func:`linearize`: each column probes the map
    ``(dx, du) -> ((x_d [+] dx) (+) dt f(x_d [+] dx, u_d + du)) [-]
    (x_d (+) dt f(x_d, u_d))`` around zero. If a probe leaves the chart,
    ``h`` is reduced tenfold and the computation retried once.
    """
    if not 1e-8 <= h <= 1e-4:
        raise ValueError("finite-difference step must lie in [1e-8, 1e-4]")
    m = system.manifold
    x_d = np.asarray(ref.x, dtype=float)
    u_d = np.asarray(ref.u, dtype=float)

    def attempt(hh):
        base = m.oplus(x_d, dt * system.f(x_d, u_d))

        def err_of(dx, du):
            xp = m.boxplus(x_d, dx)
            return m.boxminus(m.oplus(xp, dt * system.f(xp, u_d + du)), base)

        F_x = np.zeros((m.dim, m.dim))
        for j in range(m.dim):
            e = np.zeros(m.dim)
            e[j] = hh
            F_x[:, j] = (err_of(e, 0.0) - err_of(-e, 0.0)) / (2.0 * hh)
        F_u = np.zeros((m.dim, system.input_dim))
        zero = np.zeros(m.dim)
        for j in range(system.input_dim):
            e = np.zeros(system.input_dim)
            e[j] = hh
            F_u[:, j] = (err_of(zero, e) - err_of(zero, -e)) / (2.0 * hh)
        return F_x, F_u

    try:
        return attempt(h)
    except OutOfChartError:
        return attempt(h / 10.0)
