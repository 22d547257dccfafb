"""Independent numerical oracles shared across the test suite.

Each oracle deliberately avoids the library code path it is used to check:
the matrix exponential is a truncated power series, Jacobians come from
central differences of the defining maps, and the box-QP oracles are a
zooming grid search and an exhaustive active-set enumeration.
"""

import itertools

import numpy as np


def series_exp(mat, terms=20):
    """Truncated power-series matrix exponential."""
    out = np.eye(mat.shape[0])
    term = np.eye(mat.shape[0])
    for k in range(1, terms + 1):
        term = term @ mat / k
        out = out + term
    return out


def skew_oracle(v):
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def fd_gx(m, xd, v, h=1e-6):
    """Central difference of the state error-transport map at zero."""
    base = m.oplus(xd, v)
    out = np.zeros((m.dim, m.dim))
    for j in range(m.dim):
        e = np.zeros(m.dim)
        e[j] = h
        plus = m.boxminus(m.oplus(m.boxplus(xd, e), v), base)
        minus = m.boxminus(m.oplus(m.boxplus(xd, -e), v), base)
        out[:, j] = (plus - minus) / (2.0 * h)
    return out


def fd_gf(m, xd, v, h=1e-6):
    """Central difference of the perturbation error-transport map at zero."""
    base = m.oplus(xd, v)
    out = np.zeros((m.dim, m.exo_dim))
    for j in range(m.exo_dim):
        e = np.zeros(m.exo_dim)
        e[j] = h
        plus = m.boxminus(m.oplus(xd, v + e), base)
        minus = m.boxminus(m.oplus(xd, v - e), base)
        out[:, j] = (plus - minus) / (2.0 * h)
    return out


def qp_objective(P, q, x):
    return float(x @ P @ x + 2.0 * (q @ x))


def grid_refine_boxqp(P, q, lower, upper, rounds=30, pts=11):
    """Brute-force zooming grid search over the box; low dimensions only."""
    lo = np.asarray(lower, dtype=float).copy()
    hi = np.asarray(upper, dtype=float).copy()
    n = len(lo)
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], pts) for i in range(n)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        vals = np.einsum("ij,jk,ik->i", grid, P, grid) + 2.0 * grid @ q
        best = grid[np.argmin(vals)]
        span = (hi - lo) / (pts - 1)
        lo = np.maximum(lower, best - span)
        hi = np.minimum(upper, best + span)
    return best, qp_objective(P, q, best)


def enumerate_boxqp(P, q, lower, upper):
    """Exact box-QP minimum by enumerating all clamp patterns.

    Every KKT-consistent active set appears among the 3^n patterns, and all
    candidates are feasible, so the best candidate objective is the global
    minimum. Exponential cost; keep n small.
    """
    n = len(q)
    best_x, best_val = None, np.inf
    for pattern in itertools.product((0, 1, 2), repeat=n):
        x = np.where(np.array(pattern) == 1, lower, upper).astype(float)
        free = [i for i in range(n) if pattern[i] == 0]
        if free:
            x[free] = 0.0
            rhs = -(q[free] + P[np.ix_(free, range(n))] @ x)
            try:
                x[free] = np.linalg.solve(P[np.ix_(free, free)], rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(x[free] < lower[free] - 1e-12) or np.any(x[free] > upper[free] + 1e-12):
                continue
        val = qp_objective(P, q, x)
        if val < best_val:
            best_x, best_val = x, val
    return best_x, best_val


def random_spd(n, rng, scale=1.0):
    a = rng.standard_normal((n, n))
    return a @ a.T + scale * np.eye(n)
