"""Manifold primitives with boxplus/boxminus charts, exogenous actions and
their linearization blocks.

A point is stored as a flat ndarray of ambient coordinates:

* ``Euclidean(n)``   -- the n vector itself
* ``Rot2``           -- the 2x2 rotation matrix, row-major (4 floats)
* ``Rot3``           -- the 3x3 rotation matrix, row-major (9 floats)
* ``Sphere2(r)``     -- the radius-r vector in R^3
* ``Surface(model)`` -- (x, y, z) with z on the surface
* ``Product(...)``   -- component points concatenated

Three operations act on points:

* ``boxplus(x, d)``   retracts a minimal perturbation ``d`` (dimension
  ``dim``) onto the manifold near ``x``;
* ``boxminus(y, x)``  lifts the difference of two nearby points back to the
  perturbation space, inverting ``boxplus``;
* ``oplus(x, e)``     applies an exogenous perturbation ``e`` (dimension
  ``exo_dim``, not necessarily equal to ``dim``).

``gx``/``gf`` return the Jacobians of the one-step error-transport maps
used by the error-state linearization; they depend only on the manifold,
never on system dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OutOfChartError
from .rotations import a_matrix, is_rotation, skew, so2_exp, so2_log, so3_exp, so3_log


def _check_len(v, n, what):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{what} must have shape ({n},), got {v.shape}")
    return v


class Manifold:
    """Base class; subclasses define dim / exo_dim / ambient_dim and the
    chart operations."""

    dim: int
    exo_dim: int
    ambient_dim: int

    def boxplus(self, x, delta):
        raise NotImplementedError

    def boxminus(self, y, x):
        raise NotImplementedError

    def oplus(self, x, delta_e):
        raise NotImplementedError

    def gx(self, xd, v):
        """d/d(delta) of ((xd [+] delta) (+) v) [-] (xd (+) v) at delta=0."""
        raise NotImplementedError

    def gf(self, xd, v):
        """d/d(delta) of (xd (+) (v + delta)) [-] (xd (+) v) at delta=0."""
        raise NotImplementedError

    def check_point(self, x):
        """Raise ValueError if ``x`` is not a valid point."""
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError


class Euclidean(Manifold):
    """Flat vector space; all operations are plain addition/subtraction."""

    exo_dim: int

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = n
        self.exo_dim = n
        self.ambient_dim = n

    def boxplus(self, x, delta):
        return _check_len(x, self.dim, "point") + _check_len(delta, self.dim, "delta")

    def boxminus(self, y, x):
        return _check_len(y, self.dim, "point") - _check_len(x, self.dim, "point")

    def oplus(self, x, delta_e):
        return self.boxplus(x, delta_e)

    def gx(self, xd, v):
        return np.eye(self.dim)

    def gf(self, xd, v):
        return np.eye(self.dim)

    def check_point(self, x):
        x = _check_len(x, self.dim, "point")
        if not np.all(np.isfinite(x)):
            raise ValueError("point has non-finite entries")

    def random_point(self, rng):
        return rng.standard_normal(self.dim)

    def __repr__(self):
        return f"Euclidean({self.dim})"


class Rot2(Manifold):
    """Planar rotations, stored as the flattened 2x2 matrix."""

    dim = 1
    exo_dim = 1
    ambient_dim = 4

    def to_matrix(self, x):
        return _check_len(x, 4, "point").reshape(2, 2)

    def from_matrix(self, rot):
        return np.asarray(rot, dtype=float).reshape(4).copy()

    def from_angle(self, angle):
        return self.from_matrix(so2_exp(angle))

    def angle(self, x):
        return so2_log(self.to_matrix(x))

    def boxplus(self, x, delta):
        delta = _check_len(delta, 1, "delta")
        return self.from_matrix(self.to_matrix(x) @ so2_exp(delta[0]))

    def boxminus(self, y, x):
        rel = self.to_matrix(x).T @ self.to_matrix(y)
        return np.array([so2_log(rel)])

    def oplus(self, x, delta_e):
        return self.boxplus(x, delta_e)

    def gx(self, xd, v):
        return np.eye(1)

    def gf(self, xd, v):
        return np.eye(1)

    def check_point(self, x):
        if not is_rotation(self.to_matrix(x)):
            raise ValueError("not a valid 2x2 rotation matrix")

    def random_point(self, rng):
        return self.from_angle(rng.uniform(-np.pi, np.pi))

    def __repr__(self):
        return "Rot2()"


class Rot3(Manifold):
    """Spatial rotations, stored as the flattened 3x3 matrix."""

    dim = 3
    exo_dim = 3
    ambient_dim = 9

    def to_matrix(self, x):
        return _check_len(x, 9, "point").reshape(3, 3)

    def from_matrix(self, rot):
        return np.asarray(rot, dtype=float).reshape(9).copy()

    def identity(self):
        return self.from_matrix(np.eye(3))

    def boxplus(self, x, delta):
        delta = _check_len(delta, 3, "delta")
        if np.linalg.norm(delta) >= np.pi:
            raise OutOfChartError("rotation perturbation at or beyond pi")
        return self.from_matrix(self.to_matrix(x) @ so3_exp(delta))

    def boxminus(self, y, x):
        return so3_log(self.to_matrix(x).T @ self.to_matrix(y))

    def oplus(self, x, delta_e):
        delta_e = _check_len(delta_e, 3, "delta_e")
        return self.from_matrix(self.to_matrix(x) @ so3_exp(delta_e))

    def gx(self, xd, v):
        return so3_exp(-_check_len(v, 3, "v"))

    def gf(self, xd, v):
        return a_matrix(_check_len(v, 3, "v")).T

    def check_point(self, x):
        if not is_rotation(self.to_matrix(x)):
            raise ValueError("not a valid 3x3 rotation matrix")

    def random_point(self, rng):
        rvec = rng.standard_normal(3)
        rvec *= rng.uniform(0.0, 0.9 * np.pi) / max(np.linalg.norm(rvec), 1e-12)
        return self.from_matrix(so3_exp(rvec))

    def __repr__(self):
        return "Rot3()"


class Sphere2(Manifold):
    """Vectors of fixed magnitude ``radius`` in R^3.

    Minimal perturbations live in the 2-D tangent plane; exogenous
    perturbations are full 3-D rotation vectors applied from the left.
    """

    dim = 2
    exo_dim = 3
    ambient_dim = 3

    def __init__(self, radius: float):
        if radius <= 0.0:
            raise ValueError("radius must be > 0")
        self.radius = float(radius)

    def basis(self, x):
        """Deterministic 3x2 orthonormal basis of the tangent plane at x.

        The natural axis closest to x (by |component|, ties to the lowest
        index) is rotated onto x/r by the minimal rotation; the images of
        the remaining two natural axes are the columns.
        """
        x = _check_len(x, 3, "point")
        u = x / np.linalg.norm(x)
        i = int(np.argmax(np.abs(u)))
        e_i = np.zeros(3)
        e_i[i] = 1.0
        w = np.cross(e_i, u)
        s = np.linalg.norm(w)
        c = u[i]
        if s < 1e-12:
            if c > 0.0:
                rot = np.eye(3)
            else:
                # antipodal to the chosen axis: half-turn about the next axis
                axis = np.zeros(3)
                axis[(i + 1) % 3] = np.pi
                rot = so3_exp(axis)
        else:
            rot = so3_exp((w / s) * np.arctan2(s, c))
        cols = [rot[:, j] for j in range(3) if j != i]
        return np.column_stack(cols)

    def boxplus(self, x, delta):
        x = _check_len(x, 3, "point")
        delta = _check_len(delta, 2, "delta")
        if np.linalg.norm(delta) >= np.pi:
            raise OutOfChartError("sphere perturbation at or beyond pi")
        return so3_exp(self.basis(x) @ delta) @ x

    def boxminus(self, y, x):
        x = _check_len(x, 3, "point")
        y = _check_len(y, 3, "point")
        w = np.cross(x, y)
        s = np.linalg.norm(w)
        c = float(np.dot(x, y))
        if s < 1e-12 * self.radius**2:
            if c > 0.0:
                return np.zeros(2)
            raise OutOfChartError("antipodal sphere points")
        theta = np.arctan2(s, c)
        return self.basis(x).T @ (theta * w / s)

    def oplus(self, x, delta_e):
        x = _check_len(x, 3, "point")
        delta_e = _check_len(delta_e, 3, "delta_e")
        return so3_exp(delta_e) @ x

    def gx(self, xd, v):
        xd = _check_len(xd, 3, "point")
        rot = so3_exp(_check_len(v, 3, "v"))
        sq = skew(xd) @ skew(xd)
        return -(1.0 / self.radius**2) * self.basis(rot @ xd).T @ rot @ sq @ self.basis(xd)

    def gf(self, xd, v):
        xd = _check_len(xd, 3, "point")
        v = _check_len(v, 3, "v")
        rot = so3_exp(v)
        sq = skew(xd) @ skew(xd)
        return -(1.0 / self.radius**2) * self.basis(rot @ xd).T @ rot @ sq @ a_matrix(v).T

    def check_point(self, x):
        x = _check_len(x, 3, "point")
        if abs(np.linalg.norm(x) - self.radius) >= 1e-9 * self.radius:
            raise ValueError("point is not on the sphere")

    def random_point(self, rng):
        v = rng.standard_normal(3)
        return self.radius * v / np.linalg.norm(v)

    def __repr__(self):
        return f"Sphere2(r={self.radius})"


@dataclass(frozen=True)
class SurfaceModel:
    """Quadratic height field z = c1*x^2 + c2*x*y + c3*y^2 + c4*x + c5*y + c6.

    Coefficients are stored in that order; units are meters.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(6)
        if not np.all(np.isfinite(c)):
            raise ValueError("surface coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def flat(cls, z0: float = 0.0):
        return cls(np.array([0.0, 0.0, 0.0, 0.0, 0.0, z0]))

    def height(self, x, y):
        c = self.coeffs
        return c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5]

    def gradient(self, x, y):
        """(dF/dx, dF/dy) at (x, y)."""
        c = self.coeffs
        return np.array([2.0 * c[0] * x + c[1] * y + c[3], c[1] * x + 2.0 * c[2] * y + c[4]])

    def hessian(self):
        """Constant 2x2 second-derivative matrix of the height field."""
        c = self.coeffs
        return np.array([[2.0 * c[0], c[1]], [c[1], 2.0 * c[2]]])

    def lift(self, xy):
        """3-D point on the surface above planar coordinates ``xy``."""
        x, y = np.asarray(xy, dtype=float)
        return np.array([x, y, self.height(x, y)])


class Surface(Manifold):
    """2-D surface embedded in R^3 as a quadratic height field.

    Perturbations are expressed directly in the horizontal plane; the
    height coordinate follows the surface model.
    """

    dim = 2
    exo_dim = 2
    ambient_dim = 3

    def __init__(self, model: SurfaceModel):
        self.model = model

    def boxplus(self, x, delta):
        x = _check_len(x, 3, "point")
        delta = _check_len(delta, 2, "delta")
        return self.model.lift(x[:2] + delta)

    def boxminus(self, y, x):
        return _check_len(y, 3, "point")[:2] - _check_len(x, 3, "point")[:2]

    def oplus(self, x, delta_e):
        return self.boxplus(x, delta_e)

    def gx(self, xd, v):
        return np.eye(2)

    def gf(self, xd, v):
        return np.eye(2)

    def check_point(self, x):
        x = _check_len(x, 3, "point")
        if abs(x[2] - self.model.height(x[0], x[1])) >= 1e-9:
            raise ValueError("point is not on the surface")

    def random_point(self, rng):
        return self.model.lift(rng.uniform(-2.0, 2.0, size=2))

    def __repr__(self):
        return f"Surface({self.model.coeffs})"


class Product(Manifold):
    """Cartesian product of manifolds; all operations act block-wise and
    the linearization blocks assemble block-diagonally."""

    def __init__(self, components: Sequence[Manifold]):
        if len(components) == 0:
            raise ValueError("product of zero manifolds")
        self.components = tuple(components)
        self.dim = sum(c.dim for c in self.components)
        self.exo_dim = sum(c.exo_dim for c in self.components)
        self.ambient_dim = sum(c.ambient_dim for c in self.components)
        self.ambient_slices = self._slices("ambient_dim")
        self.tangent_slices = self._slices("dim")
        self.exo_slices = self._slices("exo_dim")

    def _slices(self, attr):
        out, start = [], 0
        for c in self.components:
            n = getattr(c, attr)
            out.append(slice(start, start + n))
            start += n
        return tuple(out)

    def split(self, x):
        x = _check_len(x, self.ambient_dim, "point")
        return [x[s] for s in self.ambient_slices]

    def join(self, parts):
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def boxplus(self, x, delta):
        x = _check_len(x, self.ambient_dim, "point")
        delta = _check_len(delta, self.dim, "delta")
        return self.join(
            c.boxplus(x[sa], delta[st])
            for c, sa, st in zip(self.components, self.ambient_slices, self.tangent_slices)
        )

    def boxminus(self, y, x):
        y = _check_len(y, self.ambient_dim, "point")
        x = _check_len(x, self.ambient_dim, "point")
        return np.concatenate(
            [c.boxminus(y[sa], x[sa]) for c, sa in zip(self.components, self.ambient_slices)]
        )

    def oplus(self, x, delta_e):
        x = _check_len(x, self.ambient_dim, "point")
        delta_e = _check_len(delta_e, self.exo_dim, "delta_e")
        return self.join(
            c.oplus(x[sa], delta_e[se])
            for c, sa, se in zip(self.components, self.ambient_slices, self.exo_slices)
        )

    def gx(self, xd, v):
        xd = _check_len(xd, self.ambient_dim, "point")
        v = _check_len(v, self.exo_dim, "v")
        out = np.zeros((self.dim, self.dim))
        for c, sa, st, se in zip(
            self.components, self.ambient_slices, self.tangent_slices, self.exo_slices
        ):
            out[st, st] = c.gx(xd[sa], v[se])
        return out

    def gf(self, xd, v):
        xd = _check_len(xd, self.ambient_dim, "point")
        v = _check_len(v, self.exo_dim, "v")
        out = np.zeros((self.dim, self.exo_dim))
        for c, sa, st, se in zip(
            self.components, self.ambient_slices, self.tangent_slices, self.exo_slices
        ):
            out[st, se] = c.gf(xd[sa], v[se])
        return out

    def check_point(self, x):
        for c, sa in zip(self.components, self.ambient_slices):
            c.check_point(np.asarray(x, dtype=float)[sa])

    def random_point(self, rng):
        return self.join(c.random_point(rng) for c in self.components)

    def __repr__(self):
        return "Product(" + ", ".join(repr(c) for c in self.components) + ")"
