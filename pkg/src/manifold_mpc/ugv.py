"""Ground vehicle on a curved surface: model and reference generator.

The robot state is its 3-D position, constrained to the surface, plus the
heading of the intermediate frame obtained by yawing the inertial frame.
Inputs are body forward speed and body yaw rate; both are scaled by the
slope-dependent factors alpha (forward) and beta (yaw) when projected onto
the horizontal-plane chart that drives the kinematics.

Ambient layout: ``[p(3), R(4, row-major 2x2)]``. Input ``[v_x, w_z]``.
"""

from __future__ import annotations

import numpy as np

from .dynamics import CanonicalSystem, ReferencePoint
from .errors import InfeasibleReferenceError
from .manifolds import Product, Rot2, Surface, SurfaceModel

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def ugv_manifold(model: SurfaceModel) -> Product:
    return Product([Surface(model), Rot2()])


def ugv_state(model: SurfaceModel, xy, heading):
    """Pack planar coordinates (lifted to the surface) and a heading angle."""
    rot2 = Rot2()
    return np.concatenate([model.lift(xy), rot2.from_angle(heading)])


def ugv_unpack(x):
    x = np.asarray(x, dtype=float)
    return x[0:3], x[3:7].reshape(2, 2)


def slope_factors(model: SurfaceModel, p, rot):
    """(alpha, beta): forward-speed and yaw-rate projection factors.

    Both lie in (0, 1]; they equal 1 exactly where the relevant gradient
    projection vanishes (level ground).
    """
    grad = model.gradient(p[0], p[1])
    g_fwd = float(grad @ (rot @ E1))
    alpha = 1.0 / np.sqrt(1.0 + g_fwd**2)
    beta = 1.0 / np.sqrt(1.0 + float(grad @ grad))
    return alpha, beta


def ugv_system(model: SurfaceModel) -> CanonicalSystem:
    """Canonical surface vehicle: f = [alpha * R e1 * v_x, beta * w_z]."""
    hess = model.hessian()

    def f(x, u):
        p, rot = ugv_unpack(x)
        alpha, beta = slope_factors(model, p, rot)
        return np.concatenate([alpha * (rot @ E1) * u[0], [beta * u[1]]])

    def dfdx(x, u):
        p, rot = ugv_unpack(x)
        v_x, w_z = u
        grad = model.gradient(p[0], p[1])
        r_e1 = rot @ E1
        g_fwd = float(grad @ r_e1)
        s_a = 1.0 + g_fwd**2
        # d(alpha)/d(dp) and d(alpha)/d(dR); the surface gradient varies with
        # the planar position through the constant quadratic Hessian, the
        # heading enters through d(R e1)/d(dR) = R e2
        dalpha_dp = -(g_fwd * (r_e1 @ hess)) / s_a**1.5
        dalpha_dr = -(g_fwd * float(grad @ (rot @ E2))) / s_a**1.5
        s_b = 1.0 + float(grad @ grad)
        dbeta_dp = -(grad @ hess) / s_b**1.5
        alpha, _ = slope_factors(model, p, rot)
        out = np.zeros((3, 3))
        out[0:2, 0:2] = np.outer(r_e1 * v_x, dalpha_dp)
        out[0:2, 2] = (dalpha_dr * r_e1 + alpha * (rot @ E2)) * v_x
        out[2, 0:2] = dbeta_dp * w_z
        return out

    def dfdu(x, u):
        p, rot = ugv_unpack(x)
        alpha, beta = slope_factors(model, p, rot)
        out = np.zeros((3, 2))
        out[0:2, 0] = alpha * (rot @ E1)
        out[2, 1] = beta
        return out

    return CanonicalSystem(manifold=ugv_manifold(model), input_dim=2, f=f, dfdx=dfdx, dfdu=dfdu)


def _wrap_angle(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


class UgvPathReference:
    """Reference trajectory following a planar path over a surface.

    The path is resampled so consecutive lifted points are exactly
    ``v_desired * dt`` apart in 3-D, headings follow the sampled chords, and
    speeds/yaw rates come from divided differences with the slope factors
    applied, so each point satisfies the discrete model step exactly.

    Parameters
    ----------
    path : callable s -> (x, y)
        Smooth planar curve; ``s`` need not be arc length.
    s_max : float
        End of the path parameter range.
    model : SurfaceModel
        Surface the trajectory is lifted onto.
    v_desired : float
        Target speed along the surface, m/s.
    dt : float
        Sampling period, s.
    steps : int
        Number of reference points to generate; beyond the end the last
        pose is held with zero input.
    omega_max : float, optional
        If given, reject paths whose yaw-rate demand exceeds it.
    """

    def __init__(self, path, s_max, model, v_desired, dt, steps, omega_max=None):
        if v_desired <= 0.0 or dt <= 0.0:
            raise ValueError("v_desired and dt must be > 0")
        self.model = model
        self.dt = float(dt)
        self.steps = int(steps)
        xy = self._resample(path, float(s_max), float(v_desired) * float(dt), self.steps + 2)
        self._build(xy, v_desired)
        if omega_max is not None and np.abs(self._omega).max() > omega_max:
            raise InfeasibleReferenceError(
                f"path demands |w_z| up to {np.abs(self._omega).max():.3f} rad/s"
            )

    def _resample(self, path, s_max, target, count):
        """Walk the path so consecutive lifted points are ``target`` apart."""
        pts = [np.asarray(path(0.0), dtype=float)]
        s = 0.0
        guess = target
        for _ in range(count - 1):
            if s >= s_max:
                break
            p3 = self.model.lift(pts[-1])

            def dist(sq):
                return np.linalg.norm(self.model.lift(np.asarray(path(sq))) - p3)

            hi = min(s + guess, s_max)
            while dist(hi) < target and hi < s_max:
                hi = min(hi + guess, s_max)
            if dist(hi) < target:
                break  # path exhausted
            lo = s
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if dist(mid) < target:
                    lo = mid
                else:
                    hi = mid
            guess = max(hi - s, 1e-6)
            s = hi
            pts.append(np.asarray(path(s), dtype=float))
        if len(pts) < count:
            raise InfeasibleReferenceError(
                f"path supports only {len(pts)} samples, need {count}"
            )
        return np.array(pts)

    def _build(self, xy, v_desired):
        n = len(xy) - 2
        chords = np.diff(xy, axis=0)
        headings = np.arctan2(chords[:, 1], chords[:, 0])
        self._xy = xy[: n + 1]
        self._heading = headings[: n + 1]
        self._speed = np.zeros(n)
        self._omega = np.zeros(n)
        for k in range(n):
            grad = self.model.gradient(xy[k, 0], xy[k, 1])
            d_k = np.array([np.cos(headings[k]), np.sin(headings[k])])
            alpha = 1.0 / np.sqrt(1.0 + float(grad @ d_k) ** 2)
            beta = 1.0 / np.sqrt(1.0 + float(grad @ grad))
            self._speed[k] = np.linalg.norm(chords[k]) / (alpha * self.dt)
            self._omega[k] = _wrap_angle(headings[k + 1] - headings[k]) / (self.dt * beta)

    def point(self, k: int) -> ReferencePoint:
        k = min(max(int(k), 0), self.steps)
        if k >= len(self._speed):
            # hold the final pose; zero input keeps it an exact fixed point
            x = ugv_state(self.model, self._xy[len(self._speed)],
                          self._heading[len(self._speed)])
            return ReferencePoint(x=x, u=np.zeros(2))
        x = ugv_state(self.model, self._xy[k], self._heading[k])
        return ReferencePoint(x=x, u=np.array([self._speed[k], self._omega[k]]))

    def window(self, k: int, n: int):
        return [self.point(k + i) for i in range(n)]


def line_path(heading: float = 0.0, origin=(0.0, 0.0)):
    """Straight planar path through ``origin`` with constant ``heading``."""
    d = np.array([np.cos(heading), np.sin(heading)])
    o = np.asarray(origin, dtype=float)

    def path(s):
        return o + s * d

    return path


def circle_path(radius: float, center=(0.0, 0.0)):
    """Planar circle traversed counter-clockwise, parametrized by angle."""
    c = np.asarray(center, dtype=float)

    def path(s):
        return c + radius * np.array([np.cos(s), np.sin(s)])

    return path


def sine_path(amplitude: float, wavelength: float):
    """Sine lateral sweep along +x, starting at the origin heading +x."""

    def path(s):
        return np.array([s, amplitude * np.sin(2.0 * np.pi * s / wavelength)])

    return path
