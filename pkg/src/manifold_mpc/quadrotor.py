"""Quadrotor model and reference generators.

World frame is forward-right-down, so gravity is +9.81 on the third axis
and the body thrust axis is the body z (down) axis: the rotor force enters
the velocity dynamics as ``-a_T * R @ e3``.

State lives on position x velocity x attitude; the ambient layout is
``[p(3), v(3), R(9, row-major)]``. Input is ``[a_T, wx, wy, wz]`` with
thrust in acceleration units (m/s^2) and body rates in rad/s.
"""

from __future__ import annotations

import numpy as np

from .dynamics import CanonicalSystem, ReferencePoint
from .errors import InfeasibleReferenceError
from .manifolds import Euclidean, Product, Rot3
from .rotations import skew, so3_log

GRAVITY = 9.81
E3 = np.array([0.0, 0.0, 1.0])
MIN_THRUST_NORM = 0.1  # m/s^2, free-fall singularity guard


def quad_manifold() -> Product:
    return Product([Euclidean(3), Euclidean(3), Rot3()])


def quad_state(p, v, rot):
    """Pack position, velocity and a 3x3 rotation into the ambient layout."""
    return np.concatenate(
        [np.asarray(p, float), np.asarray(v, float), np.asarray(rot, float).reshape(9)]
    )


def quad_unpack(x):
    x = np.asarray(x, dtype=float)
    return x[0:3], x[3:6], x[6:15].reshape(3, 3)


def quad_system(gravity: float = GRAVITY) -> CanonicalSystem:
    """Canonical quadrotor: f = [v, g - a_T R e3, w]."""
    g_vec = np.array([0.0, 0.0, gravity])

    def f(x, u):
        _, v, rot = quad_unpack(x)
        a_t = u[0]
        omega = np.asarray(u[1:4], dtype=float)
        return np.concatenate([v, g_vec - a_t * (rot @ E3), omega])

    def dfdx(x, u):
        _, _, rot = quad_unpack(x)
        a_t = u[0]
        out = np.zeros((9, 9))
        out[0:3, 3:6] = np.eye(3)
        out[3:6, 6:9] = a_t * rot @ skew(E3)
        return out

    def dfdu(x, u):
        _, _, rot = quad_unpack(x)
        out = np.zeros((9, 4))
        out[3:6, 0] = -(rot @ E3)
        out[6:9, 1:4] = np.eye(3)
        return out

    return CanonicalSystem(manifold=quad_manifold(), input_dim=4, f=f, dfdx=dfdx, dfdu=dfdu)


def attitude_from_thrust(thrust_vec, yaw):
    """Rotation whose body z axis carries the thrust vector, with the body
    x axis as close as possible to the world heading ``yaw``."""
    norm = np.linalg.norm(thrust_vec)
    if norm < MIN_THRUST_NORM:
        raise InfeasibleReferenceError(
            f"thrust magnitude {norm:.3f} m/s^2 below the free-fall guard"
        )
    y_c = np.array([-np.sin(yaw), np.cos(yaw), 0.0])
    x_b = np.cross(y_c, thrust_vec)
    x_norm = np.linalg.norm(x_b)
    if x_norm < 1e-9:
        raise InfeasibleReferenceError("thrust direction parallel to the yaw frame y axis")
    x_b /= x_norm
    y_b = np.cross(thrust_vec, x_b)
    y_b /= np.linalg.norm(y_b)
    z_b = np.cross(x_b, y_b)
    return np.column_stack([x_b, y_b, z_b])


class _FlatReference:
    """Reference generator driven by an analytic position trajectory.

    Velocities and thrust are taken from divided differences of the sampled
    positions, and body rates from the relative rotation of consecutive
    attitudes, so each emitted point satisfies the discrete model step
    exactly. Thrust and attitude then match the smooth flatness quantities
    to second order in the sampling period.
    """

    def __init__(self, dt, gravity=GRAVITY, yaw_policy="fixed", yaw=0.0):
        if yaw_policy not in ("fixed", "tangent"):
            raise ValueError("yaw_policy must be 'fixed' or 'tangent'")
        self.dt = float(dt)
        self.g_vec = np.array([0.0, 0.0, gravity])
        self.yaw_policy = yaw_policy
        self.yaw_fixed = float(yaw)

    def position(self, t):
        raise NotImplementedError

    def _vel(self, k):
        t = k * self.dt
        return (self.position(t + self.dt) - self.position(t)) / self.dt

    def _yaw(self, k):
        if self.yaw_policy == "fixed":
            return self.yaw_fixed
        v = self._vel(k)
        if np.hypot(v[0], v[1]) < 1e-9:
            return self.yaw_fixed
        return np.arctan2(v[1], v[0])

    def _attitude(self, k):
        thrust = self.g_vec - (self._vel(k + 1) - self._vel(k)) / self.dt
        return attitude_from_thrust(thrust, self._yaw(k)), np.linalg.norm(thrust)

    def point(self, k: int) -> ReferencePoint:
        rot_k, a_t = self._attitude(k)
        rot_next, _ = self._attitude(k + 1)
        omega = so3_log(rot_k.T @ rot_next) / self.dt
        x = quad_state(self.position(k * self.dt), self._vel(k), rot_k)
        u = np.concatenate([[a_t], omega])
        return ReferencePoint(x=x, u=u)

    def window(self, k: int, n: int):
        return [self.point(k + i) for i in range(n)]


class QuadCircleReference(_FlatReference):
    """Horizontal circle with a smooth speed ramp.

    Tangential speed follows a raised-cosine ramp from zero to ``speed_max``
    over ``ramp_time`` seconds and stays constant afterwards.
    """

    def __init__(self, radius, speed_max, ramp_time, dt, altitude=-1.5,
                 center=(0.0, 0.0), yaw_policy="fixed", yaw=0.0, gravity=GRAVITY):
        super().__init__(dt, gravity=gravity, yaw_policy=yaw_policy, yaw=yaw)
        if radius <= 0.0:
            raise ValueError("radius must be > 0")
        if speed_max < 0.0 or ramp_time < 0.0:
            raise ValueError("speed_max and ramp_time must be >= 0")
        self.radius = float(radius)
        self.speed_max = float(speed_max)
        self.ramp_time = float(ramp_time)
        self.center = np.array([center[0], center[1], altitude])

    def _angle(self, t):
        # integral of the raised-cosine speed profile, divided by the radius
        v, T = self.speed_max, self.ramp_time
        if v == 0.0:
            return 0.0
        if T > 0.0 and t < T:
            arc = 0.5 * v * (t - (T / np.pi) * np.sin(np.pi * t / T))
        else:
            ramp_arc = 0.5 * v * T
            arc = ramp_arc + v * (t - T)
        return arc / self.radius

    def speed(self, t):
        v, T = self.speed_max, self.ramp_time
        if T > 0.0 and t < T:
            return 0.5 * v * (1.0 - np.cos(np.pi * t / T))
        return v

    def position(self, t):
        phi = self._angle(t)
        return self.center + self.radius * np.array([np.cos(phi), np.sin(phi), 0.0])


class QuadLoopReference(_FlatReference):
    """Single vertical loop in the x-z plane at constant speed.

    The loop starts at its lowest point; the top of the loop sits
    ``2 * radius`` above it. ``speed**2 / radius`` should comfortably exceed
    gravity so the inverted segment keeps positive thrust.
    """

    def __init__(self, radius, speed, dt, start=(0.0, 0.0, -1.5), gravity=GRAVITY):
        super().__init__(dt, gravity=gravity, yaw_policy="fixed", yaw=0.0)
        if radius <= 0.0 or speed <= 0.0:
            raise ValueError("radius and speed must be > 0")
        self.radius = float(radius)
        self.speed = float(speed)
        self.start = np.asarray(start, dtype=float)

    def position(self, t):
        phi = self.speed * t / self.radius
        return self.start + self.radius * np.array(
            [np.sin(phi), 0.0, -(1.0 - np.cos(phi))]
        )
