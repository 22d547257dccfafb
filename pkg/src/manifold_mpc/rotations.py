"""Exponential/logarithm maps for planar and spatial rotations.

Angles are radians throughout. Rotation matrices act on column vectors.
"""

from __future__ import annotations

import numpy as np

from .errors import OutOfChartError

# Below this angle the closed forms divide ~0/~0; switch to series.
SMALL_ANGLE = 1e-7


def skew(v):
    """3x3 skew-symmetric matrix such that skew(v) @ w == cross(v, w)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m):
    """Inverse of :func:`skew` for a skew-symmetric 3x3 matrix."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def so3_exp(rvec):
    """Rotation matrix for a rotation-vector (axis * angle) in R^3."""
    rvec = np.asarray(rvec, dtype=float)
    theta = np.linalg.norm(rvec)
    s = skew(rvec)
    if theta < SMALL_ANGLE:
        return np.eye(3) + s + 0.5 * (s @ s)
    return (
        np.eye(3)
        + (np.sin(theta) / theta) * s
        + ((1.0 - np.cos(theta)) / theta**2) * (s @ s)
    )


def so3_log(rot):
    """Rotation vector of a rotation matrix.

    Raises
    ------
    OutOfChartError
        If the rotation angle is within 1e-4 of pi, where the closed form
        degenerates.
    """
    rot = np.asarray(rot, dtype=float)
    cos_a = 0.5 * (np.trace(rot) - 1.0)
    alpha = np.arccos(np.clip(cos_a, -1.0, 1.0))
    if alpha >= np.pi - 1e-4:
        raise OutOfChartError(f"rotation angle {alpha:.6f} too close to pi")
    w = vee(0.5 * (rot - rot.T))  # = sin(alpha) * axis
    if alpha < SMALL_ANGLE:
        return w * (1.0 + alpha**2 / 6.0)
    return w * (alpha / np.sin(alpha))


def so2_exp(angle):
    """2x2 rotation matrix for a plane angle."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def so2_log(rot):
    """Plane angle of a 2x2 rotation matrix, in (-pi, pi]."""
    return float(np.arctan2(rot[1, 0], rot[0, 0]))


def a_matrix(theta):
    """Coupling matrix between additive and multiplicative perturbations
    of a rotation vector.

    Its transpose maps an additive increment of the rotation vector to the
    tangent increment of the resulting rotation:
    log(exp(-theta) @ exp(theta + d)) ~= a_matrix(theta).T @ d.
    """
    theta = np.asarray(theta, dtype=float)
    t = np.linalg.norm(theta)
    s = skew(theta)
    if t < SMALL_ANGLE:
        return np.eye(3) + 0.5 * s + (s @ s) / 6.0
    return (
        np.eye(3)
        + ((1.0 - np.cos(t)) / t**2) * s
        + ((1.0 - np.sin(t) / t) / t**2) * (s @ s)
    )


def is_rotation(rot, tol=1e-9):
    """True if ``rot`` is orthonormal with positive determinant."""
    rot = np.asarray(rot, dtype=float)
    n = rot.shape[0]
    err = np.abs(rot.T @ rot - np.eye(n)).max()
    return bool(err < tol and np.linalg.det(rot) > 0.0)
