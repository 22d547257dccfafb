"""Least-squares fitting of quadratic surface models to point samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError
from .manifolds import SurfaceModel


@dataclass(frozen=True)
class SurfaceFit:
    model: SurfaceModel
    residual_rms: float
    n_points: int


def fit_surface(points) -> SurfaceFit:
    """Fit z = F(x, y) to (x, y, z) samples by linear least squares.

    Requires at least six samples in a non-degenerate configuration (the
    quadratic design matrix must have full column rank).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be an (n, 3) array")
    if pts.shape[0] < 6:
        raise DegenerateSampleError(f"need at least 6 samples, got {pts.shape[0]}")
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    design = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    if np.linalg.matrix_rank(design) < 6:
        raise DegenerateSampleError("sample configuration does not determine a quadratic")
    coeffs, _, _, _ = np.linalg.lstsq(design, z, rcond=None)
    residual = design @ coeffs - z
    rms = float(np.sqrt(np.mean(residual**2)))
    return SurfaceFit(model=SurfaceModel(coeffs), residual_rms=rms, n_points=pts.shape[0])


def fit_surface_window(points, center_xy, k: int = 25) -> SurfaceFit:
    """Fit a local quadratic to the ``k`` samples nearest ``center_xy``."""
    pts = np.asarray(points, dtype=float)
    center = np.asarray(center_xy, dtype=float)
    d2 = np.sum((pts[:, :2] - center) ** 2, axis=1)
    nearest = pts[np.argsort(d2)[: min(k, len(pts))]]
    return fit_surface(nearest)


def sample_surface(model: SurfaceModel, center=(0.0, 0.0), half_extent=2.0,
                   grid=5, noise_std=0.0, rng=None):
    """Synthesize an (n, 3) sample cloud of a surface on a regular grid,
    optionally with Gaussian height noise."""
    cx, cy = center
    axis = np.linspace(-half_extent, half_extent, grid)
    xs, ys = np.meshgrid(cx + axis, cy + axis)
    xs, ys = xs.ravel(), ys.ravel()
    zs = model.height(xs, ys)
    if noise_std > 0.0:
        if rng is None:
            rng = np.random.default_rng()
        zs = zs + rng.normal(0.0, noise_std, size=zs.shape)
    return np.column_stack([xs, ys, zs])


def save_surface_samples(path, points):
    """Write samples as plain text, one ``x y z`` triple per line (meters)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be an (n, 3) array")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, y, z in pts:
            fh.write(f"{x:.12g} {y:.12g} {z:.12g}\n")


def load_surface_samples(path):
    """Read an (n, 3) sample array written by :func:`save_surface_samples`."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split()
            if len(cells) != 3:
                raise ValueError(f"expected 'x y z' per line, got: {line!r}")
            rows.append([float(c) for c in cells])
    return np.array(rows).reshape(-1, 3)
