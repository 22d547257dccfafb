"""Bundled closed-loop scenarios and the parameter-dict builder used by the
command line. All physical quantities are SI with unit-suffixed key names.
"""

from __future__ import annotations

import copy

import numpy as np
import scipy.linalg

from .dynamics import linearize
from .manifolds import SurfaceModel
from .mpc import MpcConfig
from .quadrotor import QuadCircleReference, QuadLoopReference, quad_system
from .simulate import Scenario
from .surfaces import fit_surface, load_surface_samples, sample_surface
from .ugv import UgvPathReference, circle_path, line_path, sine_path, ugv_system

SCENARIOS = {
    "quad-circle": {
        "description": "Quadrotor tracking a 1.3 m horizontal circle, ramping 0 to 5 m/s",
        "system": "quadrotor",
        "reference": {
            "type": "quad-circle",
            "radius_m": 1.3,
            "speed_max_mps": 5.0,
            "ramp_time_s": 6.0,
            "altitude_m": -1.5,
            "yaw_policy": "fixed",
            "yaw_rad": 0.0,
        },
        "mpc": {
            "horizon": 8,
            "dt_s": 0.01,
            "q_diag": [150.0, 150.0, 150.0, 25.0, 25.0, 25.0, 20.0, 20.0, 20.0],
            "r_diag": [0.08, 0.08, 0.08, 0.08],
            "u_min": [0.0, -12.0, -12.0, -12.0],
            "u_max": [35.0, 12.0, 12.0, 12.0],
            "terminal": "riccati",
        },
        "sim": {
            "duration_s": 10.0,
            "substeps": 10,
            "dx_init": [0.0] * 9,
            "noise_std": None,
            "seed": 0,
        },
    },
    "quad-loop": {
        "description": "Quadrotor flying one vertical loop at constant speed (stretch)",
        "system": "quadrotor",
        "reference": {
            "type": "quad-loop",
            "radius_m": 1.0,
            "speed_mps": 4.8,
            "start_m": [0.0, 0.0, -1.5],
        },
        "mpc": {
            "horizon": 8,
            "dt_s": 0.01,
            "q_diag": [150.0, 150.0, 150.0, 25.0, 25.0, 25.0, 20.0, 20.0, 20.0],
            "r_diag": [0.08, 0.08, 0.08, 0.08],
            "u_min": [0.0, -15.0, -15.0, -15.0],
            "u_max": [45.0, 15.0, 15.0, 15.0],
            "terminal": "riccati",
        },
        "sim": {
            "duration_s": 2.0,
            "substeps": 10,
            "dx_init": [0.0] * 9,
            "noise_std": None,
            "seed": 0,
        },
    },
    "ugv-hill": {
        "description": "Surface vehicle on a quadratic hill, sine path at 2.4 m/s",
        "system": "ugv",
        "surface": {
            # gentle hill: slopes stay below ~25 % over the traversed patch
            "coeffs": [-0.004, 0.002, -0.006, 0.12, -0.05, 0.6],
            "from_samples": True,
            "sample_grid": 7,
            "sample_half_extent_m": 18.0,
            "sample_noise_std_m": 0.0,
            "sample_seed": 0,
        },
        "reference": {
            "type": "sine-path",
            "amplitude_m": 1.2,
            "wavelength_m": 14.0,
            "speed_mps": 2.4,
        },
        "mpc": {
            "horizon": 45,
            "dt_s": 0.02,
            "q_diag": [40.0, 40.0, 8.0],
            "r_diag": [0.8, 0.8],
            "u_min": [-1.0, -2.5],
            "u_max": [4.0, 2.5],
        },
        "sim": {
            "duration_s": 12.0,
            "substeps": 10,
            "dx_init": [0.0, 0.5, 0.0],
            "noise_std": None,
            "seed": 0,
        },
    },
}


def scenario_ids():
    return sorted(SCENARIOS)


def scenario_params(name: str) -> dict:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario '{name}'; known: {', '.join(scenario_ids())}")
    return copy.deepcopy(SCENARIOS[name])


def merge_params(base: dict, overrides: dict) -> dict:
    """Recursive dict merge; override values replace base values."""
    out = copy.deepcopy(base)
    for key, val in overrides.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge_params(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _mpc_config(p: dict, terminal=None) -> MpcConfig:
    if terminal is None and p.get("p_diag") is not None:
        terminal = np.diag(np.asarray(p["p_diag"], dtype=float))
    return MpcConfig(
        horizon=int(p["horizon"]),
        dt=float(p["dt_s"]),
        Q=np.diag(np.asarray(p["q_diag"], dtype=float)),
        R=np.diag(np.asarray(p["r_diag"], dtype=float)),
        u_min=np.asarray(p["u_min"], dtype=float),
        u_max=np.asarray(p["u_max"], dtype=float),
        P_N=terminal,
        tol=float(p.get("tol", 1e-8)),
        max_iter=int(p.get("max_iter", 1000)),
    )


def _riccati_terminal(system, reference, p: dict) -> np.ndarray:
    """Infinite-horizon cost-to-go of the error system at the first
    reference point; couples the state blocks so short horizons still
    regulate position briskly."""
    lin = linearize(system, reference.point(0), float(p["dt_s"]))
    q = np.diag(np.asarray(p["q_diag"], dtype=float))
    r = np.diag(np.asarray(p["r_diag"], dtype=float))
    term = scipy.linalg.solve_discrete_are(lin.F_x, lin.F_u, q, r)
    return 0.5 * (term + term.T)


def _build_surface(p: dict) -> SurfaceModel:
    if p.get("sample_file"):
        return fit_surface(load_surface_samples(p["sample_file"])).model
    analytic = SurfaceModel(np.asarray(p["coeffs"], dtype=float))
    if not p.get("from_samples", False):
        return analytic
    rng = np.random.default_rng(int(p.get("sample_seed", 0)))
    samples = sample_surface(
        analytic,
        half_extent=float(p.get("sample_half_extent_m", 10.0)),
        grid=int(p.get("sample_grid", 7)),
        noise_std=float(p.get("sample_noise_std_m", 0.0)),
        rng=rng,
    )
    return fit_surface(samples).model


def build_scenario(name: str, params: dict) -> Scenario:
    """Turn a scenario parameter dict into a runnable Scenario."""
    sim = params["sim"]
    mpc_p = params["mpc"]
    dt = float(mpc_p["dt_s"])
    horizon = int(mpc_p["horizon"])
    ticks = int(round(float(sim["duration_s"]) / dt))
    noise = sim.get("noise_std")
    noise = None if noise is None else np.asarray(noise, dtype=float)

    if params["system"] == "quadrotor":
        system = quad_system()
        ref_p = params["reference"]
        if ref_p["type"] == "quad-circle":
            reference = QuadCircleReference(
                radius=float(ref_p["radius_m"]),
                speed_max=float(ref_p["speed_max_mps"]),
                ramp_time=float(ref_p["ramp_time_s"]),
                dt=dt,
                altitude=float(ref_p.get("altitude_m", -1.5)),
                yaw_policy=ref_p.get("yaw_policy", "fixed"),
                yaw=float(ref_p.get("yaw_rad", 0.0)),
            )
        elif ref_p["type"] == "quad-loop":
            reference = QuadLoopReference(
                radius=float(ref_p["radius_m"]),
                speed=float(ref_p["speed_mps"]),
                dt=dt,
                start=np.asarray(ref_p.get("start_m", [0.0, 0.0, -1.5]), dtype=float),
            )
        else:
            raise KeyError(f"unknown quadrotor reference type '{ref_p['type']}'")
        pos_slice, att_slice = slice(0, 3), slice(6, 9)
    elif params["system"] == "ugv":
        model = _build_surface(params["surface"])
        system = ugv_system(model)
        ref_p = params["reference"]
        speed = float(ref_p["speed_mps"])
        steps = ticks + horizon + 2
        # path long enough to cover the run plus the final horizon window
        span = speed * (steps + 2) * dt * 1.3 + 2.0
        if ref_p["type"] == "sine-path":
            path = sine_path(float(ref_p["amplitude_m"]), float(ref_p["wavelength_m"]))
            s_max = span
        elif ref_p["type"] == "line-path":
            path = line_path(float(ref_p.get("heading_rad", 0.0)))
            s_max = span
        elif ref_p["type"] == "circle-path":
            radius = float(ref_p["radius_m"])
            path = circle_path(radius)
            s_max = span / radius
        else:
            raise KeyError(f"unknown ugv reference type '{ref_p['type']}'")
        reference = UgvPathReference(
            path, s_max, model, speed, dt, steps,
            omega_max=float(mpc_p["u_max"][1]),
        )
        pos_slice, att_slice = slice(0, 3), slice(2, 3)
    else:
        raise KeyError(f"unknown system '{params['system']}'")

    terminal = None
    if mpc_p.get("terminal") == "riccati":
        terminal = _riccati_terminal(system, reference, mpc_p)
    cfg = _mpc_config(mpc_p, terminal=terminal)

    return Scenario(
        name=name,
        description=params.get("description", name),
        system=system,
        reference=reference,
        mpc=cfg,
        duration=float(sim["duration_s"]),
        dx_init=np.asarray(sim["dx_init"], dtype=float),
        seed=int(sim.get("seed", 0)),
        substeps=int(sim.get("substeps", 10)),
        noise_std=noise,
        pos_slice=pos_slice,
        att_slice=att_slice,
    )


def load_scenario(name: str, overrides: dict | None = None) -> Scenario:
    params = scenario_params(name)
    if overrides:
        params = merge_params(params, overrides)
    return build_scenario(name, params)
