import numpy as np
import pytest

from manifold_mpc.dynamics import ReferencePoint, fd_error_jacobians, linearize, step
from manifold_mpc.errors import InfeasibleReferenceError
from manifold_mpc.quadrotor import (
    GRAVITY,
    QuadCircleReference,
    QuadLoopReference,
    attitude_from_thrust,
    quad_state,
    quad_system,
    quad_unpack,
)
from manifold_mpc.rotations import is_rotation, skew, so3_exp


def test_hover_has_zero_perturbation():
    sys_ = quad_system()
    hover = quad_state(np.zeros(3), np.zeros(3), np.eye(3))
    f = sys_.f(hover, np.array([GRAVITY, 0.0, 0.0, 0.0]))
    assert np.abs(f).max() < 1e-15


def test_thrust_cancels_gravity_at_any_attitude():
    rng = np.random.default_rng(0)
    sys_ = quad_system()
    for _ in range(20):
        rot = so3_exp(rng.uniform(-0.5, 0.5, 3))
        # choose thrust so a_T R e3 equals gravity: only possible when the
        # body z axis is vertical, so tilt the state accordingly
        a_t = GRAVITY / (rot @ np.array([0.0, 0.0, 1.0]))[2]
        x = quad_state(np.zeros(3), rng.standard_normal(3), rot)
        f = sys_.f(x, np.array([a_t, 0.0, 0.0, 0.0]))
        # acceleration block vanishes only when the lateral components do
        if abs((rot @ np.array([0.0, 0.0, 1.0]))[0]) < 1e-12 and \
           abs((rot @ np.array([0.0, 0.0, 1.0]))[1]) < 1e-12:
            assert np.abs(f[3:6]).max() < 1e-12
        else:
            assert abs(f[5]) < 1e-9  # vertical component always cancels


def test_state_jacobian_rotation_block_at_hover():
    sys_ = quad_system()
    hover = quad_state(np.zeros(3), np.zeros(3), np.eye(3))
    u = np.array([GRAVITY, 0.0, 0.0, 0.0])
    block = sys_.dfdx(hover, u)[3:6, 6:9]
    assert np.allclose(block, GRAVITY * skew([0.0, 0.0, 1.0]), atol=1e-12)
    dfdu = sys_.dfdu(hover, u)
    assert np.allclose(dfdu[3:6, 0], [0.0, 0.0, -1.0])
    assert np.allclose(dfdu[6:9, 1:4], np.eye(3))


def test_analytic_jacobians_match_finite_differences():
    sys_ = quad_system()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        x = sys_.manifold.random_point(rng)
        u = np.concatenate([[rng.uniform(0.0, 25.0)], rng.uniform(-4.0, 4.0, 3)])
        ref = ReferencePoint(x=x, u=u)
        lin = linearize(sys_, ref, 0.01)
        F_x, F_u = fd_error_jacobians(sys_, ref, 0.01)
        worst = max(worst, np.abs(lin.F_x - F_x).max(), np.abs(lin.F_u - F_u).max())
    assert worst < 1e-5


def test_zero_speed_circle_is_hover_reference():
    ref = QuadCircleReference(radius=1.3, speed_max=0.0, ramp_time=0.0, dt=0.01)
    point = ref.point(17)
    assert point.u[0] == pytest.approx(GRAVITY, abs=1e-9)
    assert np.abs(point.u[1:]).max() < 1e-9
    _, v, rot = quad_unpack(point.x)
    assert np.abs(v).max() < 1e-12
    assert np.allclose(rot, np.eye(3), atol=1e-12)


def test_circle_acceleration_reaches_two_g():
    # steady 5 m/s on a 1.3 m circle: centripetal 19.23 m/s^2 ~ 1.96 g
    ref = QuadCircleReference(radius=1.3, speed_max=5.0, ramp_time=6.0, dt=0.01)
    k = int(8.0 / 0.01)  # well past the ramp
    p0, p1, p2 = (ref.position(t) for t in (8.0 - 0.01, 8.0, 8.0 + 0.01))
    accel = np.linalg.norm(p2 - 2 * p1 + p0) / 0.01**2
    assert accel == pytest.approx(5.0**2 / 1.3, rel=1e-3)
    assert accel / GRAVITY == pytest.approx(1.96, abs=0.01)
    # the thrust demand folds in gravity
    assert ref.point(k).u[0] == pytest.approx(np.hypot(19.23, GRAVITY), rel=1e-2)


@pytest.mark.parametrize("make_ref", [
    lambda dt: QuadCircleReference(radius=1.3, speed_max=5.0, ramp_time=6.0, dt=dt),
    lambda dt: QuadCircleReference(radius=1.0, speed_max=2.0, ramp_time=1.0, dt=dt,
                                   yaw_policy="tangent"),
    lambda dt: QuadLoopReference(radius=1.0, speed=4.8, dt=dt),
])
def test_reference_satisfies_model_step(make_ref):
    dt = 0.01
    sys_ = quad_system()
    ref = make_ref(dt)
    worst = 0.0
    for k in range(0, 820, 5):
        a = ref.point(k)
        b = ref.point(k + 1)
        defect = sys_.manifold.boxminus(step(sys_, a.x, a.u, dt), b.x)
        worst = max(worst, np.abs(defect).max())
    assert worst < 1e-3   # required consistency
    assert worst < 1e-9   # divided-difference construction is exact


def test_reference_states_are_valid_manifold_points():
    ref = QuadCircleReference(radius=1.3, speed_max=5.0, ramp_time=6.0, dt=0.01)
    sys_ = quad_system()
    for k in range(0, 1000, 50):
        sys_.manifold.check_point(ref.point(k).x)
        _, _, rot = quad_unpack(ref.point(k).x)
        assert is_rotation(rot)


def test_free_fall_reference_rejected():
    # a loop with v^2/r equal to gravity has zero thrust demand at the top
    ref = QuadLoopReference(radius=1.0, speed=np.sqrt(GRAVITY), dt=0.01)
    top = int(np.pi * 1.0 / np.sqrt(GRAVITY) / 0.01)
    with pytest.raises(InfeasibleReferenceError):
        for k in range(top - 5, top + 5):
            ref.point(k)


def test_attitude_from_thrust_identity_and_degenerate():
    rot = attitude_from_thrust(np.array([0.0, 0.0, GRAVITY]), 0.0)
    assert np.allclose(rot, np.eye(3), atol=1e-12)
    with pytest.raises(InfeasibleReferenceError):
        attitude_from_thrust(np.array([0.0, 0.0, 0.01]), 0.0)
    with pytest.raises(InfeasibleReferenceError):
        attitude_from_thrust(np.array([0.0, 5.0, 0.0]), 0.0)  # parallel to yaw y axis


def test_loop_goes_inverted():
    ref = QuadLoopReference(radius=1.0, speed=4.8, dt=0.01)
    period = 2 * np.pi * 1.0 / 4.8
    top = int(0.5 * period / 0.01)
    _, _, rot = quad_unpack(ref.point(top).x)
    # body z (down) axis points up at the top of the loop
    assert (rot @ np.array([0.0, 0.0, 1.0]))[2] < -0.9
