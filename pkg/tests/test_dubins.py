import math

import numpy as np
import pytest

from viewplan.dubins import (Configuration, VehicleParams,
                             dubins2d_lengths, plan_2d, plan_3d, plan_3d_lengths,
                             plan_modified_2d, sample_path)
from viewplan.dubins import _plan_3d_lengths_chunk

from oracles import dubins_length_oracle

TWO_PI = 2 * math.pi


def random_pose(rng, scale):
    return (rng.uniform(-scale, scale), rng.uniform(-scale, scale),
            rng.uniform(0, TWO_PI))


def random_config(rng, params, box=1000.0, z_hi=500.0):
    return Configuration(rng.uniform(-box, box), rng.uniform(-box, box),
                         rng.uniform(0.0, z_hi), rng.uniform(0, TWO_PI),
                         rng.uniform(params.gamma_min, params.gamma_max))


# --- planar paths ---------------------------------------------------------

def test_plan_2d_straight_line():
    path = plan_2d((0, 0, 0), (160, 0, 0), 40.0)
    assert path.length == pytest.approx(160.0)


def test_plan_2d_same_pose_zero():
    assert plan_2d((5, 5, 1.0), (5, 5, 1.0), 40.0).length == pytest.approx(0.0)


def test_plan_2d_half_turn_against_oracle():
    # frozen from the dense-search oracle: a half circle of radius 40
    path = plan_2d((0, 0, 0), (0, 80, math.pi), 40.0)
    assert path.length == pytest.approx(40.0 * math.pi, abs=1e-9)
    assert path.length == pytest.approx(
        dubins_length_oracle((0, 0, 0), (0, 80, math.pi), 40.0), abs=1e-6)


def test_plan_2d_matches_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(60):
        scale = 10 ** rng.uniform(0.5, 3.0)
        q0 = random_pose(rng, scale)
        q1 = random_pose(rng, scale)
        got = plan_2d(q0, q1, 40.0).length
        want = dubins_length_oracle(q0, q1, 40.0)
        assert got == pytest.approx(want, abs=1e-6), (q0, q1)


def test_plan_2d_at_least_euclidean():
    rng = np.random.default_rng(2)
    for _ in range(300):
        q0 = random_pose(rng, 500)
        q1 = random_pose(rng, 500)
        d = math.dist(q0[:2], q1[:2])
        assert plan_2d(q0, q1, 40.0).length >= d - 1e-9


def test_plan_2d_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        plan_2d((0, 0, 0), (1, 1, 0), 0.0)


def test_path_endpoints_exact():
    rng = np.random.default_rng(4)
    for _ in range(100):
        q0 = random_pose(rng, 300)
        q1 = random_pose(rng, 300)
        path = plan_2d(q0, q1, 40.0)
        end = path.end_pose()
        assert end[0] == pytest.approx(q1[0], abs=1e-6)
        assert end[1] == pytest.approx(q1[1], abs=1e-6)
        assert math.cos(end[2] - q1[2]) == pytest.approx(1.0, abs=1e-9)


# --- constant-pitch planar variant ---------------------------------------

def test_modified_2d_reference_pair(vehicle):
    q1 = Configuration(0, 0, 0, math.pi / 6, 0)
    q2 = Configuration(0, 300, 400, 0, 0)
    res = plan_modified_2d(q1, q2, vehicle)
    assert res.length == pytest.approx(523.0, rel=0.02)
    assert not res.feasible
    assert res.gamma_c > vehicle.gamma_max


def test_modified_2d_level_equals_planar(vehicle):
    q1 = Configuration(0, 0, 150, 0.3, 0)
    q2 = Configuration(400, 100, 150, 2.0, 0)
    res = plan_modified_2d(q1, q2, vehicle)
    planar = plan_2d((0, 0, 0.3), (400, 100, 2.0), vehicle.rho_min)
    assert res.gamma_c == 0.0
    assert res.length == pytest.approx(planar.length)
    assert res.feasible


def test_modified_2d_steep_is_infeasible(vehicle):
    q1 = Configuration(0, 0, 0, 0, 0)
    q2 = Configuration(1, 0, 500, 0, 0)
    res = plan_modified_2d(q1, q2, vehicle)
    assert not res.feasible
    assert res.length > 0


# --- decoupled 3D paths ---------------------------------------------------

def test_plan_3d_reference_pair(vehicle):
    q1 = Configuration(0, 0, 0, math.pi / 6, 0)
    q2 = Configuration(0, 300, 400, 0, 0)
    path = plan_3d(q1, q2, vehicle)
    assert path.length == pytest.approx(1184.0, rel=0.02)


def test_plan_3d_identical_configurations(vehicle):
    q = Configuration(10, 20, 200, 1.0, 0.05)
    assert plan_3d(q, q, vehicle).length == pytest.approx(0.0)


def test_plan_3d_level_long_range_matches_planar(vehicle):
    # co-altitude, level pitch: the vertical profile degenerates to a
    # straight line and the optimum drives the horizontal radius down to
    # the minimum turn radius
    rng = np.random.default_rng(9)
    d = 50.0 * vehicle.rho_min
    for _ in range(10):
        psi0 = rng.uniform(0, TWO_PI)
        psi1 = rng.uniform(0, TWO_PI)
        q1 = Configuration(0, 0, 200, psi0, 0)
        q2 = Configuration(d, 0, 200, psi1, 0)
        got = plan_3d(q1, q2, vehicle).length
        want = plan_2d((0, 0, psi0), (d, 0, psi1), vehicle.rho_min).length
        assert got == pytest.approx(want, rel=0.01)
        assert got >= want - 1e-6


def test_plan_3d_radius_coupling_exact(vehicle):
    rng = np.random.default_rng(5)
    for _ in range(20):
        qa = random_config(rng, vehicle)
        qb = random_config(rng, vehicle)
        path = plan_3d(qa, qb, vehicle)
        residual = abs(path.rho_h ** -2 + path.rho_v ** -2
                       - vehicle.rho_min ** -2) * vehicle.rho_min ** 2
        assert residual < 1e-9


def test_plan_3d_rejects_out_of_bound_pitch(vehicle):
    q1 = Configuration(0, 0, 0, 0, vehicle.gamma_max + 0.1)
    q2 = Configuration(100, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        plan_3d(q1, q2, vehicle)


def test_plan_3d_steep_connection_spirals(vehicle):
    # almost no planar displacement, large climb: needs extra revolutions
    q1 = Configuration(0, 0, 0, 0, 0)
    q2 = Configuration(5, 0, 800, 0, 0)
    path = plan_3d(q1, q2, vehicle)
    assert path.length >= 800 / math.sin(vehicle.gamma_max) - 1e-6
    samples = sample_path(path, vehicle.rho_min / 10)
    gammas = [c.gamma for c in samples]
    assert min(gammas) >= vehicle.gamma_min - 1e-6
    assert max(gammas) <= vehicle.gamma_max + 1e-6


def test_batch_lengths_match_scalar(vehicle):
    rng = np.random.default_rng(13)
    A = np.array([random_config(rng, vehicle).as_array() for _ in range(60)])
    B = np.array([random_config(rng, vehicle).as_array() for _ in range(60)])
    batch = plan_3d_lengths(A, B, vehicle)
    scalar = np.array([plan_3d(Configuration(*a), Configuration(*b), vehicle).length
                       for a, b in zip(A, B)])
    assert np.allclose(batch, scalar, rtol=2e-3)


def test_numpy_fallback_matches_kernel(vehicle):
    rng = np.random.default_rng(14)
    A = np.array([random_config(rng, vehicle).as_array() for _ in range(40)])
    B = np.array([random_config(rng, vehicle).as_array() for _ in range(40)])
    kernel = plan_3d_lengths(A, B, vehicle)
    fallback = _plan_3d_lengths_chunk(A, B, vehicle, 20, 2, 7)
    assert np.allclose(kernel, fallback, rtol=5e-3)


def test_dubins2d_lengths_vectorized_matches_plan(vehicle):
    rng = np.random.default_rng(15)
    poses0 = np.array([random_pose(rng, 500) for _ in range(50)])
    poses1 = np.array([random_pose(rng, 500) for _ in range(50)])
    lengths = dubins2d_lengths(poses0[:, 0], poses0[:, 1], poses0[:, 2],
                               poses1[:, 0], poses1[:, 1], poses1[:, 2], 40.0)
    for k in range(50):
        want = plan_2d(poses0[k], poses1[k], 40.0).length
        assert lengths[k] == pytest.approx(want, abs=1e-9)


# --- path sampling --------------------------------------------------------

def test_sample_straight_path():
    path = plan_2d((0, 0, 0), (100, 0, 0), 40.0)
    samples = sample_path(path, 10.0)
    assert len(samples) == 11
    ys = [c.y for c in samples]
    psis = [c.psi for c in samples]
    assert np.allclose(ys, 0.0, atol=1e-9)
    assert np.allclose(psis, 0.0, atol=1e-9)


def test_sample_arc_curvature_finite_difference():
    # single left arc: numerical curvature should equal 1/rho
    rho = 40.0
    path = plan_2d((0, 0, 0), (0, 2 * rho, math.pi), rho)  # half circle
    samples = sample_path(path, 0.05)
    pts = np.array([[c.x, c.y] for c in samples])
    d1 = np.gradient(pts, 0.05, axis=0)
    d2 = np.gradient(d1, 0.05, axis=0)
    speed = np.linalg.norm(d1, axis=1)
    num = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    curvature = num / speed ** 3
    interior = curvature[5:-5]
    assert np.allclose(interior, 1.0 / rho, rtol=1e-3)


def test_sample_heading_consistent_with_motion():
    path = plan_2d((0, 0, 0.7), (300, 100, 2.2), 40.0)
    ds = 0.02
    samples = sample_path(path, ds)
    pts = np.array([[c.x, c.y] for c in samples])
    psis = np.array([c.psi for c in samples])
    vel = (pts[2:] - pts[:-2]) / (2 * ds)
    headings = np.arctan2(vel[:, 1], vel[:, 0])
    err = np.abs(np.angle(np.exp(1j * (headings - psis[1:-1]))))
    assert err.max() < 1e-2


def test_sample_3d_endpoints(vehicle):
    rng = np.random.default_rng(21)
    for _ in range(10):
        qa = random_config(rng, vehicle)
        qb = random_config(rng, vehicle)
        path = plan_3d(qa, qb, vehicle)
        samples = sample_path(path, vehicle.rho_min / 10)
        first, last = samples[0], samples[-1]
        assert np.allclose([first.x, first.y, first.z], [qa.x, qa.y, qa.z], atol=1e-6)
        assert np.allclose([last.x, last.y, last.z], [qb.x, qb.y, qb.z], atol=1e-6)
        assert math.cos(first.psi - qa.psi) == pytest.approx(1.0, abs=1e-9)
        assert math.cos(last.psi - qb.psi) == pytest.approx(1.0, abs=1e-9)


def test_sample_3d_direction_field(vehicle):
    # velocity direction must follow (cos psi cos gamma, sin psi cos gamma,
    # sin gamma) along the path
    q1 = Configuration(0, 0, 100, 0.5, 0.0)
    q2 = Configuration(900, 400, 300, 2.5, 0.1)
    path = plan_3d(q1, q2, vehicle)
    ds = 0.05
    samples = sample_path(path, ds)
    pts = np.array([[c.x, c.y, c.z] for c in samples])
    vel = (pts[2:] - pts[:-2]) / (2 * ds)
    expected = np.array([
        [math.cos(c.psi) * math.cos(c.gamma),
         math.sin(c.psi) * math.cos(c.gamma),
         math.sin(c.gamma)] for c in samples[1:-1]])
    dots = np.einsum("ij,ij->i", vel, expected) / np.linalg.norm(vel, axis=1)
    assert dots.min() > 1 - 1e-4


def test_sample_path_rejects_bad_step():
    path = plan_2d((0, 0, 0), (10, 0, 0), 40.0)
    with pytest.raises(ValueError):
        sample_path(path, 0.0)


def test_vehicle_params_validation():
    with pytest.raises(ValueError):
        VehicleParams(0.0, -0.1, 0.1)
    with pytest.raises(ValueError):
        VehicleParams(40.0, 0.1, 0.2)
    with pytest.raises(ValueError):
        VehicleParams(40.0, -0.1, -0.05)
