import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hemiray import geometry as geo
from hemiray.errors import DegenerateInputError, InfeasibleSceneError, ValidationError


def test_sphere_distance_basic():
    e1, e2, e3 = np.eye(3)
    assert geo.sphere_distance(e3, e3) == 0.0
    np.testing.assert_allclose(geo.sphere_distance(e1, e2), np.pi / 2)
    x = np.array([0.6, 0.0, 0.8])
    np.testing.assert_allclose(geo.sphere_distance(x, -x), np.pi)
    np.testing.assert_allclose(geo.sphere_distance(x, e1), geo.sphere_distance(e1, x))


def test_sphere_distance_rejects_non_unit():
    with pytest.raises(ValidationError):
        geo.sphere_distance([1.0, 1.0, 0.0], [0.0, 0.0, 1.0])


def test_geodesic_endpoints():
    r = geo.BoundaryRay.from_angles(0.4, 1.1)
    np.testing.assert_allclose(geo.geodesic_point(r, 0.0), r.base_point, atol=1e-15)
    np.testing.assert_allclose(geo.geodesic_point(r, np.pi / 2), r.dir, atol=1e-15)
    np.testing.assert_allclose(geo.geodesic_point(r, np.pi), -r.base_point, atol=1e-15)
    with pytest.raises(ValidationError):
        geo.geodesic_point(r, 3.5)


def test_geodesic_stays_in_hemisphere():
    r = geo.BoundaryRay.from_angles(2.0, 0.3)
    t = np.linspace(0.01, np.pi - 0.01, 50)
    pts = geo.geodesic_point(r, t)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=-1), 1.0, atol=1e-14)
    np.testing.assert_allclose(pts[:, -1], np.sin(t) * r.dir[-1])


def test_exp_inverse_north_pole():
    t, eta = geo.exp_inverse([1.0, 0.0], [0.0, 0.0, 1.0])
    np.testing.assert_allclose(t, np.pi / 2)
    np.testing.assert_allclose(eta, [0.0, 0.0, 1.0], atol=1e-15)


def test_exp_inverse_degenerate():
    with pytest.raises(DegenerateInputError):
        geo.exp_inverse([1.0, 0.0], [1.0, 0.0, 0.0])
    with pytest.raises(DegenerateInputError):
        geo.exp_inverse([1.0, 0.0], [-1.0, 0.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0, 2 * np.pi), beta=st.floats(0.05, np.pi - 0.05),
       t=st.floats(0.01, np.pi - 0.01))
def test_exp_inverse_round_trip(alpha, beta, t):
    r = geo.BoundaryRay.from_angles(alpha, beta)
    t_back, eta = geo.exp_inverse(r.base, geo.geodesic_point(r, t))
    assert abs(t_back - t) < 1e-9
    np.testing.assert_allclose(eta, r.dir, atol=1e-9)


def test_stereo_examples():
    np.testing.assert_allclose(geo.stereo_project([0.0, 0.0, 1.0]), [0.0, 0.0])
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(geo.stereo_project([0.0, s, s]), [0.0, 1.0])
    up = geo.stereo_lift(np.array([3.0, 4.0]))
    np.testing.assert_allclose(up, np.array([3.0, 4.0, 1.0]) / np.sqrt(26))
    with pytest.raises(ValidationError):
        geo.stereo_project([1.0, 0.0, 0.0])


def test_stereo_round_trip_and_bracket():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(200, 3))
    x[:, 2] = np.abs(x[:, 2]) + 0.05
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    z = geo.stereo_project(x)
    np.testing.assert_allclose(geo.stereo_lift(z), x, atol=1e-12)
    np.testing.assert_allclose(geo.japanese(z), 1 / x[:, 2], rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0, 2 * np.pi), beta=st.floats(0.1, np.pi - 0.1))
def test_half_great_circles_become_lines(alpha, beta):
    r = geo.BoundaryRay.from_angles(alpha, beta)
    z = geo.stereo_project(geo.geodesic_point(r, np.linspace(0.1, np.pi - 0.1, 20)))
    anchor = geo.stereo_project(r.dir)
    d = z - anchor
    cross = d[:, 0] * r.base[1] - d[:, 1] * r.base[0]
    assert np.max(np.abs(cross)) < 1e-9


def test_cap_params_ball():
    scene = geo.ball_scene([0.0, 0.0, 3.0], 1.0, [0.0, 0.0, 0.0])
    cp = geo.cap_params(scene)
    np.testing.assert_allclose(cp.omega0, [0, 0, 1], atol=1e-6)
    np.testing.assert_allclose([cp.s0, cp.rho0, cp.alpha0], [2.0, 4.0, 0.5], atol=1e-6)
    rel = scene.points - scene.x0
    dirs = rel / np.linalg.norm(rel, axis=1, keepdims=True)
    assert np.all(dirs @ cp.omega0 >= cp.alpha0 - 1e-9)


def test_cap_params_inside_raises():
    scene = geo.ball_scene([0.0, 0.0, 3.0], 1.0, [0.0, 0.0, 3.2])
    with pytest.raises(InfeasibleSceneError):
        geo.cap_params(scene)


def test_cap_params_rotation_invariant():
    rng = np.random.default_rng(4)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    base = geo.box_scene([-1, -1, 2], [1, 1, 3], [0.0, 0.0, 0.0], n=8)
    rot = geo.DomainScene(base.points @ q.T, base.normals @ q.T, base.x0)
    np.testing.assert_allclose(geo.cap_params(rot).alpha0, geo.cap_params(base).alpha0,
                               rtol=1e-4)


def test_front_set_ball():
    scene = geo.ball_scene([0.0, 0.0, 0.0], 1.0, [-3.0, 0.0, 0.0], n=30)
    fs = geo.front_set(scene, 0.0)
    x1 = scene.points[:, 0]
    np.testing.assert_array_equal(fs.mask, 1 + 3 * x1 <= 1e-12)
    k = np.argmin(np.linalg.norm(scene.points - [-1, 0, 0], axis=1))
    np.testing.assert_allclose(fs.weight[k], 0.5)
    assert np.all(fs.weight >= 0)


def test_front_set_nested():
    scene = geo.box_scene([-1, -1, -1], [1, 1, 1], [-4.0, 0.5, 0.0], n=10)
    masks = [geo.front_set(scene, d).mask for d in (0.0, 0.05, 0.2)]
    for small, big in zip(masks, masks[1:]):
        assert np.all(big[small])
