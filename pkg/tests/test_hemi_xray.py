import numpy as np
import pytest

from hemiray import hemi_xray as hx, phantoms
from hemiray.errors import ValidationError

RAYS = hx.ray_grid(90, 45)


def ones(p):
    return np.ones(p.shape[:-1])


def test_constant_field_rays():
    F = hx.t_lambda_forward(ones, 0.0, *RAYS)
    np.testing.assert_allclose(F.values, np.pi, rtol=1e-12)
    F = hx.t_lambda_forward(ones, 0.3, *RAYS)
    np.testing.assert_allclose(F.values, (1 - np.exp(-0.3 * np.pi)) / 0.3, rtol=1e-9)


def test_cap_indicator_chord():
    a0 = 0.5
    f = hx.SphereField.from_function(lambda p: (p[..., 2] > a0) * 1.0, 512, 512)
    beta = np.array([np.pi / 2, 1.2])
    F = hx.t_lambda_forward(f, 0.0, np.array([0.3]), beta, n_t=2048)
    xi3 = np.sin(beta)
    np.testing.assert_allclose(F.values[0], np.pi - 2 * np.arcsin(a0 / xi3), atol=2e-2)


def test_negative_lambda():
    with pytest.raises(ValidationError):
        hx.t_lambda_forward(ones, -0.1, *RAYS)


def test_linear():
    f1 = phantoms.cap_bump([0.1, 0, 1], 0.4)
    f2 = phantoms.cap_bump([-0.2, 0.1, 1], 0.3)
    a = hx.t_lambda_forward(lambda p: 2 * f1(p) - 3 * f2(p), 0.1, *RAYS).values
    b = 2 * hx.t_lambda_forward(f1, 0.1, *RAYS).values - 3 * hx.t_lambda_forward(f2, 0.1, *RAYS).values
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_mu_norm():
    alpha, beta = hx.ray_grid(360, 180)
    one = hx.HemiRayData(alpha, beta, np.ones((360, 180)))
    np.testing.assert_allclose(hx.mu_norm(one), 2 * np.sqrt(np.pi), rtol=1e-4)
    assert hx.mu_norm(hx.HemiRayData(alpha, beta, np.zeros((360, 180)))) == 0
    F = hx.HemiRayData(alpha, beta, np.random.default_rng(0).normal(size=(360, 180)))
    np.testing.assert_allclose(hx.mu_norm(hx.HemiRayData(alpha, beta, 2 * F.values)),
                               2 * hx.mu_norm(F))


def test_santalo_constant_and_zero():
    np.testing.assert_allclose(hx.santalo_rhs(ones, *RAYS), 2 * np.pi, rtol=1e-3)
    assert hx.santalo_rhs(lambda p: 0 * p[..., 0], *RAYS) == 0


def test_santalo_zonal():
    from scipy import integrate

    def g(c):
        return np.exp(-2 * (1 - c)) * c

    f = hx.SphereField.from_function(lambda p: g(p[..., 2]))
    ref = 2 * np.pi * integrate.quad(lambda s: g(np.cos(s)) * np.sin(s), 0, np.pi / 2)[0]
    rhs = hx.santalo_rhs(f, *hx.ray_grid(180, 90))
    assert abs(rhs - ref) / ref < 1e-3


def test_l2_continuity_and_monotonicity():
    specs = phantoms.random_cap_specs(5, seed=3)
    fields = np.stack([hx.SphereField.from_function(phantoms.from_specs(s), 128, 128).values
                       for s in specs])
    f = hx.SphereField(fields)
    prev = None
    for lam in (0.0, 0.05, 0.2):
        F = hx.t_lambda_forward(f, lam, *RAYS)
        assert np.all(hx.mu_norm(F) ** 2 <= np.pi * 2 * np.pi * f.l2_norm() ** 2)
        if prev is not None:
            assert np.all(F.values <= prev + 1e-14)
        prev = F.values


def test_sphere_field_cap_check():
    full = hx.SphereField.from_function(ones, 32, 32).values
    with pytest.raises(ValidationError):
        hx.SphereField(full, alpha0=0.5)
    f = hx.SphereField.from_function(ones, 32, 32, alpha0=0.5)
    assert f.alpha0 == 0.5


def test_hemi_data_validation():
    with pytest.raises(ValidationError):
        hx.HemiRayData([0.0], [0.0, 1.0], np.zeros((1, 2)))
    with pytest.raises(ValidationError):
        hx.HemiRayData([0.0], [1.0], np.array([[np.nan]]))
