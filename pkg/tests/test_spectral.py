import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hemiray import spectral
from hemiray.errors import ValidationError
from hemiray.euclid_xray import PlaneField


def plane_wave(k, n=64, S=np.pi):
    return PlaneField.from_function(lambda x, y: np.exp(1j * (k[0] * x + k[1] * y)), n, S)


def zero_mean(n=64, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, n))
    return PlaneField(v - v.mean(), np.pi)


def test_plane_wave_eigen():
    g = plane_wave((1, 0))
    out = spectral.fractional_multiplier(g, 1.0)
    np.testing.assert_allclose(out.values, g.values, atol=1e-12)
    g = plane_wave((3, 4))
    out = spectral.fractional_multiplier(g, 0.5, "inhomogeneous")
    np.testing.assert_allclose(out.values, 26 ** 0.25 * g.values, atol=1e-11)


def test_identity_and_inverse_pair():
    g = zero_mean()
    np.testing.assert_allclose(spectral.fractional_multiplier(g, 0).values, g.values, atol=1e-13)
    back = spectral.fractional_multiplier(spectral.fractional_multiplier(g, -1), 1)
    np.testing.assert_allclose(back.values, g.values, atol=1e-10)


def test_zero_mode_policy():
    g = PlaneField(np.ones((32, 32)), 1.0)
    with pytest.raises(ValidationError):
        spectral.fractional_multiplier(g, -1)
    out = spectral.fractional_multiplier(g, -1, zero_mode="drop")
    assert out.metadata["zero_mode"] == "drop"
    np.testing.assert_allclose(out.values, 0, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(s=st.floats(-2, 2), t=st.floats(-2, 2))
def test_composition(s, t):
    g = zero_mean(32, 1)
    for kind in ("homogeneous", "inhomogeneous"):
        two = spectral.fractional_multiplier(spectral.fractional_multiplier(g, s, kind), t, kind)
        one = spectral.fractional_multiplier(g, s + t, kind)
        np.testing.assert_allclose(two.values, one.values, atol=1e-10 * np.abs(one.values).max())


def test_sobolev_norms():
    g = plane_wave((2, 1))
    for s in (-0.5, 0.0, 1.0):
        np.testing.assert_allclose(spectral.sobolev_norm(g, s), 6 ** (s / 2) * 2 * np.pi, rtol=1e-12)
    h = zero_mean()
    np.testing.assert_allclose(spectral.sobolev_norm(h, 0), h.l2_norm(), rtol=1e-12)
    vals = [spectral.sobolev_norm(h, s) for s in np.linspace(-1, 1, 9)]
    assert np.all(np.diff(vals) >= 0)


def test_ramp_filter_matches_spectral():
    dp = 0.02
    p = (np.arange(512) - 256) * dp
    f = np.exp(-p ** 2 / 0.05)
    out = spectral.ramp_filter(f, dp)
    k = 2 * np.pi * np.fft.fftfreq(4096, dp)
    big = np.zeros(4096)
    big[:512] = f
    ref = np.fft.ifft(np.abs(k) * np.fft.fft(big)).real[:512]
    np.testing.assert_allclose(out, ref, atol=2e-3 * np.abs(ref).max())


def test_line_fourier_indicator():
    ell = np.linspace(-1.5, 1.5, 30001)
    f = (np.abs(ell) <= 1) * 1.0
    lam = np.array([0.5, 2.0, 7.0])
    np.testing.assert_allclose(spectral.line_fourier(f, ell, lam), 2 * np.sin(lam) / lam, atol=2e-4)
    mu = 0.7
    exact = (np.exp(mu - 1j * lam) - np.exp(-mu + 1j * lam)) / (mu - 1j * lam)
    np.testing.assert_allclose(spectral.line_fourier(f, ell, lam, mu), exact, atol=5e-4)


def test_line_fourier_errors():
    ell = np.linspace(-1, 1, 101)
    with pytest.raises(ValidationError):
        spectral.line_fourier(np.ones(101), ell, 0.0)
    with pytest.raises(ValidationError):
        spectral.line_fourier(np.zeros(101), ell, 0.0, mu=-1)


def test_line_fourier_bound_random_bumps():
    rng = np.random.default_rng(9)
    ell = np.linspace(-1.2, 1.2, 2401)
    for _ in range(50):
        c, r = rng.uniform(-0.5, 0.5), rng.uniform(0.1, 0.5)
        f = np.where(np.abs(ell - c) < r, np.exp(-1 / np.maximum(1 - ((ell - c) / r) ** 2, 1e-300)), 0)
        f = f * rng.normal(size=1)
        mu, lam = rng.uniform(0, 3), rng.uniform(-10, 10)
        lhs = abs(spectral.line_fourier(f, ell, lam, mu))
        l1 = np.trapezoid(np.abs(f), ell)
        assert lhs <= np.exp(mu * 1.0) * l1 * (1 + 1e-8)


def test_line_fourier_vector_values():
    ell = np.linspace(-1.5, 1.5, 3001)
    base = np.where(np.abs(ell) <= 1, 1 - ell ** 2, 0.0)
    f = np.stack([base, 2 * base], axis=-1)
    out = spectral.line_fourier(f, ell, np.array([0.3, 1.0]))
    np.testing.assert_allclose(out[:, 1], 2 * out[:, 0])


def test_q_transform_against_radial_quadrature():
    from scipy import integrate

    def q(pts):
        r = np.linalg.norm(pts, axis=-1)
        return np.where((r > 1) & (r < 2), np.sin(np.pi * (r - 1)) ** 4, 0.0)

    omega = np.array([0.0, 0.6, 0.8])
    lam = 1.3
    Q = spectral.q_transform(q, np.zeros(3), omega, lam, np.log(0.9), np.log(2.2), n=4001)

    def integrand(t, part):
        v = np.exp(2j * lam * t) * np.exp(2 * t) * q(np.exp(t) * omega)
        return v.real if part == 0 else v.imag

    ref = sum(c * integrate.quad(integrand, 0, np.log(2), args=(k,), epsabs=1e-13, limit=200)[0]
              for k, c in enumerate((1, 1j)))
    assert abs(Q - ref) < 1e-6 * abs(ref)
