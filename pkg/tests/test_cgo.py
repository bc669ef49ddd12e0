import numpy as np
import pytest

from hemiray import cgo
from hemiray.errors import ResolutionError, ValidationError


def grid(nt=41, nth=41, nph=41):
    t = np.linspace(-0.3, 0.3, nt)
    th = np.linspace(0.6, 2.4, nth)
    ph = np.linspace(0.0, 1.5, nph)
    T, TH, PH = np.meshgrid(t, th, ph, indexing="ij")
    return t, th, ph, T, TH, PH


def sin2(phi):
    return np.sin(phi) ** 2


# ---------------------------------------------------------------------------
# warped Laplacian


def test_shifts():
    assert cgo.laplace_shift(3) == 0.25
    assert cgo.profile_shift(3) == -0.25
    assert cgo.laplace_shift(2) == 0 and cgo.profile_shift(4) == 0


@pytest.mark.parametrize("form", ["direct", "conjugated"])
def test_radial_power(form):
    t, th, ph, T, TH, PH = grid()
    a = 1.5
    out = cgo.warped_laplacian(np.exp(a * T), t, th, ph, form=form)
    exact = a * (a + 1) * np.exp((a - 2) * T)
    inner = (slice(2, -2),) * 3
    np.testing.assert_allclose(out[inner], exact[inner], rtol=1e-3)


@pytest.mark.parametrize("form", ["direct", "conjugated"])
def test_harmonic_functions(form):
    t, th, ph, T, TH, PH = grid(61, 61, 61)
    for u in (np.exp(-T), np.exp(T) * np.cos(TH), np.exp(2 * T) * np.sin(TH) ** 2 * np.cos(2 * PH)):
        out = cgo.warped_laplacian(u, t, th, ph, form=form)
        inner = (slice(2, -2),) * 3
        assert np.max(np.abs(out[inner])) < 2e-3 * np.max(np.abs(u))


def test_forms_agree_and_check():
    t, th, ph, T, TH, PH = grid()
    u = np.exp(0.7 * T) * np.cos(TH) * np.sin(PH)
    a = cgo.warped_laplacian(u, t, th, ph, check_tol=1e-3)
    b = cgo.warped_laplacian(u, t, th, ph, form="conjugated")
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-3
    t, th, ph, T, TH, PH = grid(6, 6, 6)
    with pytest.raises(ResolutionError):
        cgo.warped_laplacian(np.exp(3 * T) * np.cos(4 * TH), t, th, ph, check_tol=1e-8)


def test_grid_errors():
    t, th, ph, T, TH, PH = grid()
    with pytest.raises(ResolutionError):
        cgo.warped_laplacian(T, t ** 3, th, ph)
    with pytest.raises(ValidationError):
        cgo.warped_laplacian(T, t, th, ph, n=4)
    with pytest.raises(ValidationError):
        cgo.warped_laplacian(T, t, th, ph, form="other")


def test_cartesian_laplacian():
    ax = np.linspace(-1, 1, 41)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    u = X ** 2 + 2 * Y ** 2 - Z ** 3
    np.testing.assert_allclose(cgo.laplacian_3d(u, ax[1] - ax[0]), 6 - 6 * Z, atol=1e-9)


# ---------------------------------------------------------------------------
# quasimodes


def test_quasimode_validation():
    with pytest.raises(ValidationError):
        cgo.Quasimode(2.0, sin2)
    with pytest.raises(ValidationError):
        cgo.Quasimode(2 + 1j, sin2, y=(1.0, 0.0, 0.5))


def test_chart_round_trip():
    q = cgo.Quasimode(3 + 1j, sin2, y=(0.0, 1.0, 0.0))
    th = np.linspace(0.1, 3.0, 7)
    ph = np.linspace(0.1, 3.0, 7)
    w = q.point(th, ph)
    assert np.all(w @ np.array(q.omega0) > 0)
    back = q.chart(w)
    np.testing.assert_allclose(back[0], th, atol=1e-12)
    np.testing.assert_allclose(back[1], ph, atol=1e-12)


def test_residual_density_fd():
    q = cgo.Quasimode(4 + 1j, sin2)
    th = np.linspace(0.6, 2.5, 801)
    ph = np.linspace(0.3, 2.8, 401)
    fd = q.residual_density_fd(th, ph)[5:-5, 5:-5]
    ex = q.residual_density(th[:, None], ph[None, :])[5:-5, 5:-5]
    assert np.linalg.norm(fd - ex) / np.linalg.norm(ex) < 1e-3


def test_residual_independent_of_real_part():
    win = cgo.theta_window(0.5)
    vals = [cgo.quasimode_residual(cgo.Quasimode(tau + 1j, sin2), win) for tau in (0, 4, 16, 64)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-10)


def test_residual_matches_exact_window():
    for s in (2 + 0.5j, 8 + 1j, 1 + 3j):
        q = cgo.Quasimode(s, sin2)
        win = (np.pi / 6, 5 * np.pi / 6)
        np.testing.assert_allclose(cgo.quasimode_residual(q, win), cgo.exact_residual(q, win),
                                   rtol=1e-8)


def test_printed_residual_constant_profile():
    q = cgo.Quasimode(5 + 1j, lambda p: np.ones_like(p))
    # Lap_tilde 1 = 1/4 and ||1|| = sqrt(pi) on (0, pi)
    np.testing.assert_allclose(cgo.printed_residual(q),
                               0.25 * np.sqrt(np.pi) * np.sqrt(cgo.printed_l2_factor(q.s)), rtol=1e-7)


def test_residual_grows_toward_full_hemisphere():
    q = cgo.Quasimode(4 + 1j, sin2)
    vals = [cgo.quasimode_residual(q, (e, np.pi - e)) for e in (0.3, 0.1, 0.03)]
    assert vals[0] < vals[1] < vals[2]


def test_l2_identity():
    for s in (3 + 0.5j, 10 + 1j, 2 + 2j):
        q = cgo.Quasimode(s, sin2)
        ratio = cgo.quasimode_l2(q) ** 2 / cgo.profile_norm(sin2) ** 2
        np.testing.assert_allclose(ratio, cgo.exact_l2_factor(s), rtol=1e-6)


def test_l2_factors_small_im_s():
    np.testing.assert_allclose(cgo.exact_l2_factor(1e-9j), np.pi, rtol=1e-8)
    np.testing.assert_allclose(cgo.printed_l2_factor(1e-9j), np.pi, rtol=1e-8)
    assert abs(cgo.printed_l2_factor(1j) / cgo.exact_l2_factor(1j) - 1) > 0.5


# ---------------------------------------------------------------------------
# CGO candidates


BALL = cgo.BallDomain((0.0, 0.0, 2.0), 0.5)


def candidate(tau, scale=1.0):
    return cgo.CgoCandidate(cgo.Quasimode(tau + 1j, lambda p: scale * np.sin(p) ** 2))


def test_chord():
    r1, r2 = BALL.chord(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose([r1, r2], [1.5, 2.5])
    r1, _ = BALL.chord(np.zeros(3), np.array([1.0, 0.0, 0.0]))
    assert np.isnan(r1)


def test_residual_bounded_in_tau():
    vals = [cgo.cgo_residual(candidate(tau), BALL).value for tau in (4, 8, 16)]
    assert max(vals) / min(vals) < 3


def test_routes_agree():
    c = candidate(8)
    a = cgo.cgo_residual(c, BALL).value
    b = cgo.cgo_residual(c, BALL, route="warped").value
    assert abs(a / b - 1) < 5e-2
    with pytest.raises(ValidationError):
        cgo.cgo_residual(c, BALL, q=1.0, route="warped")


def test_residual_linear():
    a = cgo.cgo_residual(candidate(8), BALL, n=40).value
    b = cgo.cgo_residual(candidate(8, 2.0), BALL, n=40).value
    np.testing.assert_allclose(b, 2 * a, rtol=1e-10)


def test_resolution_error_reports_size():
    c = candidate(16)
    need = cgo.required_nodes(c, BALL)
    with pytest.raises(ResolutionError) as info:
        cgo.cgo_residual(c, BALL, n=8)
    assert info.value.required == need
    assert cgo.nodes_per_wavelength(c, BALL, need) >= cgo.NODES_PER_WAVELENGTH


def test_potential_term():
    c = candidate(4)
    a = cgo.cgo_residual(c, BALL).value
    b = cgo.cgo_residual(c, BALL, q=lambda x: 0 * x[..., 0]).value
    np.testing.assert_allclose(a, b)
    assert cgo.cgo_residual(c, BALL, q=50.0).value > a


def test_weighted_norm_dominates_residual():
    c = candidate(8)
    assert cgo.cgo_residual(c, BALL).value < cgo.weighted_candidate_norm(c, BALL)


# ---------------------------------------------------------------------------
# measure identity and conductivity


def test_measure_identity():
    gap, cart, polar = cgo.measure_identity()
    assert gap < 1e-6 and cart > 0
    gap, _, _ = cgo.measure_identity((0.2, -0.1, 0.3), (0.4, 1.2))
    assert gap < 1e-6


def test_measure_identity_coarse_fails():
    gap, _, _ = cgo.measure_identity(n_cart=17, n_polar=16)
    assert gap > 1e-3


def test_potential_constant_and_exponential():
    lo, hi = (-0.5, -0.5, -0.5), (0.5, 0.5, 0.5)
    one = cgo.GridField3D.from_function(lambda x, y, z: 1 + 0 * x, lo, hi, 21)
    np.testing.assert_allclose(cgo.conductivity_to_potential(one).values, 0, atol=1e-12)
    g = cgo.GridField3D.from_function(lambda x, y, z: np.exp(2 * x), lo, hi, 51)
    q = cgo.conductivity_to_potential(g).values
    assert np.max(np.abs(q - 1)) < 1e-3
    with pytest.raises(ValidationError):
        cgo.conductivity_to_potential(cgo.GridField3D(np.zeros((4, 4, 4)), lo, 0.1))


def _pair_residual(n):
    lo, hi = (0, 0, 0), (1, 1, 1)
    gamma = cgo.GridField3D.from_function(
        lambda x, y, z: 1.5 + 0.4 * np.sin(2 * x + y) * np.cos(z), lo, hi, n)
    u = cgo.GridField3D.from_function(lambda x, y, z: np.exp(x - y) * np.sin(3 * z + x), lo, hi, n)
    a = cgo.divergence_form(gamma, u)
    b = cgo.schrodinger_form(gamma, u)
    return np.max(np.abs(a - b)) / np.max(np.abs(a))


def test_conductivity_identity_second_order():
    e1, e2 = _pair_residual(21), _pair_residual(41)
    assert e2 < 1e-2
    assert 3.0 < e1 / e2 < 5.0


def test_grid_field_box():
    g = cgo.GridField3D.from_function(lambda x, y, z: x + 2 * y + 3 * z, (0, 0, 0), (1, 1, 1), 11)
    assert g.values.shape == (11, 11, 11)
    X, Y, Z = g.mesh()
    np.testing.assert_allclose(X + 2 * Y + 3 * Z, g.values)
    np.testing.assert_allclose(g.box, [[0, 0, 0], [1, 1, 1]])
    with pytest.raises(ValidationError):
        cgo.GridField3D.from_function(lambda x, y, z: x, (0, 0, 0), (1, 2, 3), 11)
