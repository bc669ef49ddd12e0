"""Warped-product Laplacian, hemisphere quasimodes and CGO candidates (n = 3).

Around a source ``x0`` write ``x = x0 + e^t omega``.  On the sphere a base
point ``y`` on the equator of the hemisphere with pole ``omega0`` gives
the chart

    omega = cos(theta) y + sin(theta) (cos(phi) e + sin(phi) omega0),

with ``e = omega0 x y``, so the hemisphere is ``0 < phi < pi`` and
``theta`` is the spherical distance to ``y``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ResolutionError, ValidationError

N_DIM = 3
FD_STEP = 1e-3
NODES_PER_WAVELENGTH = 8


def laplace_shift(n):
    """``(n-2)^2/4``: the shift in the conjugated sphere Laplacian."""
    return (n - 2) ** 2 / 4.0


def profile_shift(n):
    """``(n-2)(n-4)/4``: the shift in the fibre Laplacian."""
    return (n - 2) * (n - 4) / 4.0


# ---------------------------------------------------------------------------
# Finite differences


def second_difference(u, h, axis):
    """Second derivative along ``axis``: centred inside, one-sided at the ends."""
    u = np.moveaxis(np.asarray(u), axis, 0)
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h ** 2
    out[0] = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / h ** 2
    out[-1] = (2 * u[-1] - 5 * u[-2] + 4 * u[-3] - u[-4]) / h ** 2
    return np.moveaxis(out, 0, axis)


def first_difference(u, h, axis):
    return np.gradient(u, h, axis=axis, edge_order=2)


def _spacing(x):
    d = np.diff(x)
    if x.size < 5 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise ResolutionError("need a uniform axis with at least 5 nodes")
    return d[0]


def warped_laplacian(u, t, theta, phi, form="direct", n=N_DIM, check_tol=None):
    """Euclidean Laplacian of ``u(t, theta, phi)`` in log-polar coordinates.

    ``form="direct"`` discretises ``e^{-2t}(d_t^2 + (n-2) d_t + Lap_S)``;
    ``form="conjugated"`` discretises
    ``e^{-(n+2)t/2} (d_t^2 + Lap_S - (n-2)^2/4) e^{(n-2)t/2}``.
    With ``check_tol`` both are computed and a :class:`ResolutionError`
    is raised when their relative L^2 difference exceeds it.
    """
    if n != 3:
        raise ValidationError("grid numerics are implemented for n = 3")
    ht, hth, hph = _spacing(t), _spacing(theta), _spacing(phi)
    T = t[:, None, None]
    TH = theta[None, :, None]

    def sphere(v):
        return (second_difference(v, hth, 1) + first_difference(v, hth, 1) / np.tan(TH)
                + second_difference(v, hph, 2) / np.sin(TH) ** 2)

    def direct():
        return np.exp(-2 * T) * (second_difference(u, ht, 0)
                                 + (n - 2) * first_difference(u, ht, 0) + sphere(u))

    def conjugated():
        w = np.exp((n - 2) * T / 2) * u
        inner = second_difference(w, ht, 0) + sphere(w) - laplace_shift(n) * w
        return np.exp(-(n + 2) * T / 2) * inner

    out = direct() if form == "direct" else conjugated()
    if form not in ("direct", "conjugated"):
        raise ValidationError(f"unknown form {form!r}")
    if check_tol is not None:
        other = conjugated() if form == "direct" else direct()
        scale = max(np.linalg.norm(out), np.linalg.norm(other), 1e-300)
        diff = np.linalg.norm(out - other) / scale
        if diff > check_tol:
            raise ResolutionError(
                f"direct and conjugated forms differ by {diff:.2e}; refine the grid")
    return out


def laplacian_3d(u, h):
    """7-point Laplacian with one-sided second-order closure on the faces."""
    return sum(second_difference(u, h, ax) for ax in range(3))


# ---------------------------------------------------------------------------
# Quasimodes


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Quasimode:
    """``v_s(omega) = sin(theta)^{-1/2} e^{i s theta} b(phi)`` on ``S^2``.

    ``b`` is a vectorised callable of the fibre angle ``phi`` in ``(0, pi)``.
    """

    s: complex
    b: object
    y: tuple = (1.0, 0.0, 0.0)
    omega0: tuple = (0.0, 0.0, 1.0)
    n: int = N_DIM

    def __post_init__(self):
        if np.imag(self.s) <= 0:
            raise ValidationError("quasimodes need Im s > 0")
        y, w0 = _unit(self.y), _unit(self.omega0)
        if abs(y @ w0) > 1e-12:
            raise ValidationError("y must lie on the equator of the hemisphere")
        if self.n != 3:
            raise ValidationError("evaluation is implemented for n = 3")

    @property
    def frame(self):
        y, w0 = _unit(self.y), _unit(self.omega0)
        return y, np.cross(w0, y), w0

    def chart(self, omega):
        """``(theta, phi)`` of unit vectors ``omega``."""
        y, e, w0 = self.frame
        omega = np.asarray(omega, dtype=float)
        theta = np.arccos(np.clip(omega @ y, -1.0, 1.0))
        phi = np.mod(np.arctan2(omega @ w0, omega @ e), 2 * np.pi)
        return theta, phi

    def point(self, theta, phi):
        y, e, w0 = self.frame
        theta, phi = np.broadcast_arrays(theta, phi)
        st = np.sin(theta)[..., None]
        return (np.cos(theta)[..., None] * y
                + st * (np.cos(phi)[..., None] * e + np.sin(phi)[..., None] * w0))

    def on_chart(self, theta, phi):
        return np.sin(theta) ** -0.5 * np.exp(1j * self.s * theta) * self.b(phi)

    def __call__(self, omega):
        return self.on_chart(*self.chart(omega))

    def profile_laplacian(self, phi, h=1e-4):
        """``(d_phi^2 - (n-2)(n-4)/4) b`` by a centred difference in ``phi``."""
        b = self.b
        d2 = (b(phi + h) - 2 * b(phi) + b(phi - h)) / h ** 2
        return d2 - profile_shift(self.n) * b(phi)

    def residual_density(self, theta, phi):
        """``(Lap_hat + s^2) v_s``; the theta operator is applied exactly.

        Since ``(d_theta^2 + s^2) e^{i s theta} = 0`` this is
        ``sin(theta)^{-1/2 - 2} e^{i s theta} (Lap_tilde b)(phi)``.
        """
        return (np.sin(theta) ** -2.5 * np.exp(1j * self.s * theta)
                * self.profile_laplacian(phi))

    def residual_density_fd(self, theta, phi):
        """Same quantity by finite differences of ``v_s`` on the given grid."""
        TH, PH = np.meshgrid(theta, phi, indexing="ij")
        v = self.on_chart(TH, PH)
        hth, hph = _spacing(theta), _spacing(phi)
        lap = (second_difference(v, hth, 0) + first_difference(v, hth, 0) / np.tan(TH)
               + second_difference(v, hph, 1) / np.sin(TH) ** 2)
        return lap - laplace_shift(self.n) * v + self.s ** 2 * v


def _gauss(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def theta_window(alpha0):
    """The theta range containing the cap ``<omega, omega0> > alpha0``."""
    a = np.arcsin(alpha0)
    return a, np.pi - a


def quasimode_residual(q, window=None, n_theta=400, n_phi=400):
    """``||(Lap_hat + s^2) v_s||_{L^2}`` over ``theta in window``, ``phi in (0, pi)``.

    The full hemisphere corresponds to ``window=(0, pi)``; there the
    integrand behaves like ``sin(theta)^{-4}`` and the integral diverges,
    so finite windows are the meaningful setting.
    """
    if np.imag(q.s) <= 0:
        raise ValidationError("Im s must be positive")
    lo, hi = window if window is not None else (0.0, np.pi)
    th, wth = _gauss(lo, hi, n_theta)
    ph, wph = _gauss(0.0, np.pi, n_phi)
    dens = np.abs(q.residual_density(th[:, None], ph[None, :])) ** 2 * np.sin(th)[:, None]
    return float(np.sqrt(wth @ dens @ wph))


def profile_norm(f, n_phi=400):
    ph, w = _gauss(0.0, np.pi, n_phi)
    return float(np.sqrt(np.sum(np.abs(f(ph)) ** 2 * w)))


def printed_residual(q, n_phi=400):
    """``((1 - e^{-Im s pi}) / Im s)^{1/2} ||Lap_tilde b||`` (printed form)."""
    k = np.imag(q.s)
    return float(np.sqrt((1 - np.exp(-k * np.pi)) / k) * profile_norm(q.profile_laplacian, n_phi))


def exact_residual(q, window, n_phi=400):
    """``(int_window e^{-2 Im s theta} sin^{-4} theta dtheta)^{1/2} ||Lap_tilde b||``."""
    from scipy import integrate
    k = np.imag(q.s)
    val, _ = integrate.quad(lambda x: np.exp(-2 * k * x) / np.sin(x) ** 4, *window,
                            epsabs=0, epsrel=1e-13)
    return float(np.sqrt(val) * profile_norm(q.profile_laplacian, n_phi))


def quasimode_l2(q, n_theta=400, n_phi=400):
    """``||v_s||_{L^2(S^2_+)}`` by quadrature in the chart."""
    th, wth = _gauss(0.0, np.pi, n_theta)
    ph, wph = _gauss(0.0, np.pi, n_phi)
    dens = np.abs(q.on_chart(th[:, None], ph[None, :])) ** 2 * np.sin(th)[:, None]
    return float(np.sqrt(wth @ dens @ wph))


def printed_l2_factor(s):
    """``(1 - e^{-Im s pi}) / Im s`` as printed for ``||v_s||^2 / ||b||^2``."""
    k = np.imag(s)
    return float((1 - np.exp(-k * np.pi)) / k)


def exact_l2_factor(s):
    """``(1 - e^{-2 Im s pi}) / (2 Im s)``, the chart-exact ratio ``||v_s||^2 / ||b||^2``."""
    k = np.imag(s)
    return float((1 - np.exp(-2 * k * np.pi)) / (2 * k))


# ---------------------------------------------------------------------------
# CGO candidates


@dataclass(frozen=True)
class BallDomain:
    center: tuple
    radius: float

    def chord(self, x0, omega):
        """``(r1, r2)`` where the ray ``x0 + r omega`` crosses the ball (NaN if missed)."""
        c = np.asarray(self.center, float) - np.asarray(x0, float)
        b = omega @ c
        disc = b ** 2 - (c @ c - self.radius ** 2)
        root = np.sqrt(np.where(disc > 0, disc, np.nan))
        return b - root, b + root


@dataclass(frozen=True)
class CgoCandidate:
    """``u_s(x) = |x - x0|^{-s - (n-2)/2} v_s((x - x0)/|x - x0|)``."""

    quasimode: Quasimode
    x0: tuple = (0.0, 0.0, 0.0)

    @property
    def s(self):
        return self.quasimode.s

    def __call__(self, x):
        d = np.asarray(x, dtype=float) - np.asarray(self.x0, float)
        r = np.linalg.norm(d, axis=-1)
        omega = d / r[..., None]
        return r ** (-self.s - 0.5) * self.quasimode(omega)


@dataclass
class ResidualReport:
    value: float
    tau: float
    nodes_per_wavelength: float
    route: str
    details: dict = field(default_factory=dict)


def _ball_nodes(domain, n):
    # Gauss nodes in radius and polar angle, uniform azimuth, about the ball centre
    rho, wr = _gauss(0.0, domain.radius, n)
    ct, wc = _gauss(-1.0, 1.0, n)
    az = 2 * np.pi * (np.arange(2 * n) + 0.5) / (2 * n)
    R, C, A = np.meshgrid(rho, ct, az, indexing="ij")
    S = np.sqrt(1 - C ** 2)
    pts = np.asarray(domain.center, float) + R[..., None] * np.stack(
        [S * np.cos(A), S * np.sin(A), C], axis=-1)
    w = (wr[:, None, None] * rho[:, None, None] ** 2) * wc[None, :, None] * (np.pi / n)
    return pts.reshape(-1, 3), np.broadcast_to(w, R.shape).ravel()


def nodes_per_wavelength(candidate, domain, n):
    """Smallest local wavelength ``2 pi r / |s|`` over the widest node gap."""
    r_min = np.linalg.norm(np.asarray(domain.center, float) - np.asarray(candidate.x0, float)) \
        - domain.radius
    wavelength = 2 * np.pi * r_min / abs(candidate.s)
    rho, _ = _gauss(0.0, domain.radius, n)
    ct, _ = _gauss(-1.0, 1.0, n)
    gaps = [np.max(np.diff(np.concatenate([[0.0], rho, [domain.radius]]))),
            domain.radius * np.max(np.diff(np.arccos(np.concatenate([[1.0], ct[::-1], [-1.0]])))),
            domain.radius * np.pi / n]
    return wavelength / max(gaps)


def required_nodes(candidate, domain, target=NODES_PER_WAVELENGTH):
    n = 4
    while nodes_per_wavelength(candidate, domain, n) < target:
        n += 2
    return n


def _potential(q, pts):
    if q is None:
        return 0.0
    if callable(q):
        return q(pts)
    return float(q)


def cgo_residual(candidate, domain, q=None, n=None, route="ambient", step=FD_STEP,
                 n_chart=400):
    """Weighted residual ``|| |x-x0|^{Re s} (-Delta + q) u_s ||_{L^2(Omega)}``.

    ``route="ambient"`` applies a 7-point Laplacian (step ``step``) to
    ``u_s`` at ball quadrature nodes.  ``route="warped"`` (``q = 0`` only)
    integrates the quasimode residual density over the directions of the
    ball with the chord weight ``int e^{-2t} dt``.  The quadrature must
    have at least 8 nodes per local wavelength ``2 pi r / |s|``; otherwise
    a :class:`ResolutionError` carrying the required ``n`` is raised.
    """
    tau = float(np.real(candidate.s))
    if route == "warped":
        if q is not None and (callable(q) or q != 0):
            raise ValidationError("the warped route covers q = 0 only")
        val = _warped_route(candidate, domain, n_chart)
        return ResidualReport(val, tau, np.inf, route)
    n = n if n is not None else required_nodes(candidate, domain)
    npw = nodes_per_wavelength(candidate, domain, n)
    if npw < NODES_PER_WAVELENGTH:
        need = required_nodes(candidate, domain)
        raise ResolutionError(
            f"{npw:.1f} nodes per wavelength < {NODES_PER_WAVELENGTH}; use n >= {need}",
            required=need)
    pts, w = _ball_nodes(domain, n)
    u0 = candidate(pts)
    lap = -6.0 * u0
    for ax in range(3):
        e = np.zeros(3)
        e[ax] = step
        lap = lap + candidate(pts + e) + candidate(pts - e)
    lap /= step ** 2
    r = np.linalg.norm(pts - np.asarray(candidate.x0, float), axis=-1)
    res = r ** tau * (-lap + _potential(q, pts) * u0)
    return ResidualReport(float(np.sqrt(np.sum(np.abs(res) ** 2 * w))), tau, npw,
                          route, {"n": n})


def _warped_route(candidate, domain, n_chart):
    qm = candidate.quasimode
    # directions hitting the ball lie in a cone around the centre direction
    c = np.asarray(domain.center, float) - np.asarray(candidate.x0, float)
    half = np.arcsin(domain.radius / np.linalg.norm(c))
    axis = c / np.linalg.norm(c)
    # quadrature on the cone in coordinates about its axis
    cg, wg = _gauss(np.cos(half), 1.0, n_chart)
    az = 2 * np.pi * (np.arange(2 * n_chart) + 0.5) / (2 * n_chart)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = _unit(np.cross(axis, helper))
    e2 = np.cross(axis, e1)
    C, A = np.meshgrid(cg, az, indexing="ij")
    S = np.sqrt(1 - C ** 2)
    omega = (C[..., None] * axis + S[..., None] * (np.cos(A)[..., None] * e1
                                                   + np.sin(A)[..., None] * e2))
    r1, r2 = domain.chord(candidate.x0, omega)
    kappa = np.nan_to_num((r1 ** -2.0 - r2 ** -2.0) / 2.0)
    theta, phi = qm.chart(omega)
    dens = np.abs(qm.residual_density(theta, phi)) ** 2
    total = np.sum(dens * kappa * wg[:, None]) * (2 * np.pi / (2 * n_chart))
    return float(np.sqrt(total))


def weighted_candidate_norm(candidate, domain, n=24):
    """``(int_Omega |x-x0|^{2 Re s} |u_s|^2 dx)^{1/2}`` by ball quadrature."""
    pts, w = _ball_nodes(domain, n)
    r = np.linalg.norm(pts - np.asarray(candidate.x0, float), axis=-1)
    val = r ** (2 * np.real(candidate.s)) * np.abs(candidate(pts)) ** 2
    return float(np.sqrt(np.sum(val * w)))


def log_polar_integral(f, x0, r_range, n_t=200, n_dir=200):
    """``int int f(x0 + e^t omega) e^{3t} dt domega`` over ``S^2`` and ``t``."""
    t, wt = _gauss(np.log(r_range[0]), np.log(r_range[1]), n_t)
    ct, wc = _gauss(-1.0, 1.0, n_dir)
    az = 2 * np.pi * np.arange(2 * n_dir) / (2 * n_dir)
    C, A = np.meshgrid(ct, az, indexing="ij")
    S = np.sqrt(1 - C ** 2)
    omega = np.stack([S * np.cos(A), S * np.sin(A), C], axis=-1)
    wdir = np.broadcast_to(wc[:, None] * (np.pi / n_dir), C.shape)
    total = 0.0
    for ti, wti in zip(t, wt):
        pts = np.asarray(x0, float) + np.exp(ti) * omega
        total += wti * np.exp(3 * ti) * np.sum(f(pts) * wdir)
    return float(total)


def cartesian_integral(f, lo, hi, n=121):
    """``int f dx`` over a box by the trapezoid rule (``f`` vanishing at the faces)."""
    axes = [np.linspace(lo[i], hi[i], n) for i in range(3)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vol = np.prod([(hi[i] - lo[i]) / (n - 1) for i in range(3)])
    return float(np.sum(f(X)) * vol)


def annulus_bump(x0, r_in, r_out, tilt=(0.3, -0.2, 0.5)):
    """Smooth test function supported in ``r_in < |x - x0| < r_out``."""
    x0 = np.asarray(x0, float)
    tilt = np.asarray(tilt, float)

    def f(x):
        d = np.asarray(x, float) - x0
        r = np.linalg.norm(d, axis=-1)
        u = (2 * r - r_in - r_out) / (r_out - r_in)
        inside = np.abs(u) < 1
        safe = np.where(inside, u, 0.0)
        bump = np.where(inside, np.exp(1 - 1 / (1 - safe ** 2)), 0.0)
        return bump * (1 + 0.5 * np.tanh(d @ tilt))
    return f


def measure_identity(x0=(0.0, 0.0, 0.0), r_range=(0.5, 1.5), n_cart=121, n_polar=96):
    """Relative gap between the Cartesian and log-polar integrals of a bump."""
    f = annulus_bump(x0, *r_range)
    x0 = np.asarray(x0, float)
    lo, hi = x0 - r_range[1], x0 + r_range[1]
    cart = cartesian_integral(f, lo, hi, n_cart)
    polar = log_polar_integral(f, x0, r_range, n_polar, n_polar)
    return abs(cart - polar) / abs(polar), cart, polar


# ---------------------------------------------------------------------------
# Conductivity and potential


@dataclass
class GridField3D:
    """Samples on the uniform grid ``origin + h * index`` (row-major)."""

    values: np.ndarray
    origin: tuple
    h: float

    @classmethod
    def from_function(cls, func, lo, hi, n):
        axes = [np.linspace(lo[i], hi[i], n) for i in range(3)]
        h = axes[0][1] - axes[0][0]
        if not np.allclose([a[1] - a[0] for a in axes], h, rtol=1e-12, atol=0):
            raise ValidationError("the grid spacing must be equal on all axes")
        X = np.meshgrid(*axes, indexing="ij")
        return cls(np.asarray(func(*X), dtype=float), tuple(lo), float(h))

    @property
    def box(self):
        hi = [o + self.h * (m - 1) for o, m in zip(self.origin, self.values.shape)]
        return [list(self.origin), hi]

    def mesh(self):
        axes = [o + self.h * np.arange(m) for o, m in zip(self.origin, self.values.shape)]
        return np.meshgrid(*axes, indexing="ij")


def conductivity_to_potential(gamma):
    """``q = Delta sqrt(gamma) / sqrt(gamma)`` with the 7-point Laplacian."""
    g = np.asarray(gamma.values, dtype=float)
    if np.any(~(g > 0)):
        raise ValidationError("conductivity must be positive")
    root = np.sqrt(g)
    return GridField3D(laplacian_3d(root, gamma.h) / root, gamma.origin, gamma.h)


def divergence_form(gamma, u):
    """``div(gamma grad u)`` in flux form with midpoint-averaged ``gamma`` (interior)."""
    g, v, h = gamma.values, u.values, gamma.h
    out = 0.0
    for ax in range(3):
        m = v.shape[ax]
        up, uc, um = (np.take(v, range(a, m - 2 + a), axis=ax) for a in (2, 1, 0))
        gp, gc, gm = (np.take(g, range(a, m - 2 + a), axis=ax) for a in (2, 1, 0))
        flux = (0.5 * (gp + gc) * (up - uc) - 0.5 * (gm + gc) * (uc - um)) / h ** 2
        trim = [slice(1, -1)] * 3
        trim[ax] = slice(None)
        out = out + flux[tuple(trim)]
    return out


def schrodinger_form(gamma, u):
    """``sqrt(gamma) (Delta - q)(sqrt(gamma) u)`` on interior nodes."""
    root = np.sqrt(gamma.values)
    q = conductivity_to_potential(gamma).values
    v = root * u.values
    val = root * (laplacian_3d(v, gamma.h) - q * v)
    return val[(slice(1, -1),) * 3]
