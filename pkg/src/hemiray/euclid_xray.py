"""Weighted parallel-beam X-ray transform in the plane.

A line is indexed by its direction angle ``phi`` and the signed offset ``p``
of its foot point ``z = p * (-sin phi, cos phi)``; it is traversed as
``z + t * (cos phi, sin phi)``.  Weights ``w(t, z)`` are radial in the foot
point, i.e. they depend on ``z`` only through ``|z|``.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate, ndimage

from .errors import ValidationError

N_ANGLES = 360
SUPPORT_TOL = 1e-8


@dataclass
class PlaneField:
    """Samples on the periodic grid ``x_i = -S + i h``, ``h = 2S/N`` (axis 0 is x).

    ``support_radius`` bounds the support of the sampled function; line
    integrals are truncated to it.
    """

    values: np.ndarray
    half_width: float
    support_radius: float = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        n = self.values.shape[-1]
        if self.values.shape[-2:] != (n, n):
            raise ValidationError("plane fields are square")
        if n & (n - 1):
            raise ValidationError("grid size must be a power of two")
        if self.support_radius is None:
            self.support_radius = self.half_width / 2.0

    @classmethod
    def from_function(cls, func, n, half_width, support_radius=None):
        x = -half_width + np.arange(n) * (2.0 * half_width / n)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return cls(np.asarray(func(X, Y)), half_width, support_radius)

    @classmethod
    def zeros_like(cls, other, dtype=float):
        return cls(np.zeros(other.values.shape, dtype=dtype), other.half_width,
                   other.support_radius)

    def with_values(self, values, **metadata):
        return PlaneField(values, self.half_width, self.support_radius,
                          {**self.metadata, **metadata})

    @property
    def n(self):
        return self.values.shape[-1]

    @property
    def h(self):
        return 2.0 * self.half_width / self.n

    @property
    def x(self):
        return -self.half_width + np.arange(self.n) * self.h

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")

    def inner(self, other):
        return np.sum(self.values * np.conj(other.values)) * self.h ** 2

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.h ** 2))

    def interpolate(self, x, y, order=1):
        """Spline interpolation at arbitrary points, zero outside the box."""
        coords = np.stack([(np.asarray(x) + self.half_width) / self.h,
                           (np.asarray(y) + self.half_width) / self.h])
        return _map(self.values, coords, order)


def _map(values, coords, order):
    if np.iscomplexobj(values):
        return (_map(values.real, coords, order)
                + 1j * _map(values.imag, coords, order))
    return ndimage.map_coordinates(values, coords, order=order, mode="grid-constant",
                                   cval=0.0, prefilter=order > 1)


@dataclass
class EuclidRayData:
    """Line data ``g(phi_k, p_m)`` on uniform grids of angle and offset."""

    phi: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (self.phi.size, self.p.size):
            raise ValidationError("values do not match the (phi, p) grid")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("ray data contains non-finite values")

    @property
    def dphi(self):
        return 2 * np.pi / self.phi.size

    @property
    def dp(self):
        return float(self.p[1] - self.p[0]) if self.p.size > 1 else 1.0

    def with_values(self, values):
        return EuclidRayData(self.phi, self.p, values)

    def inner(self, other):
        return np.sum(self.values * np.conj(other.values)) * self.dphi * self.dp

    def l2_norm(self):
        return float(np.sqrt(np.real(self.inner(self))))

    def __add__(self, other):
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


def angle_grid(n_phi=N_ANGLES):
    return 2 * np.pi * np.arange(n_phi) / n_phi


def offset_grid(n, half_width):
    """Symmetric midpoint offsets covering ``[-S, S]``."""
    dp = 2.0 * half_width / n
    return (np.arange(n) + 0.5 - n / 2.0) * dp


# ---------------------------------------------------------------------------
# Weights


def attenuation_weight(lam):
    """``w(t, z) = exp(-lam (pi/2 - arctan(t / <z>)))`` as a callable."""
    if lam < 0:
        raise ValidationError("attenuation must be non-negative")

    def w(t, z):
        z = np.asarray(z, dtype=float)
        r2 = z * z if z.ndim == 0 or z.shape[-1:] != (2,) else np.sum(z * z, -1)
        return np.exp(-lam * (np.pi / 2 - np.arctan(t / np.sqrt(1.0 + r2))))

    return w


@dataclass(frozen=True)
class WeightSpec:
    """Line weight ``w(t, z)``: ``unit``, ``attenuated(lam)`` or ``tabulated``.

    Tabulated weights are sampled on ``t_nodes x r_nodes`` with ``r = |z|``,
    interpolated bilinearly and clamped outside the table.
    """

    kind: str = "unit"
    lam: float = 0.0
    t_nodes: tuple = None
    r_nodes: tuple = None
    table: tuple = None

    @classmethod
    def unit(cls):
        return cls("unit")

    @classmethod
    def attenuated(cls, lam):
        if lam < 0:
            raise ValidationError("attenuation must be non-negative")
        return cls("attenuated", float(lam))

    @classmethod
    def tabulated(cls, t_nodes, r_nodes, table):
        table = np.asarray(table, dtype=float)
        if table.shape != (len(t_nodes), len(r_nodes)):
            raise ValidationError("table shape must be (len(t_nodes), len(r_nodes))")
        return cls("tabulated", 0.0, tuple(map(float, t_nodes)),
                   tuple(map(float, r_nodes)), tuple(map(tuple, table)))

    @property
    def is_unit(self):
        return self.kind == "unit" or (self.kind == "attenuated" and self.lam == 0)

    @property
    def is_even(self):
        return self.is_unit

    def line(self, t, r):
        """Weight at line parameter ``t`` and foot-point distance ``r``."""
        t, r = np.broadcast_arrays(np.asarray(t, float), np.abs(np.asarray(r, float)))
        if self.is_unit:
            return np.ones(t.shape)
        if self.kind == "attenuated":
            return np.exp(-self.lam * (np.pi / 2 - np.arctan(t / np.sqrt(1.0 + r * r))))
        tn = np.asarray(self.t_nodes)
        rn = np.asarray(self.r_nodes)
        ti = np.interp(t, tn, np.arange(tn.size)).ravel()
        ri = np.interp(r, rn, np.arange(rn.size)).ravel()
        out = ndimage.map_coordinates(np.asarray(self.table), np.stack([ti, ri]),
                                      order=1, mode="nearest")
        return out.reshape(t.shape)

    def __call__(self, t, z):
        z = np.asarray(z, dtype=float)
        return self.line(t, np.linalg.norm(z, axis=-1))

    def sup_deviation(self, radius, n=201):
        """``sup |w - 1|`` over the support cylinder of a ball of ``radius``."""
        r = np.linspace(0.0, radius, n)
        s = np.linspace(-1.0, 1.0, n)
        R, S = np.meshgrid(r, s, indexing="ij")
        T = S * np.sqrt(np.maximum(radius ** 2 - R ** 2, 0.0))
        return float(np.max(np.abs(self.line(T, R) - 1.0)))


# ---------------------------------------------------------------------------
# Forward and adjoint


def _trapezoid(n, step):
    w = np.full(n, step)
    w[[0, -1]] *= 0.5
    return w


def _line_setup(g, w, phi, p, n_phi):
    w = WeightSpec.unit() if w is None else w
    phi = angle_grid(n_phi) if phi is None else np.asarray(phi, dtype=float)
    p = offset_grid(g.n, g.half_width) if p is None else np.asarray(p, dtype=float)
    radius = min(g.support_radius + g.h, np.sqrt(2.0) * g.half_width)
    n_t = int(np.ceil(2 * radius / (g.h / 2))) + 1
    t = np.linspace(-radius, radius, n_t)
    line_weights = w.line(t[None, :], p[:, None]) * _trapezoid(n_t, t[1] - t[0])[None, :]
    return phi, p, t, line_weights


def _sample_coords(g, ph, p, t):
    # grid-index coordinates of z + t zeta for a chunk of angles
    ph = ph[:, None, None]
    px = p[None, :, None] * -np.sin(ph) + t[None, None, :] * np.cos(ph)
    py = p[None, :, None] * np.cos(ph) + t[None, None, :] * np.sin(ph)
    return (px + g.half_width) / g.h, (py + g.half_width) / g.h


def x_ray_forward(g, w=None, phi=None, p=None, n_phi=N_ANGLES, order=1,
                  chunk=16, check_support=True):
    """Weighted line integrals ``int g(z + t zeta) w(t, z) dt``.

    Lines are sampled with step ``h/2`` over the support ball and ``g`` is
    interpolated bilinearly (``order=1``).  Offsets default to ``N``
    symmetric midpoints of ``[-S, S]``.  If ``g`` has mass outside its
    declared support the result is still computed, a warning is issued and
    ``support_warning`` is set on the returned object.
    """
    phi, p, t, line_weights = _line_setup(g, w, phi, p, n_phi)
    warn = False
    if check_support:
        X, Y = g.mesh()
        outside = np.hypot(X, Y) > g.support_radius
        leak = np.max(np.abs(g.values[outside]), initial=0.0)
        warn = leak > SUPPORT_TOL * max(np.max(np.abs(g.values)), 1e-300)
    if warn:
        warnings.warn("field has mass outside its declared support radius",
                      RuntimeWarning, stacklevel=2)

    out = np.empty((phi.size, p.size), dtype=np.result_type(g.values, float))
    for start in range(0, phi.size, chunk):
        cx, cy = _sample_coords(g, phi[start:start + chunk], p, t)
        vals = _map(g.values, np.stack([cx.ravel(), cy.ravel()]), order)
        out[start:start + chunk] = np.sum(vals.reshape(cx.shape) * line_weights[None], axis=-1)
    data = EuclidRayData(phi, p, out)
    data.support_warning = bool(warn)
    return data


def x_ray_transpose(F, w=None, like=None, chunk=16):
    """Exact adjoint of the discrete bilinear :func:`x_ray_forward`.

    Each weighted line sample is scattered back to its four grid
    neighbours and the result is scaled by ``dphi dp / h^2``, so that
    ``F.inner(X g) == g.inner(X^T F)`` holds to rounding.  It is a
    ray-driven discretisation of :func:`x_ray_adjoint`.
    """
    phi, p, t, line_weights = _line_setup(like, w, F.phi, F.p, None)
    n = like.n
    acc = np.zeros(n * n, dtype=np.result_type(F.values, float))
    for start in range(0, phi.size, chunk):
        cx, cy = _sample_coords(like, phi[start:start + chunk], p, t)
        contrib = (F.values[start:start + chunk, :, None] * line_weights[None]).ravel()
        cx, cy = cx.ravel(), cy.ravel()
        i0 = np.floor(cx).astype(np.intp)
        j0 = np.floor(cy).astype(np.intp)
        fx, fy = cx - i0, cy - j0
        for di, dj, wt in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                           (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
            i, j = i0 + di, j0 + dj
            ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
            idx = i[ok] * n + j[ok]
            vals = contrib[ok] * wt[ok]
            if np.iscomplexobj(vals):
                acc += (np.bincount(idx, vals.real, n * n)
                        + 1j * np.bincount(idx, vals.imag, n * n))
            else:
                acc += np.bincount(idx, vals, n * n)
    return like.with_values(acc.reshape(n, n) * (F.dphi * F.dp / like.h ** 2))


def x_ray_adjoint(F, w=None, like=None, n=None, half_width=None, order=1):
    """Backprojection ``int w(<z,zeta>, pi(z)) F(pi(z), zeta) dzeta``.

    The output grid is taken from ``like`` (a :class:`PlaneField`) or from
    ``n`` and ``half_width``.  ``F`` is interpolated in ``p`` (linear for
    ``order=1``, cubic spline for ``order=3``) and taken as zero outside
    its offset range.
    """
    w = WeightSpec.unit() if w is None else w
    if like is not None:
        n, half_width, support = like.n, like.half_width, like.support_radius
    else:
        support = None
    x = -half_width + np.arange(n) * (2.0 * half_width / n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    acc = np.zeros((n, n), dtype=np.result_type(F.values, float))
    dphi = F.dphi
    for k, ph in enumerate(F.phi):
        c, s = np.cos(ph), np.sin(ph)
        pz = -s * X + c * Y
        if order == 1:
            vals = _interp(pz, F.p, F.values[k])
        else:
            vals = interpolate.make_interp_spline(F.p, F.values[k], k=order)(pz)
            vals[(pz < F.p[0]) | (pz > F.p[-1])] = 0.0
        if not w.is_unit:
            vals = vals * w.line(c * X + s * Y, pz)
        acc += vals
    return PlaneField(acc * dphi, half_width, support)


def _interp(x, xp, fp):
    if np.iscomplexobj(fp):
        return _interp(x, xp, fp.real) + 1j * _interp(x, xp, fp.imag)
    return np.interp(x, xp, fp, left=0.0, right=0.0)


# ---------------------------------------------------------------------------
# Normal operator kernel


def _line_factor(w, z, y):
    # w evaluated at the parameter of z on the line through z towards y
    d = y - z
    dist = np.linalg.norm(d, axis=-1)
    zeta = d / dist[..., None]
    t = np.sum(z * zeta, axis=-1)
    foot = z - t[..., None] * zeta
    return t, np.linalg.norm(foot, axis=-1)


def line_factor(w, z, y):
    """``L_w(z, y) = w(<z, y-z>/|y-z|, z - <z, y-z>/|y-z|^2 (y-z))``."""
    t, r = _line_factor(w, np.asarray(z, float), np.asarray(y, float))
    return w.line(t, r)


def normal_kernel(w, z, y, constant=1.0):
    """Kernel of ``X_w^* X_w`` up to a global ``constant``.

    For weights even in ``t`` this is ``|z-y|^{-1} L_w(z,y) L_w(y,z)``.  For
    general weights the even part is used, i.e. the mean of
    ``L_w(z,y) L_v(y,z)`` and ``L_v(z,y) L_w(y,z)`` with ``v(t,z) = w(-t,z)``;
    both reduce to the same value when ``w`` is even.  ``constant = 2``
    reproduces the composition ``X_w^* X_w`` (see :func:`calibrate_kernel_constant`).
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    dist = np.linalg.norm(y - z, axis=-1)
    if np.any(dist == 0):
        raise ValidationError("normal kernel is singular on the diagonal z = y")
    tz, r = _line_factor(w, z, y)
    ty, _ = _line_factor(w, y, z)
    # ty is measured along the reversed direction
    if w.is_even:
        prod = w.line(tz, r) * w.line(ty, r)
    else:
        prod = 0.5 * (w.line(tz, r) * w.line(-ty, r) + w.line(-tz, r) * w.line(ty, r))
    return constant * prod / dist


def normal_apply(w, g, points, constant=1.0, n_r=400, n_ang=256, radius=None):
    """``int N_w(z, y) g(y) dy`` at ``points`` by polar quadrature around each z.

    ``g`` is a callable of ``(x, y)``.  The ``1/|z-y|`` singularity is
    absorbed by the polar Jacobian.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    radius = radius if radius is not None else 10.0
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (xr + 1.0)
    wr = 0.5 * radius * wr
    ang = 2 * np.pi * np.arange(n_ang) / n_ang
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    out = np.empty(points.shape[0], dtype=complex)
    for i, z in enumerate(points):
        y = z + r[:, None, None] * dirs[None, :, :]
        kern_r = normal_kernel(w, np.broadcast_to(z, y.shape), y, constant) * r[:, None]
        vals = g(y[..., 0], y[..., 1])
        out[i] = np.sum(kern_r * vals * wr[:, None]) * (2 * np.pi / n_ang)
    return out if np.iscomplexobj(out) and np.any(out.imag) else out.real


def calibrate_kernel_constant(g, points, n=256, half_width=4.0, support=None,
                              n_phi=N_ANGLES):
    """Fit the global factor between the kernel formula and ``X_0^* X_0``.

    Uses unit weight and a smooth probe ``g(x, y)``; returns the
    least-squares constant over the evaluation ``points``.
    """
    field_ = PlaneField.from_function(g, n, half_width, support)
    comp = x_ray_adjoint(x_ray_forward(field_, n_phi=n_phi), like=field_)
    pts = np.atleast_2d(points)
    a = comp.interpolate(pts[:, 0], pts[:, 1], order=3)
    b = normal_apply(WeightSpec.unit(), g, pts, radius=2 * half_width)
    return float(np.dot(a, b) / np.dot(b, b))
