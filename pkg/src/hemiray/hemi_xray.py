"""Attenuated geodesic ray transform on the upper hemisphere of S^2.

Sphere fields are stored in a fixed polar chart whose poles are the two
equator points ``(+-1, 0, 0)``::

    x = (cos theta, sin theta cos eta, sin theta sin eta)

so the upper hemisphere is ``0 < eta < pi`` and every cap ``{x_3 > a}``
with ``a > 0`` stays away from the chart singularities.  Rays are indexed by
the boundary angle ``alpha`` (base point ``(cos alpha, sin alpha, 0)``) and
the inward angle ``beta``; the boundary measure is ``sin(beta) dalpha dbeta``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SPHERE_GRID = (256, 256)
RAY_GRID = (360, 180)
T_INTERVALS = 512
CAP_ZERO_TOL = 1e-14


def midpoint_nodes(n, length):
    return (np.arange(n) + 0.5) * (length / n)


def cell_widths(nodes, lo, hi, periodic=False):
    """Voronoi cell widths of sorted 1-D nodes inside ``[lo, hi]``."""
    nodes = np.asarray(nodes, dtype=float)
    if periodic:
        period = hi - lo
        ext = np.concatenate([[nodes[-1] - period], nodes, [nodes[0] + period]])
        return 0.5 * (ext[2:] - ext[:-2])
    edges = np.concatenate([[lo], 0.5 * (nodes[1:] + nodes[:-1]), [hi]])
    return np.diff(edges)


def simpson_weights(n_intervals, length):
    if n_intervals % 2:
        raise ValidationError("Simpson's rule needs an even number of intervals")
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (length / n_intervals) / 3.0


def chart_coords(x):
    """``(theta, eta)`` of unit vectors ``x`` in the field chart."""
    theta = np.arccos(np.clip(x[..., 0], -1.0, 1.0))
    eta = np.mod(np.arctan2(x[..., 2], x[..., 1]), 2 * np.pi)
    return theta, eta


def chart_points(theta, eta):
    st = np.sin(theta)
    return np.stack([np.cos(theta) + 0 * eta, st * np.cos(eta), st * np.sin(eta)],
                    axis=-1)


@dataclass
class SphereField:
    """Samples on the ``(theta, eta)`` midpoint grid, optionally cap supported.

    ``values`` has shape ``(..., n_theta, n_eta)``; leading axes are a batch
    of fields sharing the grid.  ``alpha0`` is the cap level ``x_3 > alpha0``
    outside of which the field must vanish (``None`` disables the check).
    """

    values: np.ndarray
    alpha0: float = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim < 2:
            raise ValidationError("values need at least two axes")
        if self.alpha0 is not None:
            outside = self.points[..., 2] <= self.alpha0
            if np.any(np.abs(self.values[..., outside]) >= CAP_ZERO_TOL):
                raise ValidationError("field does not vanish outside its cap")

    @classmethod
    def from_function(cls, func, n_theta=SPHERE_GRID[0], n_eta=SPHERE_GRID[1],
                      alpha0=None):
        """Sample ``func(points)``; values outside the cap are set to zero."""
        theta = midpoint_nodes(n_theta, np.pi)
        eta = midpoint_nodes(n_eta, 2 * np.pi)
        pts = chart_points(theta[:, None], eta[None, :])
        vals = np.asarray(func(pts))
        if alpha0 is not None:
            vals = np.where(pts[..., 2] > alpha0, vals, 0.0)
        return cls(vals, alpha0)

    @property
    def shape(self):
        return self.values.shape[-2:]

    @property
    def theta(self):
        return midpoint_nodes(self.shape[0], np.pi)

    @property
    def eta(self):
        return midpoint_nodes(self.shape[1], 2 * np.pi)

    @property
    def points(self):
        return chart_points(self.theta[:, None], self.eta[None, :])

    def _padded(self):
        v = self.values
        v = np.concatenate([v[..., -1:], v, v[..., :1]], axis=-1)
        return np.concatenate([v[..., :1, :], v, v[..., -1:, :]], axis=-2)

    def evaluate(self, x, _padded=None):
        """Bilinear interpolation in chart coordinates at unit vectors ``x``."""
        theta, eta = chart_coords(np.asarray(x, dtype=float))
        nt, ne = self.shape
        padded = self._padded() if _padded is None else _padded
        it = np.clip(theta * (nt / np.pi) + 0.5, 0.0, nt + 1 - 1e-9)
        ie = eta * (ne / (2 * np.pi)) + 0.5
        i0 = np.floor(it).astype(np.intp)
        j0 = np.floor(ie).astype(np.intp)
        ft = it - i0
        fe = ie - j0
        width = ne + 2
        flat = padded.reshape(padded.shape[:-2] + (-1,))
        base = i0 * width + j0
        out = (flat[..., base] * ((1 - ft) * (1 - fe))
               + flat[..., base + 1] * ((1 - ft) * fe)
               + flat[..., base + width] * (ft * (1 - fe))
               + flat[..., base + width + 1] * (ft * fe))
        return out

    def integrate(self):
        """Midpoint-rule integral over the upper hemisphere."""
        nt, ne = self.shape
        w = np.sin(self.theta)[:, None] * (np.pi / nt) * (2 * np.pi / ne)
        upper = np.sin(self.eta) > 0
        return np.sum(self.values[..., :, upper] * w, axis=(-2, -1))

    def l2_norm(self):
        return np.sqrt(SphereField(np.abs(self.values) ** 2).integrate())


@dataclass
class HemiRayData:
    """Values ``F(alpha_i, beta_j)`` on inward boundary rays, attenuation ``lam``."""

    alpha: np.ndarray
    beta: np.ndarray
    values: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape[-2:] != (self.alpha.size, self.beta.size):
            raise ValidationError("values do not match the (alpha, beta) grid")
        if np.any((self.beta <= 0) | (self.beta >= np.pi)):
            raise ValidationError("beta grid must be strictly inside (0, pi)")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("ray data contains non-finite values")

    @property
    def measure(self):
        """Quadrature weights of ``sin(beta) dalpha dbeta`` on the grid."""
        wa = cell_widths(self.alpha, 0.0, 2 * np.pi, periodic=True)
        wb = cell_widths(self.beta, 0.0, np.pi) * np.sin(self.beta)
        return wa[:, None] * wb[None, :]


def ray_grid(n_alpha=RAY_GRID[0], n_beta=RAY_GRID[1]):
    """Uniform ``alpha`` nodes and midpoint ``beta`` nodes."""
    alpha = 2 * np.pi * np.arange(n_alpha) / n_alpha
    return alpha, midpoint_nodes(n_beta, np.pi)


def ray_points(alpha, beta, t):
    """Points ``cos t (x',0) + sin t xi`` for every (alpha, beta, t) triple."""
    ca, sa = np.cos(alpha)[:, None, None], np.sin(alpha)[:, None, None]
    cb, sb = np.cos(beta)[None, :, None], np.sin(beta)[None, :, None]
    ct, st = np.cos(t)[None, None, :], np.sin(t)[None, None, :]
    x = ct * ca - st * cb * sa
    y = ct * sa + st * cb * ca
    z = st * sb + 0 * ca
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def t_lambda_forward(f, lam, alpha=None, beta=None, n_t=T_INTERVALS, threads=1,
                     chunk=8):
    """Attenuated ray transform ``int_0^pi f(gamma(t)) exp(-lam t) dt``.

    ``f`` is a :class:`SphereField` (bilinear chart interpolation, batched
    fields allowed) or a callable mapping unit vectors ``(..., 3)`` to values.
    The ``t`` integral is composite Simpson with ``n_t`` intervals.
    """
    if lam < 0:
        raise ValidationError("attenuation must be non-negative")
    if alpha is None or beta is None:
        alpha, beta = ray_grid()
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    t = np.linspace(0.0, np.pi, n_t + 1)
    wt = simpson_weights(n_t, np.pi) * np.exp(-lam * t)
    if isinstance(f, SphereField):
        padded = f._padded()
        batch = f.values.shape[:-2]

        def sample(pts):
            return f.evaluate(pts, _padded=padded)
    else:
        batch = ()
        sample = f
    out = np.empty(batch + (alpha.size, beta.size),
                   dtype=np.result_type(float, getattr(f, "values", 0.0)))

    def work(start):
        sl = slice(start, min(start + chunk, alpha.size))
        vals = sample(ray_points(alpha[sl], beta, t))
        out[..., sl, :] = vals @ wt

    starts = range(0, alpha.size, chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for s in starts:
            work(s)
    return HemiRayData(alpha, beta, out, lam)


def mu_norm(F):
    """L^2 norm on inward boundary rays with weight ``sin(beta)``."""
    return np.sqrt(np.sum(np.abs(F.values) ** 2 * F.measure, axis=(-2, -1)))


def santalo_rhs(f, alpha=None, beta=None, n_t=T_INTERVALS, threads=1):
    """Ray-side expression ``(1/|S^1|) int int_0^pi f(gamma(t)) dt dmu``."""
    F = t_lambda_forward(f, 0.0, alpha, beta, n_t=n_t, threads=threads)
    return np.sum(F.values * F.measure, axis=(-2, -1)) / (2 * np.pi)


def surface_integral(f, n_theta=SPHERE_GRID[0], n_eta=SPHERE_GRID[1]):
    """Integral of ``f`` over the upper hemisphere (field or callable)."""
    if not isinstance(f, SphereField):
        f = SphereField.from_function(f, n_theta, n_eta)
    return f.integrate()
