"""Filtered backprojection, weighted inversion and the hemisphere pipeline."""
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import interpolate

from . import spectral
from .errors import CalibrationError, DivergenceError, ValidationError
from .euclid_xray import (EuclidRayData, PlaneField, WeightSpec, angle_grid,
                          offset_grid, x_ray_adjoint, x_ray_forward)
from .hemi_xray import (HemiRayData, SphereField, mu_norm, ray_grid,
                        t_lambda_forward)

WEIGHT_THRESHOLD = 0.2
CAL_GRID = 256
CAL_WIDTH = 0.2
CAL_HALF_WIDTH = 2.0


def printed_cd(d=2):
    """The closed form ``4 (2 pi)^{(d-1)/2} Gamma((d-1)/2)`` (comparison only)."""
    return 4 * (2 * np.pi) ** ((d - 1) / 2) * math.gamma((d - 1) / 2)


# ---------------------------------------------------------------------------
# Calibration of X_0^* X_0 = c |D|^{-1}


@dataclass
class Calibration:
    c_hat: float
    residual: float          # |A - c B| / |c B|
    residual_unscaled: float  # |A - c B| / |B|
    n: int
    width: float
    order: int
    printed_cd: float = field(default_factory=printed_cd)

    def as_dict(self):
        return asdict(self)


def mexican_hat(width, center=(0.0, 0.0)):
    """Zero-mean probe ``(1 - r^2/w^2) exp(-r^2/w^2)``."""
    def g(x, y):
        r2 = ((x - center[0]) ** 2 + (y - center[1]) ** 2) / width ** 2
        return (1 - r2) * np.exp(-r2)
    return g


def padded_inverse_d(g, pad=4):
    """``|D|^{-1} g`` on a zero-padded box, cropped back to ``g``'s grid."""
    n = g.n
    big = np.zeros((pad * n, pad * n), dtype=g.values.dtype)
    o = (pad - 1) * n // 2
    big[o:o + n, o:o + n] = g.values
    out = spectral.fractional_multiplier(
        PlaneField(big, pad * g.half_width, g.support_radius), -1.0, zero_mode="drop")
    return out.values[o:o + n, o:o + n]


def calibrate_cd(n=CAL_GRID, width=CAL_WIDTH, half_width=CAL_HALF_WIDTH,
                 n_phi=360, order=3, max_residual=0.05):
    """Fit ``c`` in ``X_0^* X_0 g = c |D|^{-1} g`` for a zero-mean probe.

    The composition is computed by ray quadrature (cubic interpolation by
    default) and the right side spectrally on a zero-padded grid.  Raises
    :class:`CalibrationError` when the relative misfit reaches
    ``max_residual``.
    """
    g = PlaneField.from_function(mexican_hat(width), n, half_width,
                                 0.95 * half_width)
    A = x_ray_adjoint(x_ray_forward(g, n_phi=n_phi, order=order), like=g,
                      order=order).values
    B = padded_inverse_d(g)
    c = float(np.sum(A * B) / np.sum(B * B))
    miss = float(np.linalg.norm(A - c * B))
    cal = Calibration(c, miss / (abs(c) * np.linalg.norm(B)),
                      miss / np.linalg.norm(B), n, width, order)
    if cal.residual >= max_residual:
        raise CalibrationError(f"calibration misfit {cal.residual:.3%} too large")
    return cal


@lru_cache(maxsize=None)
def calibrated_constant():
    """``c_hat`` at the default calibration setting, computed once."""
    return calibrate_cd().c_hat


# ---------------------------------------------------------------------------
# Inversion


def fbp_invert(F, like, c=None):
    """``c^{-1} X_0^* |D_p| F`` on the grid of ``like``.

    The ramp filter acts along the offset axis, before backprojection,
    which is the same operator as ``c^{-1} |D| X_0^*`` but avoids
    truncating the slowly decaying backprojection.  The result is set to
    zero outside ``like.support_radius``.
    """
    c = calibrated_constant() if c is None else c
    filtered = F.with_values(spectral.ramp_filter(F.values, F.dp))
    out = x_ray_adjoint(filtered, like=like)
    return like.with_values(out.values * support_mask(like) / c)


def support_mask(like):
    X, Y = like.mesh()
    return np.hypot(X, Y) <= like.support_radius


@dataclass
class ReconReport:
    iterations: int
    residual_history: list
    c: float
    relax: float
    weight_deviation: float
    converged: bool
    rel_error: float = None
    steps: list = None

    def as_dict(self):
        return asdict(self)


def relative_error(est, truth):
    num = np.linalg.norm(np.ravel(est) - np.ravel(truth))
    den = np.linalg.norm(np.ravel(truth))
    return float(num / den) if den > 0 else float(num)


def weighted_invert(F, w, like, max_iters=50, relax=1.0, tol=1e-3,
                    threshold=WEIGHT_THRESHOLD, truth=None, c=None,
                    max_halvings=3, strict=True):
    """Invert ``X_w`` by the preconditioned fixed point
    ``f <- f + relax * fbp(F - X_w f)`` starting from ``f = 0``.

    Stops when the relative update drops below ``tol``.  Three consecutive
    residual increases halve ``relax`` and restart from the best iterate;
    after ``max_halvings`` a :class:`DivergenceError` is raised.  With
    ``strict`` a weight whose deviation from 1 on the support cylinder
    reaches ``threshold`` is refused up front, since the contraction is
    then not guaranteed.

    Returns
    -------
    f : PlaneField
    report : ReconReport
    """
    w = WeightSpec.unit() if w is None else w
    c = calibrated_constant() if c is None else c
    dev = w.sup_deviation(like.support_radius)
    if strict and dev >= threshold:
        raise DivergenceError(
            f"weight deviates from 1 by {dev:.3g} on the support cylinder "
            f"(threshold {threshold}); the fixed point is not a contraction",
            weight_deviation=dev)

    def forward(f):
        return x_ray_forward(like.with_values(f), w, phi=F.phi, p=F.p,
                            check_support=False).values

    f = np.zeros(like.values.shape, dtype=np.result_type(F.values, float))
    history = []
    steps = []
    best = (np.inf, f)
    rising = 0
    halvings = 0
    converged = False
    it = 0
    while it < max_iters:
        res = F.values - (forward(f) if it else 0.0)
        rnorm = float(np.sqrt(np.sum(np.abs(res) ** 2) * F.dphi * F.dp))
        if not np.isfinite(rnorm):
            rising = 3
        elif history and rnorm > history[-1]:
            rising += 1
        else:
            rising = 0
        history.append(rnorm)
        if rnorm < best[0]:
            best = (rnorm, f)
        if rising >= 3:
            halvings += 1
            if halvings > max_halvings:
                raise DivergenceError(
                    f"residual grew for 3 consecutive iterations at relax={relax:g}; "
                    f"weight deviation {dev:.3g}", weight_deviation=dev,
                    history=history)
            relax /= 2
            f = best[1]
            rising = 0
            history.append(best[0])
            continue
        step = fbp_invert(F.with_values(res), like, c).values
        f = f + relax * step
        it += 1
        steps.append(float(np.linalg.norm(step) * relax))
        scale = np.linalg.norm(f)
        if scale > 0 and np.linalg.norm(step) * relax <= tol * scale:
            converged = True
            break
        if scale == 0:
            converged = True
            break
    history.append(float(np.sqrt(np.sum(np.abs(F.values - forward(f)) ** 2)
                                 * F.dphi * F.dp)))
    report = ReconReport(it, history, c, relax, dev, converged, steps=steps)
    if truth is not None:
        report.rel_error = relative_error(f, truth.values if hasattr(truth, "values") else truth)
    return like.with_values(f), report


def dense_system(w, like, phi, p):
    """Matrix of the discretised ``X_w`` (columns are images of grid deltas)."""
    n = like.values.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(x_ray_forward(like.with_values(e.reshape(like.values.shape)),
                                  w, phi=phi, p=p, check_support=False).values.ravel())
    return np.stack(cols, axis=1)


def lstsq_invert(F, w, like):
    """Brute-force least-squares solution over the grid nodes in the support disk."""
    mask = support_mask(like).ravel()
    A = dense_system(w, like, F.phi, F.p)[:, mask]
    sol, *_ = np.linalg.lstsq(A, F.values.ravel(), rcond=None)
    out = np.zeros(mask.size, dtype=sol.dtype)
    out[mask] = sol
    return like.with_values(out.reshape(like.values.shape))


# ---------------------------------------------------------------------------
# Hemisphere pipeline


def cap_radius(alpha0):
    """Radius of the stereographic image of the cap ``x_3 > alpha0``."""
    if not 0 < alpha0 <= 1:
        raise ValidationError("alpha0 must lie in (0, 1]")
    return math.sqrt(alpha0 ** -2 - 1.0)


def plane_grid(alpha0, n=256):
    """Plane grid for a cap: box half-width twice the (rounded up) cap radius."""
    radius = cap_radius(alpha0)
    return PlaneField(np.zeros((n, n)), 2.0 * math.ceil(radius), radius)


def sample_hemi_data(F, phi, p):
    """Read ``F`` at ``alpha = phi``, ``beta = arccot p`` (cubic, periodic in alpha)."""
    beta = np.arctan2(1.0, p)
    order = np.argsort(beta)
    a = F.alpha
    ext = 3
    a_ext = np.concatenate([a[-ext:] - 2 * np.pi, a, a[:ext] + 2 * np.pi])
    v_ext = np.concatenate([F.values[-ext:], F.values, F.values[:ext]], axis=0)

    def ev(vals):
        spline = interpolate.RectBivariateSpline(a_ext, F.beta, vals, kx=3, ky=3)
        out = np.empty((np.size(phi), beta.size))
        out[:, order] = spline(np.mod(phi, 2 * np.pi), beta[order])
        return out

    if np.iscomplexobj(v_ext):
        return ev(v_ext.real) + 1j * ev(v_ext.imag)
    return ev(v_ext)


def hemi_to_plane_data(F, phi, p):
    """``X_{w_lam} h`` data from hemisphere data: ``F / <z>`` on each line."""
    return EuclidRayData(phi, p, sample_hemi_data(F, phi, p) / np.sqrt(1 + p ** 2)[None, :])


def sphere_to_plane(f, like):
    """``<z>^{-2} f(sigma^{-1} z)`` for a callable ``f`` of unit vectors."""
    X, Y = like.mesh()
    jz2 = 1.0 + X ** 2 + Y ** 2
    pts = np.stack([X, Y, np.ones_like(X)], axis=-1) / np.sqrt(jz2)[..., None]
    vals = np.asarray(f(pts)) / jz2
    return like.with_values(np.where(np.hypot(X, Y) < like.support_radius, vals, 0.0))


def plane_to_sphere(h, alpha0, n_theta=256, n_eta=256):
    """Pull ``<z>^2 h(z)`` back to the hemisphere; zero outside the cap."""
    def func(pts):
        x3 = pts[..., 2]
        inside = x3 > alpha0
        safe = np.where(inside, x3, 1.0)
        zx, zy = pts[..., 0] / safe, pts[..., 1] / safe
        vals = h.interpolate(zx, zy, order=3) * (1.0 + zx ** 2 + zy ** 2)
        return np.where(inside, vals, 0.0)
    return SphereField.from_function(func, n_theta, n_eta, alpha0)


def hemi_reconstruct(F, lam, alpha0, n=256, n_phi=360, **kwargs):
    """Reconstruct a cap-supported sphere field from ``T_lam^+`` data.

    Lines of the stereographic plane are read from ``F``, rescaled by
    ``<z>^{-1}``, inverted with :func:`weighted_invert` for the weight
    ``w_lam`` and the result ``<z>^2 h`` is pulled back to the sphere.

    Returns
    -------
    f : SphereField
    report : ReconReport
    """
    like = plane_grid(alpha0, n)
    phi = angle_grid(n_phi)
    p = offset_grid(like.n, like.half_width)
    G = hemi_to_plane_data(F, phi, p)
    h, report = weighted_invert(G, WeightSpec.attenuated(lam), like, **kwargs)
    return plane_to_sphere(h, alpha0), report


def surrogate_norm(f, alpha0, n=256):
    """``|| <z>^{-2} f o sigma^{-1} ||_{H^{-1/2}(R^2)}`` for a callable or plane field."""
    if not isinstance(f, PlaneField):
        f = sphere_to_plane(f, plane_grid(alpha0, n))
    return spectral.sobolev_norm(f, -0.5, "inhomogeneous")


def admissible_lambda(lams, alpha0, threshold=WEIGHT_THRESHOLD):
    """Largest ``lam`` in ``lams`` whose weight stays within ``threshold`` of 1."""
    radius = cap_radius(alpha0)
    ok = [lam for lam in sorted(lams)
          if WeightSpec.attenuated(lam).sup_deviation(radius) < threshold]
    return ok[-1] if ok else None


@dataclass
class StabilityRow:
    lam: float
    noise: float
    ratio: float
    err: float


def stability_probe(phantoms, lams, noises, alpha0=0.5, seed=0, n=256,
                    rays=None, **kwargs):
    """Sweep attenuation and noise for callable cap phantoms.

    For each ``(lam, noise)`` the row holds the largest ratio
    ``surrogate_norm(f) / mu_norm(T_lam f)`` and the largest relative
    reconstruction error over the phantoms.  Noise is additive Gaussian
    with standard deviation ``noise * rms(T_lam f)``.  Reconstruction is
    attempted only for admissible ``lam``; otherwise ``err`` is NaN.

    Returns
    -------
    rows : list of StabilityRow
    summary : dict with ``C_hat`` and ``lambda0_hat``
    """
    rng = np.random.default_rng(seed)
    alpha, beta = rays if rays is not None else ray_grid()
    lam0 = admissible_lambda(lams, alpha0)
    rows = []
    for lam in lams:
        ratios, errs = [], {dl: [] for dl in noises}
        for f in phantoms:
            F = t_lambda_forward(f, lam, alpha, beta)
            ratios.append(surrogate_norm(f, alpha0, n) / float(mu_norm(F)))
            truth = SphereField.from_function(f, alpha0=alpha0)
            for dl in noises:
                if lam0 is None or lam > lam0:
                    errs[dl].append(np.nan)
                    continue
                rms = np.sqrt(np.mean(np.abs(F.values) ** 2))
                noisy = HemiRayData(F.alpha, F.beta,
                                    F.values + dl * rms * rng.standard_normal(F.values.shape),
                                    lam)
                rec, _ = hemi_reconstruct(noisy, lam, alpha0, n, **kwargs)
                errs[dl].append(sphere_error(rec, truth))
        for dl in noises:
            rows.append(StabilityRow(lam, dl, max(ratios), max(errs[dl])))
    admissible = [r.ratio for r in rows if lam0 is not None and r.lam <= lam0]
    return rows, {"C_hat": max(admissible) if admissible else None,
                  "lambda0_hat": lam0}


def sphere_error(est, truth):
    """Relative L^2 error on the hemisphere."""
    diff = SphereField(est.values - truth.values).l2_norm()
    ref = truth.l2_norm()
    return float(diff / ref) if ref > 0 else float(diff)
