"""Fourier multipliers on the periodic box, Sobolev norms and line transforms."""
import numpy as np
from scipy import fft, integrate

from .errors import ValidationError
from .euclid_xray import PlaneField

MEAN_TOL = 1e-12


def wavenumbers(n, half_width):
    """Angular wavenumbers of the ``n``-point periodic grid of length ``2S``."""
    return 2 * np.pi * fft.fftfreq(n, d=2.0 * half_width / n)


def _kgrid(g):
    k = wavenumbers(g.n, g.half_width)
    return np.hypot(k[:, None], k[None, :])


def symbol(kmag, s, kind="homogeneous"):
    if kind == "homogeneous":
        with np.errstate(divide="ignore"):
            out = np.where(kmag > 0, np.abs(kmag) ** s, 0.0 if s < 0 else float(s == 0))
        return out
    if kind == "inhomogeneous":
        return (1.0 + kmag ** 2) ** (s / 2.0)
    raise ValidationError(f"unknown multiplier kind {kind!r}")


def fractional_multiplier(g, s, kind="homogeneous", zero_mode=None):
    """Apply ``|D|^s`` (homogeneous) or ``<D>^s`` (inhomogeneous) to ``g``.

    For homogeneous ``s < 0`` the zero mode is undefined.  Inputs with a
    nonzero mean are refused unless ``zero_mode="drop"``, which discards the
    mean; the policy applied is recorded in ``metadata["zero_mode"]``.
    """
    G = fft.fft2(g.values)
    policy = None
    if kind == "homogeneous" and s < 0:
        mean = abs(G[0, 0]) / G.size
        scale = max(np.max(np.abs(g.values)), 1e-300)
        if mean > MEAN_TOL * scale and zero_mode != "drop":
            raise ValidationError(
                "negative homogeneous order on a field with nonzero mean; "
                "pass zero_mode='drop' to discard the mean")
        policy = "drop"
    G *= symbol(_kgrid(g), s, kind)
    out = fft.ifft2(G)
    if not np.iscomplexobj(g.values):
        out = out.real
    meta = {"multiplier": (kind, s)}
    if policy:
        meta["zero_mode"] = policy
    return g.with_values(out, **meta)


def sobolev_norm(g, s, kind="inhomogeneous"):
    """``H^s`` norm from the discrete Fourier coefficients.

    Normalised so that ``s = 0`` is the grid ``L^2`` norm (Parseval).
    """
    G = fft.fft2(g.values)
    m = symbol(_kgrid(g), s, kind)
    return float(np.sqrt(np.sum(np.abs(G * m) ** 2)) * g.h / g.n)


def ramp_kernel(n, dp):
    """Band-limited spatial kernel of ``|D_p|`` at offsets ``k dp``, ``|k| < n``.

    Convolving with ``dp * kernel`` applies the ramp filter with angular
    frequency convention (the discrete Ram-Lak filter scaled by ``2 pi``).
    """
    k = np.arange(-(n - 1), n)
    out = np.zeros(k.shape)
    out[k == 0] = 1.0 / (4 * dp ** 2)
    odd = k % 2 == 1
    out[odd] = -1.0 / (np.pi * k[odd] * dp) ** 2
    return 2 * np.pi * out


def ramp_filter(values, dp, axis=-1):
    """Apply ``|D_p|`` along ``axis`` by linear (zero-padded) convolution."""
    values = np.moveaxis(np.asarray(values), axis, -1)
    n = values.shape[-1]
    kern = ramp_kernel(n, dp) * dp
    size = fft.next_fast_len(3 * n - 2)
    K = fft.fft(kern, size)
    V = fft.fft(values, size, axis=-1)
    full = fft.ifft(V * K, axis=-1)[..., n - 1:2 * n - 1]
    if not np.iscomplexobj(values):
        full = full.real
    return np.moveaxis(full, -1, axis)


def line_fourier(f, ell, lam, mu=0.0, margin=2, tol=0.0):
    """``int exp(-i l (lam + i mu)) f(l) dl`` by composite Simpson.

    ``f`` holds samples on the uniform grid ``ell`` (first axis); extra
    axes are components of a vector-valued map.  The first and last
    ``margin`` samples must vanish (within ``tol``) so that the window
    contains the support.  ``lam`` may be an array.
    """
    if mu < 0:
        raise ValidationError("the imaginary shift mu must be non-negative")
    f = np.asarray(f)
    ell = np.asarray(ell, dtype=float)
    if f.shape[0] != ell.size:
        raise ValidationError("samples and grid lengths differ")
    if margin and (np.any(np.abs(f[:margin]) > tol) or np.any(np.abs(f[-margin:]) > tol)):
        raise ValidationError("support reaches the edge of the sample window")
    lam = np.asarray(lam, dtype=float)
    phase = np.exp(-1j * np.multiply.outer(lam, ell) + mu * ell)
    # simpson acts on the last axis, so move the sample axis there
    vals = phase.reshape(phase.shape + (1,) * (f.ndim - 1)) * f
    return integrate.simpson(np.moveaxis(vals, lam.ndim, -1), x=ell)


def q_transform(q, x0, omega, lam, t_lo, t_hi, n=2001):
    """``Q(lam, omega) = int exp(2i lam t) exp(2t) q(x0 + e^t omega) dt``.

    ``q`` maps points ``(..., 3)`` to values and must vanish for
    ``|x - x0|`` outside ``(e^{t_lo}, e^{t_hi})``.
    """
    t = np.linspace(t_lo, t_hi, n)
    pts = np.asarray(x0, float) + np.exp(t)[:, None] * np.asarray(omega, float)
    vals = np.exp(2 * t) * q(pts)
    return line_fourier(vals, t, -2.0 * np.asarray(lam), 0.0, margin=0)
