"""Harmonic majorization and the log-type Fourier bound on compact support.

The Fourier convention is ``f^(lam) = int exp(-i l lam) f(l) dl``.  Values
of ``f`` may be vectors; norms are taken over the trailing axes.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft, integrate, optimize

from .errors import ValidationError
from .spectral import line_fourier


def poisson_phi(lam, mu, form="arctan"):
    """Poisson extension of the indicator of ``[-1, 1]`` at ``lam + i mu``.

    ``form="arctan"`` sums the two arctangents; ``form="piecewise"`` uses
    the single-arctangent expression with a branch on ``lam^2 + mu^2 < 1``
    (on the unit circle the value is 1/2).
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 0):
        raise ValidationError("mu must be positive")
    if form == "arctan":
        return (np.arctan((1 - lam) / mu) + np.arctan((1 + lam) / mu)) / np.pi
    if form == "piecewise":
        rho = lam ** 2 + mu ** 2 - 1.0
        with np.errstate(divide="ignore"):
            base = np.arctan(2 * mu / rho) / np.pi
        return np.where(rho > 0, base, np.where(rho < 0, 1.0 + base, 0.5))
    raise ValidationError(f"unknown form {form!r}")


def phi_on_line(lam):
    """``phi(lam + i) = arctan(2 / lam^2) / pi``."""
    return np.arctan2(2.0, np.asarray(lam, dtype=float) ** 2) / np.pi


# ---------------------------------------------------------------------------
# Fourier helpers


def _norm(v):
    # norms over the value axes; axis 0 indexes samples or frequencies
    v = np.asarray(v)
    if v.ndim <= 1:
        return np.abs(v)
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=tuple(range(1, v.ndim))))


def fourier_norms(f, ell, lam, mu=0.0):
    """``||f^(lam + i mu)||`` for an array of ``lam``."""
    vals = line_fourier(f, ell, np.atleast_1d(lam), mu, margin=0)
    return _norm(vals)


def l1_norm(f, ell):
    return float(integrate.simpson(_norm(np.asarray(f)), x=ell))


def l2_norm(f, ell):
    return float(np.sqrt(integrate.simpson(_norm(np.asarray(f)) ** 2, x=ell)))


def hs_norm(f, ell, sigma, pad=8):
    """``(int (1+lam^2)^sigma ||f^(lam)||^2 dlam)^{1/2}`` via a padded FFT.

    No ``1/(2 pi)`` factor, so ``hs_norm(f, ell, 0) = sqrt(2 pi) ||f||_2``.
    """
    f = np.asarray(f)
    dl = ell[1] - ell[0]
    n = fft.next_fast_len(pad * ell.size)
    F = fft.fft(f, n, axis=0) * dl
    lam = 2 * np.pi * fft.fftfreq(n, dl)
    dens = (1 + lam ** 2) ** sigma * _norm(F) ** 2
    return float(np.sqrt(np.sum(dens) * 2 * np.pi / (n * dl)))


def sup_low_frequency(f, ell, lam0=1.0, n=401):
    """``sup_{|lam| <= lam0} ||f^(lam)||`` by a grid search refined locally."""
    grid = np.linspace(-lam0, lam0, n)
    vals = fourier_norms(f, ell, grid)
    k = int(np.argmax(vals))
    best = vals[k]
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -fourier_norms(f, ell, x)[0],
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10})
        best = max(best, -res.fun)
    return float(best)


# ---------------------------------------------------------------------------
# Majorization


@dataclass
class MajorizationReport:
    valid: bool
    M: float = None
    max_violation: float = None
    min_slack: float = None
    lam: np.ndarray = field(default=None, repr=False)
    lhs: np.ndarray = field(default=None, repr=False)
    rhs: np.ndarray = field(default=None, repr=False)
    reason: str = ""

    @property
    def holds(self):
        return self.valid and self.max_violation <= 0


def majorization_check(f, ell, L, lam0=1.0, lam=None, atol=1e-8):
    """Check ``||f^(lam + i)|| <= e^L M^{phi(lam + i)}`` on a grid of ``lam``.

    ``f`` must vanish outside ``[-L, L]`` and have ``||f||_1 <= 1``; inputs
    violating this return a report with ``valid=False`` rather than
    raising.  ``max_violation`` is ``max(lhs - rhs)`` with ``atol`` of
    quadrature allowance already added to ``rhs``.
    """
    f = np.asarray(f)
    ell = np.asarray(ell, dtype=float)
    outside = np.abs(ell) > L
    if np.any(_norm(f[outside]) > 0):
        return MajorizationReport(False, reason="support outside [-L, L]")
    if l1_norm(f, ell) > 1 + 1e-12:
        return MajorizationReport(False, reason="L1 norm exceeds 1")
    lam = np.linspace(-20, 20, 401) if lam is None else np.asarray(lam, float)
    M = sup_low_frequency(f, ell, lam0)
    lhs = fourier_norms(f, ell, lam, mu=1.0)
    with np.errstate(divide="ignore"):
        rhs = np.exp(L) * np.exp(phi_on_line(lam / lam0) * np.log(M)) if M > 0 else 0 * lam
    slack = rhs - lhs
    return MajorizationReport(True, M, float(np.max(-slack - atol)),
                              float(np.min(slack)), lam, lhs, rhs)


# ---------------------------------------------------------------------------
# Constants and the bound


def _i_integrand(x, sigma):
    return 1.0 / ((1.0 + x) ** (3 + sigma) * np.arctan2(2.0, x * x))


def _i_tail(x, sigma):
    # past x the arctangent is 2/l^2 to relative O(l^-4); integrate in closed form
    y = 1.0 + x
    return 0.5 * (y ** -sigma / sigma - 2 * y ** (-1 - sigma) / (1 + sigma)
                  + y ** (-2 - sigma) / (2 + sigma))


@lru_cache(maxsize=None)
def i_sigma(sigma):
    """``int_0^inf dlam / ((1+lam)^{3+sigma} arctan(2/lam^2))``.

    Adaptive quadrature on ``[0, 1]``, decades of ``[1, 1e8]`` and a
    closed-form tail; the result is
    accepted when a second pass at tighter tolerance agrees to 1e-9.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")

    # the tail decays like x^{-1-sigma}, so it is split by decades
    edges = [0.0] + [10.0 ** k for k in range(0, 9)]

    def run(eps):
        total = sum(integrate.quad(_i_integrand, lo, hi, args=(sigma,), epsabs=0,
                                   epsrel=eps, limit=200)[0]
                    for lo, hi in zip(edges, edges[1:]))
        return total + _i_tail(edges[-1], sigma)

    coarse, fine = run(1e-10), run(1e-13)
    if abs(coarse - fine) > 1e-9 * abs(fine):
        raise ArithmeticError("quadrature for i_sigma did not settle")
    return float(fine)


def c_sigma(sigma):
    """``sqrt((pi I_sigma 2^{3+sigma} + 4^sigma) / (2 pi))``."""
    return float(np.sqrt((np.pi * i_sigma(sigma) * 2 ** (3 + sigma) + 4 ** sigma)
                         / (2 * np.pi)))


@dataclass
class LemmaInputs:
    M: float
    L: float
    sigma: float
    K: float = 1.0
    lambda0: float = 1.0

    def __post_init__(self):
        if not 0 < self.lambda0 <= 1:
            raise ValidationError("lambda0 must lie in (0, 1]")
        if not 0 < self.sigma <= 1:
            raise ValidationError("sigma must lie in (0, 1]")
        if self.M <= 0 or self.L < 0 or self.K <= 0:
            raise ValidationError("need M > 0, L >= 0, K > 0")


@dataclass
class LoglogBound:
    bound: float
    statement_bound: float
    exponent: float
    statement_exponent: float
    Lambda0: float
    low: float
    high: float
    plancherel: float
    unscaled: float
    degenerate: bool = False
    flags: tuple = ()


def loglog_bound(inp):
    """Assemble the explicit bound on ``||f||_{L^2}``.

    With ``Lambda0 = |log M|^{1/(3+3 sigma)}`` the low-frequency part is
    ``pi e^{2L} I_sigma (2 Lambda0)^{3+sigma} / |log M|``, the high part
    ``(2^sigma e^L)^2 Lambda0^{-2 sigma}``, and Plancherel contributes
    ``e^{2L} / (2 pi)``.  ``unscaled`` is the square root of the product.
    ``bound`` applies the prefactor ``max(1,K)^2 e^{2 L lambda0}
    lambda0^{-1/2-2 sigma}``; ``statement_bound`` is the same with the
    exponent ``sigma/(3+2 sigma)`` in place of ``sigma/(3+3 sigma)``.
    A value ``M >= 1`` gives an infinite, flagged bound.
    """
    s = inp.sigma
    exponent = s / (3 + 3 * s)
    stmt_exponent = s / (3 + 2 * s)
    if inp.M >= 1:
        return LoglogBound(np.inf, np.inf, exponent, stmt_exponent, 0.0, np.inf,
                           np.inf, np.inf, np.inf, True, ("M >= 1",))
    logm = abs(np.log(inp.M))
    lam_big = logm ** (1 / (3 + 3 * s))
    flags = () if lam_big >= 1 else ("Lambda0 < 1",)
    low = np.pi * np.exp(2 * inp.L) * i_sigma(s) * (2 * lam_big) ** (3 + s) / logm
    high = (2 ** s * np.exp(inp.L)) ** 2 * lam_big ** (-2 * s)
    planch = np.exp(2 * inp.L) / (2 * np.pi)
    unscaled = float(np.sqrt(planch * (low + high)))
    pref = max(1.0, inp.K) ** 2 * np.exp(2 * inp.L * inp.lambda0) * inp.lambda0 ** (-0.5 - 2 * s)
    bound = pref * unscaled
    stmt = pref * c_sigma(s) * np.exp(2 * inp.L) * logm ** (-stmt_exponent)
    return LoglogBound(float(bound), float(stmt), exponent, stmt_exponent,
                       float(lam_big), float(low), float(high), float(planch),
                       unscaled, False, flags)


def loglog_slope(sigma, L=1.0, m_range=(1e-40, 1e-8), n=9):
    """Least-squares slope of ``log bound`` against ``log |log M|``."""
    Ms = np.geomspace(m_range[0], m_range[1], n)
    x = np.log(np.abs(np.log(Ms)))
    y = np.log([loglog_bound(LemmaInputs(M, L, sigma)).bound for M in Ms])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# Test functions


def smooth_bump(ell, center=0.0, radius=1.0):
    """``exp(1 - 1/(1 - r^2))`` on ``|l - center| < radius``, zero elsewhere."""
    r = (np.asarray(ell, float) - center) / radius
    inside = np.abs(r) < 1
    out = np.zeros_like(r)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def random_bumps(count, L=1.0, seed=0, n=2001):
    """Random sums of bumps and modulations inside ``[-L, L]`` with L^1 norm at most 1."""
    rng = np.random.default_rng(seed)
    ell = np.linspace(-1.2 * L, 1.2 * L, n)
    for _ in range(count):
        f = np.zeros_like(ell)
        for _ in range(rng.integers(1, 4)):
            r = rng.uniform(0.1, 0.5) * L
            c = rng.uniform(-L + r, L - r)
            f += rng.normal() * np.cos(rng.uniform(0, 20) * ell) * smooth_bump(ell, c, r)
        f *= rng.uniform(0.2, 1.0) / l1_norm(f, ell)
        yield ell, f


def lemma_budget(f, ell, sigma):
    """``||f||_{L^1} + ||f||_{H^sigma}``."""
    return l1_norm(f, ell) + hs_norm(f, ell, sigma)


@dataclass
class LemmaRow:
    M: float
    sigma: float
    lambda0: float
    bound: float
    measured_l2: float
    statement_bound: float
    k: float


def lemma_family(sigma, L=1.0, freqs=(2, 4, 8, 12, 16, 24), n=4001):
    """Modulated bumps ``a cos(k l) bump(l)`` normalised to budget 1.

    As ``k`` grows, ``sup_{|lam|<=1} |f^|`` shrinks.  Returns one row per
    ``k`` with ``M`` below 1.
    """
    ell = np.linspace(-1.25 * L, 1.25 * L, n)
    rows = []
    for k in freqs:
        f = np.cos(k * ell) * smooth_bump(ell, 0.0, L)
        f = f / lemma_budget(f, ell, sigma)
        M = sup_low_frequency(f, ell)
        if M >= 1:
            continue
        b = loglog_bound(LemmaInputs(M, L, sigma))
        rows.append(LemmaRow(M, sigma, 1.0, b.bound, l2_norm(f, ell),
                             b.statement_bound, k))
    return rows
