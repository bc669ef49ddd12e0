"""Smooth test fields on the upper hemisphere.

Phantom specs are dicts ``{type, center, width, amplitude}`` with ``type``
one of ``gaussian`` or ``cap_bump``; ``center`` is a point of ``R^3``
(normalised to the sphere) and ``width`` an angular scale in radians.
"""
import numpy as np

from .errors import ValidationError


def _bump(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1
    safe = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe ** 2)), 0.0)


def cap_taper(x3, alpha0):
    """Smooth step: 0 for ``x3 <= alpha0``, 1 at the pole."""
    u = (np.asarray(x3, dtype=float) - alpha0) / (1.0 - alpha0)
    pos = u > 0
    safe = np.where(pos, u, 1.0)
    return np.where(pos, np.exp(1.0 - 1.0 / safe), 0.0)


def _center(c):
    c = np.asarray(c, dtype=float)
    if c.shape != (3,) or not np.linalg.norm(c) > 0:
        raise ValidationError("center must be a nonzero 3-vector")
    return c / np.linalg.norm(c)


def cap_bump(center, width, amplitude=1.0):
    """Compactly supported bump of geodesic radius ``width`` about ``center``."""
    c = _center(center)

    def f(pts):
        d = np.arccos(np.clip(np.asarray(pts) @ c, -1.0, 1.0))
        return amplitude * _bump(d / width)
    return f


def gaussian(center, width, amplitude=1.0, alpha0=0.5):
    """``amplitude exp(-d^2/width^2)`` times a taper vanishing off the cap."""
    c = _center(center)

    def f(pts):
        pts = np.asarray(pts)
        d = np.arccos(np.clip(pts @ c, -1.0, 1.0))
        return amplitude * np.exp(-(d / width) ** 2) * cap_taper(pts[..., 2], alpha0)
    return f


def from_specs(specs, alpha0=0.5):
    """Sum of the phantoms listed in ``specs`` (an empty list gives zero)."""
    parts = []
    for sp in specs:
        kind = sp.get("type")
        args = (sp["center"], float(sp["width"]), float(sp.get("amplitude", 1.0)))
        if kind == "gaussian":
            parts.append(gaussian(*args, alpha0=alpha0))
        elif kind == "cap_bump":
            parts.append(cap_bump(*args))
        else:
            raise ValidationError(f"unknown phantom type {kind!r}")

    def f(pts):
        out = np.zeros(np.shape(pts)[:-1])
        for p in parts:
            out = out + p(pts)
        return out
    return f


def random_cap_specs(k, alpha0=0.5, seed=0, n_bumps=3):
    """``k`` lists of ``n_bumps`` random cap bumps, each inside the cap."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(k):
        specs = []
        for _ in range(n_bumps):
            width = rng.uniform(0.15, 0.3)
            # centre at polar angle small enough that the bump clears the cap edge
            theta = rng.uniform(0.0, np.arccos(alpha0) - width - 0.02)
            az = rng.uniform(0.0, 2 * np.pi)
            c = [np.sin(theta) * np.cos(az), np.sin(theta) * np.sin(az), np.cos(theta)]
            specs.append({"type": "cap_bump", "center": c, "width": width,
                          "amplitude": float(rng.uniform(0.5, 1.5))})
        out.append(specs)
    return out


DEFAULT_PHANTOM = [{"type": "cap_bump", "center": [0.25, 0.1, float(np.sqrt(1 - 0.0725))],
                    "width": 0.6, "amplitude": 1.0}]
