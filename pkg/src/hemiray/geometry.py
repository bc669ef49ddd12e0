"""Sphere and domain geometry.

Points on the sphere are plain numpy arrays of shape ``(..., d + 1)`` holding
unit vectors; every function here broadcasts over leading axes.  The
hemisphere is ``{x : x[-1] > 0}`` with the equator as its boundary.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInputError, InfeasibleSceneError, ValidationError

UNIT_TOL = 1e-12
CONJUGATE_TOL = 1e-12


def _as_unit(x, name="x", tol=UNIT_TOL):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] < 2:
        raise ValidationError(f"{name} must be a vector of length >= 2")
    norm = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise ValidationError(f"{name} is not a unit vector (|{name}| = {norm})")
    return x


def japanese(z):
    """Japanese bracket ``sqrt(1 + |z|^2)`` over the last axis."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(1.0 + np.sum(z * z, axis=-1))


def sphere_distance(x, y):
    """Great-circle distance ``arccos <x, y>`` in radians."""
    x = _as_unit(x, "x")
    y = _as_unit(y, "y")
    return np.arccos(np.clip(np.sum(x * y, axis=-1), -1.0, 1.0))


@dataclass(frozen=True)
class BoundaryRay:
    """Inward unit vector ``dir`` attached at the equator point ``(base, 0)``."""

    base: np.ndarray
    dir: np.ndarray

    def __post_init__(self):
        base = _as_unit(self.base, "base")
        xi = _as_unit(self.dir, "dir")
        if xi.shape[-1] != base.shape[-1] + 1:
            raise ValidationError("dir must live in one more dimension than base")
        if xi[-1] <= 0:
            raise ValidationError("dir must point into the upper hemisphere")
        if abs(np.dot(base, xi[:-1])) >= UNIT_TOL:
            raise ValidationError("dir is not orthogonal to the base point")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "dir", xi)

    @classmethod
    def from_angles(cls, alpha, beta):
        """Ray on S^2: base ``(cos a, sin a)``, direction at inward angle ``beta``."""
        if not 0.0 < beta < np.pi:
            raise ValidationError("beta must lie in (0, pi)")
        base = np.array([np.cos(alpha), np.sin(alpha)])
        perp = np.array([-np.sin(alpha), np.cos(alpha)])
        xi = np.append(np.cos(beta) * perp, np.sin(beta))
        return cls(base, xi)

    @property
    def base_point(self):
        return np.append(self.base, 0.0)


def geodesic_point(ray, t):
    """Point ``cos t (x', 0) + sin t xi`` of the half great circle."""
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > np.pi)):
        raise ValidationError("t must lie in [0, pi]")
    t = t[..., None]
    return np.cos(t) * ray.base_point + np.sin(t) * ray.dir


def exp_inverse(x_base, y):
    """Invert the exponential map at the equator point ``(x_base, 0)``.

    Returns the geodesic distance ``t`` and the unit initial direction
    ``eta`` with ``geodesic_point(BoundaryRay(x_base, eta), t) == y``.
    """
    x_base = _as_unit(x_base, "x_base")
    y = _as_unit(y, "y")
    c = float(np.dot(x_base, y[:-1]))
    if abs(c) >= 1.0 - CONJUGATE_TOL:
        raise DegenerateInputError(
            "y coincides with or is antipodal to the base point")
    base = np.append(x_base, 0.0)
    eta = (y - c * base) / np.sqrt(1.0 - c * c)
    return float(np.arccos(c)), eta


def stereo_project(x):
    """Stereographic chart ``x' / x_{d+1}`` of the open upper hemisphere."""
    x = _as_unit(x, "x", tol=1e-10)
    last = x[..., -1]
    if np.any(last <= 0):
        raise ValidationError("stereo_project needs x_{d+1} > 0")
    return x[..., :-1] / last[..., None]


def stereo_lift(z):
    """Inverse chart ``(z, 1) / <z>``."""
    z = np.asarray(z, dtype=float)
    ones = np.ones(z.shape[:-1] + (1,))
    return np.concatenate([z, ones], axis=-1) / japanese(z)[..., None]


# ---------------------------------------------------------------------------
# Domains seen from an exterior source point


class CapParams(NamedTuple):
    eps: float
    rho0: float
    s0: float
    omega0: np.ndarray
    alpha0: float


@dataclass(frozen=True)
class DomainScene:
    """Sampled boundary (points with outward unit normals) and a source ``x0``."""

    points: np.ndarray
    normals: np.ndarray
    x0: np.ndarray
    sweep_resolution: float = field(default=1.0, compare=False)
    sweep_level: int = field(default=4, compare=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        nrm = np.atleast_2d(np.asarray(self.normals, dtype=float))
        x0 = np.asarray(self.x0, dtype=float)
        if pts.shape != nrm.shape or pts.shape[1] != x0.shape[0]:
            raise ValidationError("points, normals and x0 have inconsistent shapes")
        if pts.shape[1] not in (2, 3):
            raise ValidationError("scenes are supported in 2 or 3 dimensions")
        _as_unit(nrm, "normals", tol=1e-9)
        for name, arr in (("points", pts), ("normals", nrm), ("x0", x0)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self):
        return self.points.shape[1]

    def cap_params(self):
        return cap_params(self)


def ball_scene(center, radius, x0, n=40):
    """Ball boundary sampled on a latitude/longitude net that includes both poles.

    ``n`` is the number of latitude bands (3-D) or of boundary points (2-D).
    """
    center = np.asarray(center, dtype=float)
    if center.shape[0] == 2:
        phi = 2 * np.pi * np.arange(n) / n
        nrm = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    else:
        pol = np.pi * np.arange(1, n) / n
        azi = 2 * np.pi * np.arange(2 * n) / (2 * n)
        P, A = np.meshgrid(pol, azi, indexing="ij")
        nrm = np.stack([np.sin(P) * np.cos(A), np.sin(P) * np.sin(A), np.cos(P)],
                       axis=-1).reshape(-1, 3)
        nrm = np.vstack([nrm, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    return DomainScene(center + radius * nrm, nrm, x0)


def box_scene(lo, hi, x0, n=20):
    """Axis-aligned box with ``n`` samples per edge direction on every face."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.shape[0]
    pts, nrms = [], []
    u = np.linspace(0.0, 1.0, n)
    for axis in range(dim):
        others = [a for a in range(dim) if a != axis]
        grids = np.meshgrid(*([u] * (dim - 1)), indexing="ij")
        for side, val in ((-1.0, lo[axis]), (1.0, hi[axis])):
            p = np.empty((grids[0].size, dim))
            p[:, axis] = val
            for g, a in zip(grids, others):
                p[:, a] = lo[a] + g.ravel() * (hi[a] - lo[a])
            nv = np.zeros_like(p)
            nv[:, axis] = side
            pts.append(p)
            nrms.append(nv)
    return DomainScene(np.vstack(pts), np.vstack(nrms), x0)


def _icosphere(level):
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(verts)


def direction_grid(dim, resolution_deg=1.0, level=4):
    """Candidate unit directions for the separating-hyperplane sweep."""
    if dim == 2:
        n = int(round(360.0 / resolution_deg))
        phi = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return _icosphere(level)


def _support_gap(rel, dirs):
    # min over boundary samples of <x - x0, omega>, for every direction
    return (rel @ dirs.T).min(axis=0)


def _tangent_basis(omega):
    helper = np.eye(omega.shape[0])[np.argmin(np.abs(omega))]
    u = helper - np.dot(helper, omega) * omega
    u /= np.linalg.norm(u)
    if omega.shape[0] == 2:
        return [u]
    return [u, np.cross(omega, u)]


def cap_params(scene, rounds=12):
    """Separating hyperplane ``<x - x0, omega0> = s0`` and the derived cap level.

    ``s0`` is maximised by a direction sweep followed by a zooming local
    sweep; ``eps`` is taken equal to ``s0`` (the distance from ``x0`` to the
    sampled hull) and ``alpha0 = s0 / rho0``.
    """
    rel = scene.points - scene.x0
    dirs = direction_grid(scene.dim, scene.sweep_resolution, scene.sweep_level)
    gaps = _support_gap(rel, dirs)
    best = dirs[np.argmax(gaps)]
    best_gap = gaps.max()
    radius = np.deg2rad(scene.sweep_resolution) if scene.dim == 2 else 0.1
    offsets = np.linspace(-1.0, 1.0, 9)
    for _ in range(rounds):
        basis = _tangent_basis(best)
        if len(basis) == 1:
            cand = best + radius * offsets[:, None] * basis[0]
        else:
            a, b = np.meshgrid(offsets, offsets, indexing="ij")
            cand = (best + radius * (a.ravel()[:, None] * basis[0]
                                     + b.ravel()[:, None] * basis[1]))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        g = _support_gap(rel, cand)
        k = np.argmax(g)
        if g[k] > best_gap:
            best, best_gap = cand[k], g[k]
        radius /= 4.0
    if best_gap <= 0:
        raise InfeasibleSceneError(
            "x0 is not separated from the convex hull of the boundary")
    rho0 = float(np.linalg.norm(rel, axis=1).max())
    s0 = float(best_gap)
    return CapParams(eps=s0, rho0=rho0, s0=s0, omega0=best, alpha0=s0 / rho0)


class FrontSet(NamedTuple):
    mask: np.ndarray
    weight: np.ndarray


def front_set(scene, delta=0.0):
    """Label boundary samples in ``{<x - x0, nu> <= delta |x - x0|^2}``.

    Also returns the boundary weight ``|<nu, x - x0>| / |x - x0|^2`` used for
    the weighted boundary norms.
    """
    if delta < 0:
        raise ValidationError("delta must be non-negative")
    rel = scene.points - scene.x0
    proj = np.sum(rel * scene.normals, axis=1)
    dist2 = np.sum(rel * rel, axis=1)
    return FrontSet(mask=proj <= delta * dist2, weight=np.abs(proj) / dist2)
