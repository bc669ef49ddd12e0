"""CSV and JSON artifacts.  Every CSV starts with the line ``# hemiray v1``."""
import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .cgo import GridField3D
from .errors import ValidationError
from .euclid_xray import EuclidRayData, PlaneField
from .hemi_xray import HemiRayData

SCHEMA = "# hemiray v1"


def _fmt(x):
    return repr(float(x)) if np.isfinite(x) else ("nan" if np.isnan(x) else str(float(x)))


def write_rows(path, header, rows):
    """Write ``rows`` under ``header`` with the schema comment line first."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_rows(path):
    """Return ``(header, rows)``; rows are lists of strings."""
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA:
            raise ValidationError(f"{path}: missing schema line {SCHEMA!r}")
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r if row]


def _columns(path, expected):
    header, rows = read_rows(path)
    if header[:len(expected)] != expected:
        raise ValidationError(f"{path}: expected header {','.join(expected)}")
    return np.array(rows, dtype=float).reshape(-1, len(header)).T


# hemisphere ray data


def write_hemi_data(path, F):
    A, B = np.meshgrid(F.alpha, F.beta, indexing="ij")
    rows = zip(A.ravel(), B.ravel(), np.full(A.size, F.lam), np.real(F.values).ravel())
    write_rows(path, ["alpha", "beta", "lambda", "value"], rows)


def read_hemi_data(path):
    a, b, lam, v = _columns(path, ["alpha", "beta", "lambda", "value"])
    alpha, beta = np.unique(a), np.unique(b)
    if alpha.size * beta.size != v.size or np.unique(lam).size != 1:
        raise ValidationError(f"{path}: rows do not form one (alpha, beta) grid")
    vals = np.empty((alpha.size, beta.size))
    vals[np.searchsorted(alpha, a), np.searchsorted(beta, b)] = v
    return HemiRayData(alpha, beta, vals, float(lam[0]))


# plane line data and fields


def write_euclid_data(path, F):
    P, Q = np.meshgrid(F.phi, F.p, indexing="ij")
    write_rows(path, ["phi", "p", "value"], zip(P.ravel(), Q.ravel(), np.real(F.values).ravel()))


def read_euclid_data(path):
    phi, p, v = _columns(path, ["phi", "p", "value"])
    up, uq = np.unique(phi), np.unique(p)
    if up.size * uq.size != v.size:
        raise ValidationError(f"{path}: rows do not form one (phi, p) grid")
    vals = np.empty((up.size, uq.size))
    vals[np.searchsorted(up, phi), np.searchsorted(uq, p)] = v
    return EuclidRayData(up, uq, vals)


def write_plane_field(path, g):
    """Row-major CSV of values plus a JSON descriptor ``{N, S, path}`` beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(SCHEMA + "\n")
        np.savetxt(fh, np.real(g.values), delimiter=",", fmt="%.17g")
    desc = {"N": g.n, "S": g.half_width, "support": g.support_radius, "path": path.name}
    path.with_suffix(".json").write_text(json.dumps(desc, indent=2) + "\n")
    return path.with_suffix(".json")


def read_plane_field(descriptor):
    descriptor = Path(descriptor)
    desc = json.loads(descriptor.read_text())
    vals = np.loadtxt(descriptor.parent / desc["path"], delimiter=",", comments="#", ndmin=2)
    if vals.shape != (desc["N"], desc["N"]):
        raise ValidationError(f"{descriptor}: values are not {desc['N']}x{desc['N']}")
    return PlaneField(vals, float(desc["S"]), desc.get("support"))


# 3-D fields


def write_grid3d(path, field):
    """Raw little-endian float64 (row-major) plus ``{dims, box, dtype, h}`` JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(field.values, dtype="<f8").tofile(path)
    desc = {"dims": list(field.values.shape), "box": field.box, "dtype": "<f8",
            "h": field.h, "path": path.name}
    path.with_suffix(".json").write_text(json.dumps(desc, indent=2) + "\n")
    return path.with_suffix(".json")


def read_grid3d(descriptor):
    descriptor = Path(descriptor)
    desc = json.loads(descriptor.read_text())
    vals = np.fromfile(descriptor.parent / desc["path"], dtype=desc["dtype"]).reshape(desc["dims"])
    lo, hi = (np.asarray(b, float) for b in desc["box"])
    h = desc.get("h") or float((hi[0] - lo[0]) / (desc["dims"][0] - 1))
    return GridField3D(vals, tuple(lo), h)


# reports, scenes, phantoms


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def read_phantoms(path):
    specs = json.loads(Path(path).read_text())
    if not isinstance(specs, list):
        raise ValidationError("phantom file must hold a JSON list")
    return specs


def scene_to_json(scene):
    return {"boundary": [[list(map(float, x)), list(map(float, nu))]
                         for x, nu in zip(scene.points, scene.normals)],
            "x0": list(map(float, scene.x0))}


def scene_from_json(obj):
    """Scene from ``{boundary, x0}`` or an analytic ``{type: "ball", center, radius, x0}``."""
    from .geometry import DomainScene, ball_scene
    if obj.get("type") == "ball":
        return ball_scene(obj["center"], float(obj["radius"]), obj["x0"])
    pairs = obj["boundary"]
    return DomainScene([p[0] for p in pairs], [p[1] for p in pairs], obj["x0"])
