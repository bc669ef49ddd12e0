"""Batch command line: ``hemiray <subcommand> [options]``.

Exit codes: 0 success, 1 failed check, 2 numerical divergence, 64 bad usage.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cgo, euclid_xray as ex, hemi_xray as hx, io, logcvx, phantoms, recon
from .errors import DivergenceError, HemirayError, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_DIVERGED, EXIT_USAGE = 0, 1, 2, 64

VALIDATE_CHECKS = ("santalo", "duality", "measure", "quasimode-norm")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def floats(text):
    """Comma separated list of floats."""
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty range")
    return vals


def _single(vals, name, default=0.0):
    if vals is None:
        return default
    if len(vals) != 1:
        raise UsageError(f"--{name} takes a single value here")
    return vals[0]


def _out(args, default):
    return Path(args.out) if args.out else Path(default)


# ---------------------------------------------------------------------------
# validate


def _check_santalo(args, rng):
    n = args.grid
    alpha, beta = hx.ray_grid(args.angles, max(args.angles // 2, 2))
    specs = phantoms.random_cap_specs(10, seed=int(rng.integers(2 ** 31)))
    fields = [lambda p: np.ones(p.shape[:-1])] + [phantoms.from_specs(s) for s in specs]
    sf = hx.SphereField(np.stack([hx.SphereField.from_function(f, n, n).values for f in fields]))
    lhs = sf.integrate()
    rhs = hx.santalo_rhs(sf, alpha, beta, threads=args.threads)
    return float(np.max(np.abs(rhs - lhs) / np.abs(lhs))), 1e-3


def random_plane_pair(like, rng, phi, p):
    X, Y = like.mesh()
    g = np.zeros_like(X)
    for _ in range(4):
        c = rng.uniform(-0.5, 0.5, 2) * like.support_radius
        g += rng.normal() * np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2) / 0.1)
    g *= np.hypot(X, Y) < like.support_radius
    H = rng.standard_normal((phi.size, p.size))
    return like.with_values(g), ex.EuclidRayData(phi, p, H)


def duality_defect(g, F, w):
    """``|<X g, F> - <g, X^* F>| / (||X g|| ||F||)``."""
    Xg = ex.x_ray_forward(g, w, phi=F.phi, p=F.p)
    lhs = Xg.inner(F)
    rhs = g.inner(ex.x_ray_adjoint(F, w, like=g))
    return abs(lhs - rhs) / (Xg.l2_norm() * F.l2_norm())


def _check_duality(args, rng):
    n = min(args.grid, 128)
    like = ex.PlaneField(np.zeros((n, n)), 2.0, 1.5)
    phi = ex.angle_grid(args.angles)
    p = ex.offset_grid(n, like.half_width)
    worst = 0.0
    for w in (ex.WeightSpec.unit(), ex.WeightSpec.attenuated(0.1)):
        for _ in range(3):
            g, F = random_plane_pair(like, rng, phi, p)
            worst = max(worst, duality_defect(g, F, w))
    return float(worst), 1e-3


def _check_measure(args, rng):
    gap, _, _ = cgo.measure_identity(n_cart=args.grid // 2 + 1, n_polar=max(args.grid // 4, 4))
    return float(gap), 1e-3


def _check_quasimode_norm(args, rng):
    worst = 0.0
    nodes = max(args.grid // 4, 2)

    def b(ph):
        return np.sin(ph) ** 2

    for k in (0.5, 1.0, 2.0):
        q = cgo.Quasimode(3.0 + 1j * k, b)
        ratio = cgo.quasimode_l2(q, nodes, nodes) ** 2 / cgo.profile_norm(b, nodes) ** 2
        worst = max(worst, abs(ratio / cgo.exact_l2_factor(q.s) - 1))
    return float(worst), 1e-6


CHECKS = {"santalo": _check_santalo, "duality": _check_duality,
          "measure": _check_measure, "quasimode-norm": _check_quasimode_norm}


def cmd_validate(args):
    rng = np.random.default_rng(args.seed)
    names = args.only or list(VALIDATE_CHECKS)
    rows, failed = [], []
    for name in names:
        value, tol = CHECKS[name](args, rng)
        ok = bool(value < tol)
        rows.append([name, value, tol, "pass" if ok else "fail"])
        print(f"{name:16s} {value:.3e}  tol {tol:.0e}  {'PASS' if ok else 'FAIL'}")
        if not ok:
            failed.append(name)
    io.write_rows(_out(args, "validate.csv"), ["check", "value", "tol", "status"], rows)
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# forward, reconstruct, roundtrip


def _phantom(args):
    specs = io.read_phantoms(args.phantom) if args.phantom else phantoms.DEFAULT_PHANTOM
    return phantoms.from_specs(specs, args.alpha0), specs


def cmd_forward(args):
    lam = _single(args.lam, "lambda")
    f, _ = _phantom(args)
    alpha, beta = hx.ray_grid(args.angles, args.angles // 2)
    F = hx.t_lambda_forward(f, lam, alpha, beta, threads=args.threads)
    out = _out(args, "forward.csv")
    io.write_hemi_data(out, F)
    print(f"wrote {F.values.size} rays to {out}")
    return EXIT_OK


def cmd_reconstruct(args):
    if not args.input:
        raise UsageError("reconstruct needs --input (CSV written by 'forward')")
    F = io.read_hemi_data(args.input)
    lam = F.lam if args.lam is None else _single(args.lam, "lambda")
    h, report = _plane_reconstruct(F, lam, args)
    out = _out(args, "recon.csv")
    io.write_plane_field(out, h)
    io.write_json(out.with_name(out.stem + "_report.json"), report.as_dict())
    print(f"iterations {report.iterations}  converged {report.converged}")
    return EXIT_OK


def _plane_reconstruct(F, lam, args):
    like = recon.plane_grid(args.alpha0, args.grid)
    phi = ex.angle_grid(args.angles)
    G = recon.hemi_to_plane_data(F, phi, ex.offset_grid(like.n, like.half_width))
    return recon.weighted_invert(G, ex.WeightSpec.attenuated(lam), like)


def cmd_roundtrip(args):
    lam = _single(args.lam, "lambda")
    f, _ = _phantom(args)
    alpha, beta = hx.ray_grid(args.angles, args.angles // 2)
    F = hx.t_lambda_forward(f, lam, alpha, beta, threads=args.threads)
    if args.noise:
        noise = _single(args.noise, "noise")
        rng = np.random.default_rng(args.seed)
        rms = np.sqrt(np.mean(F.values ** 2))
        F = hx.HemiRayData(alpha, beta, F.values + noise * rms * rng.standard_normal(F.values.shape), lam)
    rec, report = recon.hemi_reconstruct(F, lam, args.alpha0, args.grid, args.angles)
    truth = hx.SphereField.from_function(f, alpha0=args.alpha0)
    err = recon.sphere_error(rec, truth)
    report.rel_error = err
    if args.out:
        io.write_json(args.out, report.as_dict())
    ok = err < args.threshold
    print(f"relative L2 error {err:.4e}  threshold {args.threshold:g}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# sweeps and lemma


def cmd_sweep(args):
    out = _out(args, f"sweep_{args.kind}.csv")
    if args.kind == "stability":
        lams = args.lam if args.lam is not None else [0.0, 0.05, 0.1]
        noises = args.noise if args.noise is not None else [0.0, 0.01]
        if any(v < 0 for v in lams + noises):
            raise UsageError("lambda and noise values must be non-negative")
        specs = io.read_phantoms(args.phantom) if args.phantom else phantoms.DEFAULT_PHANTOM
        rows, summary = recon.stability_probe(
            [phantoms.from_specs(specs, args.alpha0)], lams, noises, args.alpha0,
            args.seed, args.grid, rays=hx.ray_grid(args.angles, args.angles // 2))
        io.write_rows(out, ["lambda", "noise", "ratio", "err"],
                      [[r.lam, r.noise, r.ratio, r.err] for r in rows])
        print(f"C_hat {summary['C_hat']}  lambda0_hat {summary['lambda0_hat']}")
    else:
        sigmas = args.sigma if args.sigma is not None else [0.25, 0.5]
        if any(not 0 < s <= 1 for s in sigmas):
            raise UsageError("sigma values must lie in (0, 1]")
        rows = []
        for s in sigmas:
            slope = logcvx.loglog_slope(s)
            for r in logcvx.lemma_family(s):
                rows.append([r.M, r.sigma, r.lambda0, r.bound, r.measured_l2,
                             r.statement_bound, slope])
        io.write_rows(out, ["M", "sigma", "lambda0", "bound", "measured_l2",
                            "statement_bound", "slope"], rows)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_lemma_check(args):
    sigma = _single(args.sigma, "sigma") if args.sigma is not None else 0.5
    worst = -np.inf
    for ell, f in logcvx.random_bumps(args.count, seed=args.seed):
        rep = logcvx.majorization_check(f, ell, 1.0)
        worst = max(worst, rep.max_violation)
    fam = logcvx.lemma_family(sigma)
    bound_ok = all(r.measured_l2 <= r.bound for r in fam)
    slope = logcvx.loglog_slope(sigma)
    target = -sigma / (3 + 3 * sigma)
    slope_ok = abs(slope / target - 1) < 0.05
    rows = [["majorization", worst, worst <= 0],
            ["bound", max(r.measured_l2 / r.bound for r in fam), bound_ok],
            ["slope", slope, slope_ok]]
    io.write_rows(_out(args, "lemma_check.csv"), ["check", "value", "pass"], rows)
    for name, val, ok in rows:
        print(f"{name:14s} {val: .4e}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if all(r[2] for r in rows) else EXIT_FAIL


def cmd_calibrate(args):
    cal = recon.calibrate_cd(n=args.grid, n_phi=args.angles)
    io.write_json(_out(args, "calibration.json"), cal.as_dict())
    print(f"c_hat {cal.c_hat:.6f}  residual {cal.residual:.2e}  printed c_d {cal.printed_cd:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------


COMMANDS = {"validate": cmd_validate, "forward": cmd_forward, "reconstruct": cmd_reconstruct,
            "roundtrip": cmd_roundtrip, "sweep": cmd_sweep, "calibrate": cmd_calibrate,
            "lemma-check": cmd_lemma_check}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=256, help="grid size N")
    common.add_argument("--angles", type=int, default=360, help="number of angles")
    common.add_argument("--lambda", dest="lam", type=floats, default=None,
                        help="attenuation (comma list for sweeps)")
    common.add_argument("--sigma", type=floats, default=None, help="Sobolev order(s)")
    common.add_argument("--noise", type=floats, default=None, help="relative noise level(s)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output path")
    common.add_argument("--config", default=None, help="JSON file of option defaults")
    common.add_argument("--alpha0", type=float, default=0.5, help="cap level")
    common.add_argument("--phantom", default=None, help="phantom JSON list")

    parser = Parser(prog="hemiray",
                    description="Hemisphere ray transforms, weighted X-ray inversion and CGO checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)
    p = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p.add_argument("--only", action="append", choices=VALIDATE_CHECKS)
    sub.add_parser("forward", parents=[common], help="hemisphere ray data of a phantom")
    p = sub.add_parser("reconstruct", parents=[common], help="invert hemisphere ray data")
    p.add_argument("--input")
    p = sub.add_parser("roundtrip", parents=[common], help="forward then reconstruct")
    p.add_argument("--threshold", type=float, default=0.05)
    p = sub.add_parser("sweep", parents=[common], help="stability or lemma sweep")
    p.add_argument("kind", choices=("stability", "lemma"))
    sub.add_parser("calibrate", parents=[common], help="fit the normal-operator constant")
    p = sub.add_parser("lemma-check", parents=[common], help="log-convexity checks")
    p.add_argument("--count", type=int, default=500)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config`` (explicit flags still win)."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as err:
        parser.error(f"cannot read config: {err}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    cfg = {("lam" if k == "lambda" else k.replace("-", "_")): v for k, v in cfg.items()}
    bad = set(cfg) - known
    if bad:
        parser.error(f"unknown config keys: {', '.join(sorted(bad))}")
    for key in ("lam", "sigma", "noise"):
        if key in cfg and not isinstance(cfg[key], list):
            cfg[key] = [cfg[key]]
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    args = _apply_config(parser, argv)
    if args.grid < 4 or args.angles < 4:
        parser.error("--grid and --angles must be at least 4")
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"hemiray: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as err:
        print(f"hemiray: divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except ValidationError as err:
        print(f"hemiray: invalid input: {err}", file=sys.stderr)
        return EXIT_USAGE
    except HemirayError as err:
        print(f"hemiray: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
