"""Command-line driver for reproducible experiments.

Subcommands mirror the stages of the inversion pipeline::

    forward    simulate the voltage-to-current maps for a chosen inclusion
    sample     evaluate the indicator function over a grid
    extract    pull a level set out of an indicator map and fit a curve
    impedance  recover the impedance coefficient from Cauchy pairs
    verify     run the built-in cross-validation suites

The measurement boundary is fixed to the unit circle; general outer
boundaries would need a numerically computed Green's function for the
sampling right-hand side.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bie, verify
from .completion import CauchyPair, assemble_completion, recover_gamma_averaged
from .dtn import gap_from_lambda0
from .exceptions import EitDiskError
from .geometry import BoundaryCurve
from .io import (config_hash, geometry_from_dict, geometry_to_dict, read_dtn,
                 read_curve, read_indicator, write_curve, write_dtn,
                 write_gamma, write_indicator)
from .regularization import RegStrategy
from .sampling import GridSpec, extract_level_set, fit_trig_curve, scan

_GAMMA_NAMESPACE = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "sqrt": np.sqrt, "abs": np.abs, "pi": np.pi,
}


def _load_geometry(spec):
    """Geometry from a JSON file path or an inline JSON object."""
    text = spec
    if not spec.lstrip().startswith("{"):
        with open(spec) as fh:
            text = fh.read()
    return geometry_from_dict(json.loads(text))


def _gamma_values(expr, theta):
    """Evaluate an impedance expression such as ``2 - sin(theta)**4``."""
    values = eval(expr, {"__builtins__": {}}, dict(_GAMMA_NAMESPACE, theta=theta))
    values = np.broadcast_to(np.asarray(values, dtype=float), theta.shape).copy()
    if np.any(values < 0):
        raise ValueError("impedance expression must be nonnegative")
    return values


def _parse_basis(text):
    kind, _, num = text.partition(":")
    if kind == "fourier":
        return "fourier", int(num or 19)
    if kind == "collocation":
        return "collocation", int(num or 64)
    raise ValueError(f"unknown basis {text!r}")


def _parse_reg(text, noise_level):
    parts = text.split(":")
    if parts[0] == "none":
        return RegStrategy.none()
    if parts[0] == "tikhonov":
        if len(parts) == 1:
            return RegStrategy.tikhonov_discrepancy(noise_level)
        if parts[1] == "disc":
            safety = float(parts[2]) if len(parts) > 2 else 1.5
            return RegStrategy.tikhonov_discrepancy(noise_level, safety)
        return RegStrategy.tikhonov(float(parts[1]))
    if parts[0] == "cutoff":
        if len(parts) > 1 and parts[1] == "noise":
            safety = float(parts[2]) if len(parts) > 2 else 2.0
            return RegStrategy.cutoff_by_noise(noise_level, safety)
        return RegStrategy.spectral_cutoff(float(parts[1]))
    raise ValueError(f"unknown regularization {text!r}")


def _check_inclusion(curve):
    pts = curve.point(curve.nodes(256))
    top = float(np.hypot(pts[:, 0], pts[:, 1]).max())
    if top >= 1.0:
        raise ValueError(
            f"inclusion reaches radius {top:.3f}; it must stay strictly "
            "inside the unit measurement circle")


def _meshes(curve, n_outer, n_inner):
    outer = bie.NystromMesh(BoundaryCurve.circle(radius=1.0), n_outer, "outer")
    inner = bie.NystromMesh(curve, n_inner, "inner")
    return outer, inner


def cmd_forward(args):
    curve = _load_geometry(args.geometry)
    curve.validate()
    _check_inclusion(curve)
    basis, order = _parse_basis(args.basis)
    config = {"command": "forward", "geometry": geometry_to_dict(curve),
              "bc": args.bc, "gamma": args.gamma, "basis": args.basis,
              "noise": args.noise, "seed": args.seed, "sim_nodes": args.sim_nodes}
    if basis == "fourier":
        n_sim = max(args.sim_nodes, 2 * order + 2)
        modes = np.arange(0, order + 1) if args.one_sided else np.arange(-order, order + 1)
    else:
        n_sim = order
        modes = None
    outer, inner = _meshes(curve, n_sim, args.inner_nodes)
    gamma = _gamma_values(args.gamma, inner.theta) if args.bc == "impedance" else None
    noise = (args.noise, args.seed) if args.noise else None
    lam = bie.dtn_matrix(outer, inner, args.bc, gamma, basis=basis,
                         modes=modes, flux_noise=noise)
    gap = gap_from_lambda0(lam)
    write_dtn(args.out, lam, gap, config)
    print(f"wrote {args.out} (config {config_hash(config)})")


def cmd_sample(args):
    _, gap = read_dtn(args.data)
    reg = _parse_reg(args.reg, args.reg_noise if args.reg_noise is not None else args.noise)
    grid = GridSpec.square(args.grid)
    noise = (args.noise, args.seed) if args.noise else None
    result = scan(gap, grid, reg, noise=noise)
    config = {"command": "sample", "data": args.data, "grid": args.grid,
              "noise": args.noise, "seed": args.seed, "reg": args.reg,
              "reg_noise": args.reg_noise}
    write_indicator(args.out, result, config)
    top = result.max_value
    bottom = float(np.nanmin(result.values))
    print(f"wrote {args.out} (config {config_hash(config)})")
    print(f"indicator range [{bottom:.6g}, {top:.6g}]; "
          f"suggested level {args.threshold_rel} * max = {args.threshold_rel * top:.6g}")


def cmd_extract(args):
    grid = read_indicator(args.indicator)
    points = extract_level_set(grid, args.threshold_rel)
    fitted = fit_trig_curve(points, args.degree, args.smoothing)
    config = {"command": "extract", "indicator": args.indicator,
              "threshold_rel": args.threshold_rel, "degree": args.degree,
              "smoothing": args.smoothing}
    write_curve(args.out, fitted, config)
    radii = np.hypot(*fitted.to_curve().point(np.linspace(0, 2 * np.pi, 64,
                                                          endpoint=False)).T)
    print(f"wrote {args.out} (config {config_hash(config)}); "
          f"{len(points)} contour points, fitted radius "
          f"[{radii.min():.4f}, {radii.max():.4f}]")


def cmd_impedance(args):
    if args.pairs < 1:
        raise ValueError("at least one Cauchy pair is required")
    true_curve = _load_geometry(args.geometry)
    _check_inclusion(true_curve)
    outer, inner_true = _meshes(true_curve, args.sim_nodes, args.sim_nodes)
    gamma_true = _gamma_values(args.gamma, inner_true.theta)

    if args.curve:
        fitted = read_curve(args.curve)
        recon_curve = fitted.to_curve()
        model_factor = args.model_error_factor
    else:
        recon_curve = true_curve
        model_factor = 1.0
    outer64, inner64 = _meshes(recon_curve, args.nodes, args.nodes)
    system = assemble_completion(outer64, inner64, model_error_factor=model_factor)

    pairs = []
    k_max = (args.pairs + 1) // 2
    for k in range(1, k_max + 1):
        for kind, fn in (("cos", np.cos), ("sin", np.sin)):
            if len(pairs) >= args.pairs:
                break
            f_sim = fn(k * outer.theta)
            sol = bie.solve_forward(outer, inner_true, args.bc, f_sim, gamma_true)
            flux = sol.outer_flux()
            g64 = np.real(bie.trig_resample(flux, outer64.theta))
            if args.noise:
                from .regularization import perturb_vector
                g64 = perturb_vector(g64, args.noise, (args.seed, len(pairs)))
            pairs.append(CauchyPair(fn(k * outer64.theta), g64,
                                    noise_level=args.noise,
                                    label=f"{kind}({k}t)"))
    reg = _parse_reg(args.reg, args.reg_noise if args.reg_noise is not None else args.noise)
    recon = recover_gamma_averaged(system, pairs, reg, tol_rel=args.mask_tol)
    config = {"command": "impedance", "geometry": geometry_to_dict(true_curve),
              "bc": args.bc, "gamma": args.gamma, "curve": args.curve,
              "pairs": args.pairs, "noise": args.noise, "seed": args.seed,
              "reg": args.reg, "mask_tol": args.mask_tol}
    write_gamma(args.out, recon, config)
    used = recon.unmasked()
    print(f"wrote {args.out} (config {config_hash(config)}); "
          f"{int(used.sum())}/{len(used)} nodes recovered, "
          f"mean gamma {np.nanmean(recon.average):.4f}")


def cmd_verify(args):
    results = verify.run_all(flip_sign=args.flip_kernel_sign)
    failed = 0
    for r in results:
        print(r.line())
        failed += not r.passed
    if failed:
        print(f"{failed} suite(s) failed")
        return 1
    print("all suites passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="eitdisk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", help="simulate voltage-to-current maps")
    p.add_argument("--geometry", required=True, help="geometry JSON file or inline object")
    p.add_argument("--bc", choices=("dirichlet", "impedance"), default="dirichlet")
    p.add_argument("--gamma", default="2.0", help="impedance expression in theta")
    p.add_argument("--basis", default="collocation:64",
                   help="fourier:N or collocation:n")
    p.add_argument("--one-sided", action="store_true",
                   help="use modes 0..N instead of -N..N for the fourier basis")
    p.add_argument("--sim-nodes", type=int, default=32,
                   help="simulation nodes on the measurement circle")
    p.add_argument("--inner-nodes", type=int, default=32)
    p.add_argument("--noise", type=float, default=0.0,
                   help="multiplicative noise level on simulated currents")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("sample", help="evaluate the sampling indicator")
    p.add_argument("--data", required=True, help="DtN JSON from the forward command")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--noise", type=float, default=0.0,
                   help="multiplicative noise on the gap matrix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reg", default="tikhonov:disc:1.5")
    p.add_argument("--reg-noise", type=float, default=None,
                   help="noise level assumed by the regularizer (defaults to --noise)")
    p.add_argument("--threshold-rel", type=float, default=0.2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("extract", help="extract and fit a level-set curve")
    p.add_argument("--indicator", required=True)
    p.add_argument("--threshold-rel", type=float, default=0.2)
    p.add_argument("--degree", type=int, default=7)
    p.add_argument("--smoothing", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("impedance", help="recover the impedance coefficient")
    p.add_argument("--geometry", required=True, help="true inclusion geometry")
    p.add_argument("--bc", choices=("impedance", "dirichlet"), default="impedance")
    p.add_argument("--gamma", default="2.0")
    p.add_argument("--curve", default=None,
                   help="fitted-curve JSON; defaults to the exact geometry")
    p.add_argument("--pairs", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reg", default="cutoff:noise:2")
    p.add_argument("--reg-noise", type=float, default=None)
    p.add_argument("--mask-tol", type=float, default=0.05)
    p.add_argument("--model-error-factor", type=float, default=2.0)
    p.add_argument("--sim-nodes", type=int, default=32)
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_impedance)

    p = sub.add_parser("verify", help="run the cross-validation suites")
    p.add_argument("--flip-kernel-sign", action="store_true",
                   help="flip the double-layer sign to demonstrate suite sensitivity")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except (EitDiskError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
