"""Command-line front end.

Exit codes: 0 success, 2 config/parse error, 3 numeric blow-up, 4 certificate
(validation) failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config
from .coupling import EnergyLedger
from .exponent import PRESETS, build_covering, validate as validate_field
from .fluid import BlowUp, CFLViolation
from .grid import Grid
from .orlicz import TENSOR_COMP_WEIGHTS, luxemburg_norm, modular
from .pressure import verify_bounds, verify_locality
from .rheology import certify_coercive, certify_monotone
from .run import CertificateFailure, build_scene, fitted_order, run_scenario
from .snapshots import KIND_TENSOR, read_snapshot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_CERTIFICATE = 4


def _load(path):
    try:
        return load_config(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    field = cfg.exponent.build(cfg.grid, cfg.t_end, d=cfg.d)
    report = validate_field(field)
    print(f"s range: [{report.s_min:.6g}, {report.s_max:.6g}]")
    print(f"required lower bound: {report.s_min_required:.6g}")
    print(f"log-Hoelder modulus per slab: {report.log_holder_modulus}")
    if not report.passed:
        print("validation FAILED")
        return EXIT_CERTIFICATE
    cov = build_covering(field)
    print(f"covering: {cov.centers.shape[0]} balls, radius {cov.radius:.6g}")
    print("validation passed")
    return EXIT_OK


def _exponent_values(spec: str, grid: Grid, t_end: float):
    if ":" in spec or spec in PRESETS:
        parts = spec.split(":")
        name = parts[0]
        if name not in PRESETS:
            print(f"unknown exponent preset: {name}", file=sys.stderr)
            sys.exit(EXIT_CONFIG)
        params = [float(p) for p in parts[1:]]
        field = PRESETS[name](grid, t_end, *params)
        return field.slabs[0].values
    snap = read_snapshot(spec)
    return snap.data


def cmd_norm(args) -> int:
    snap = read_snapshot(args.field)
    data = snap.data
    cw = TENSOR_COMP_WEIGHTS if snap.kind == KIND_TENSOR else None
    nx, ny = data.shape[0], data.shape[1]
    grid = Grid(nx, ny, args.extent, args.extent * ny / nx)
    s = _exponent_values(args.exponent, grid, t_end=1.0)
    w = np.full((nx, ny), grid.cell_volume)
    print(f"modular:  {modular(data, s, w, cw):.12g}")
    print(f"luxemburg norm: {luxemburg_norm(data, s, w, cw):.12g}")
    return EXIT_OK


def cmd_stress_audit(args) -> int:
    cfg = _load(args.config)
    field, law, _, _ = build_scene(cfg)
    mono = certify_monotone(law, n_samples=args.samples, seed=cfg.seed)
    print(f"monotonicity: worst inner product {mono.worst:.6g} "
          f"(scale {mono.scale:.6g}, {mono.n_samples} pairs)")
    try:
        cert = certify_coercive(law)
    except Exception as exc:
        print(f"coercivity FAILED: {exc}")
        return EXIT_CERTIFICATE
    print(f"coercivity: c = {cert.c:g}, h_bar = {cert.h_bar:g}, "
          f"worst margin {cert.worst_margin:.3e}")
    if cert.c_theta is not None:
        print(f"regularized growth: c_theta = {cert.c_theta:g}, "
              f"h_theta = {cert.h_theta:g}, worst margin {cert.worst_margin_theta:.3e}")
    if mono.worst < -1e-13 * max(mono.scale, 1.0) or not cert.ok:
        print("certificates FAILED")
        return EXIT_CERTIFICATE
    print("certificates passed")
    return EXIT_OK


def cmd_pressure_test(args) -> int:
    cfg = _load(args.config)
    print("kind,resolution,sample,ratio")
    for factor in (1, 2):
        grid = Grid(cfg.grid.nx * factor, cfg.grid.ny * factor, cfg.grid.lx, cfg.grid.ly)
        reports = verify_bounds(grid, n_samples=args.samples, seed=cfg.seed)
        for kind, rep in reports.items():
            for i, r in enumerate(rep.ratios):
                print(f"{kind},{grid.nx},{i},{r:.8g}")
    grid = cfg.grid
    loc = verify_locality(grid, (0.5 * grid.lx, 0.5 * grid.ly), 0.15 * grid.lx)
    print("band_lo,band_hi,sup_p,sup_grad_p")
    for (lo, hi), sp, sg in zip(
        zip(loc.band_edges, loc.band_edges[1:]), loc.sup_p, loc.sup_grad_p
    ):
        print(f"{lo:.6g},{hi:.6g},{sp:.8g},{sg:.8g}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args.config)
    try:
        result = run_scenario(cfg, outdir=args.output)
    except CertificateFailure as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (BlowUp, CFLViolation) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    last = result.ledger.last if result.ledger.rows else None
    if last:
        print(f"finished t = {last.t:g}: E_fluid = {last.E_fluid:.6g}, "
              f"E_kin = {last.E_kin:.6g}, residual = {last.residual_cum:.3e}")
    print(f"ledger: {result.ledger_path}")
    return EXIT_OK


def cmd_energy_report(args) -> int:
    dts, residuals = [], []
    for path in args.ledgers:
        led = EnergyLedger.read_csv(path)
        if len(led.rows) < 2:
            print(f"ledger {path} too short", file=sys.stderr)
            return EXIT_CONFIG
        dts.append(led.rows[1].t - led.rows[0].t)
        residuals.append(led.last.residual_cum)
        print(f"{path}: dt = {dts[-1]:g}, accumulated residual = {residuals[-1]:.6e}")
    if len(dts) >= 2:
        order = fitted_order(dts, residuals)
        print(f"fitted convergence order: {order:.3f}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="sprayflow")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an exponent field and its covering")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("norm", help="modular and Luxemburg norm of a field snapshot")
    p.add_argument("--field", required=True)
    p.add_argument("--exponent", required=True,
                   help="snapshot path or preset spec like constant:2.5")
    p.add_argument("--extent", type=float, default=1.0)
    p.set_defaults(fn=cmd_norm)

    p = sub.add_parser("stress-audit", help="monotonicity and coercivity certificates")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(fn=cmd_stress_audit)

    p = sub.add_parser("pressure-test", help="pressure-solver bound and locality reports")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=10)
    p.set_defaults(fn=cmd_pressure_test)

    p = sub.add_parser("run", help="execute a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("energy-report", help="fit residual convergence order from ledgers")
    p.add_argument("ledgers", nargs="+")
    p.set_defaults(fn=cmd_energy_report)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
