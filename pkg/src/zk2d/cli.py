"""Command-line front end.

Subcommands: run, verify-inequalities, decay-report, convergence, threshold.
Exit codes: 0 all requested checks passed, 1 a check failed, 2 configuration
error, 3 solver blow-up.  Report-producing commands render matplotlib
figures next to their delimited outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, DomainSpec, GridSpec, RunConfig, parse_config
from .decay import decay_report, format_report
from .inequalities import (MARGIN_FLOOR, TestFunctionFamily, compute_threshold_m,
                           run_inequality_suite)
from .io import (read_records_csv, read_threshold, write_decay_fits_csv,
                 write_manifest, write_margins_csv, write_records_csv,
                 write_snapshot, write_threshold)
from .solver import BlowUpError, GalerkinSolver, run

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def _write_run_outputs(result, out_dir: Path, snapshot_every: int):
    out_dir.mkdir(parents=True, exist_ok=True)
    write_records_csv(out_dir / "records.csv", result.records)
    write_manifest(out_dir / "manifest.txt", result.config, __version__)
    write_snapshot(out_dir / "snapshot_final.txt", result.final_state.t,
                   result.final_state.g, result.config)
    if snapshot_every > 0 and result.states is not None:
        t = result.table["t"]
        for idx in range(0, len(result.states), snapshot_every):
            write_snapshot(out_dir / f"snapshot_{idx:06d}.txt", float(t[idx]),
                           result.states[idx], result.config)


def cmd_run(args) -> int:
    config = parse_config(args.config)
    if args.out_dir is not None:
        config = dataclasses.replace(config, out_dir=args.out_dir)
    out_dir = Path(config.out_dir)
    collect = args.snapshot_every > 0
    try:
        result = run(config, collect_states=collect)
    except BlowUpError as err:
        if err.result is not None:
            _write_run_outputs(err.result, out_dir, args.snapshot_every)
        print(f"blow-up signalled near t = {err.t:.6g} (max |g| = {err.max_abs:.3e}); "
              f"partial records written to {out_dir}", file=sys.stderr)
        return EXIT_BLOWUP
    _write_run_outputs(result, out_dir, args.snapshot_every)
    tbl = result.table
    print(f"run complete: t in [0, {tbl['t'][-1]:.6g}], {len(result.records)} records "
          f"-> {out_dir / 'records.csv'}")
    print(f"l2: {tbl['l2'][0]:.6e} -> {tbl['l2'][-1]:.6e}; "
          f"budget residual R(T) = {result.budget_residual[-1]:.3e}")
    return EXIT_OK


def cmd_threshold(args) -> int:
    config = parse_config(args.config)
    report = compute_threshold_m(config.u0, config.domain)
    write_threshold(args.out, report)
    print(f"chi = {report.chi:.6g}, m = {report.m:.6g}, ||u0|| = {report.u0_norm:.6g}, "
          f"admissible = {report.admissible} -> {args.out}")
    return EXIT_OK


def cmd_verify_inequalities(args) -> int:
    domain = DomainSpec(L=args.L, B=args.B)
    family = TestFunctionFamily(domain=domain, band_x=args.band, band_y=args.band,
                                seed=args.seed)
    margins = run_inequality_suite(family, args.samples)
    report_path = Path(args.report)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    write_margins_csv(report_path, margins)
    from .plots import margins_figure
    margins_figure(margins, report_path.with_name(report_path.stem + "_margins.png"))
    worst = min(float(margins[k].min()) for k in ("l4", "l8", "sup", "steklov"))
    print(f"samples={args.samples} worst_margin={worst:.3e} floor={MARGIN_FLOOR:g}")
    print(f"violations={margins['violations']}")
    return EXIT_OK if margins["violations"] == 0 else EXIT_CHECK_FAILED


def cmd_decay_report(args) -> int:
    table = read_records_csv(args.records)
    threshold = read_threshold(args.threshold)
    report = decay_report(table, threshold, tol=args.tol)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    text = format_report(report)
    out.write_text(text)
    write_decay_fits_csv(out.with_name(out.stem + "_fits.csv"), report)
    from .plots import decay_figure, residual_figure
    decay_figure(table, report, out.with_name(out.stem + "_decay.png"))
    residual_figure(table, out.with_name(out.stem + "_residuals.png"))
    print(text, end="")
    if report.no_guarantee:
        return EXIT_OK
    return EXIT_OK if report.n_passed == report.n_total else EXIT_CHECK_FAILED


def convergence_study(base: RunConfig, levels: int) -> dict:
    """Run (M, dt), (2M, dt/2), ... against the manufactured solution.

    Returns per-level grids, max errors at the final time, windowless max
    |r_l2|, and the observed orders between consecutive levels.
    """
    if levels < 3:
        raise ConfigError(f"convergence study needs at least 3 levels, got {levels}")
    if base.forcing != "manufactured":
        raise ConfigError("convergence study requires forcing = manufactured")
    hs, errors, residuals = [], [], []
    for lvl in range(levels):
        grid = base.grid
        scaled = GridSpec(N=grid.N, M=grid.M * 2 ** lvl, K=grid.K,
                          dt=grid.dt / 2 ** lvl, T=grid.T)
        config = dataclasses.replace(base, grid=scaled)
        result = run(config)
        solver = GalerkinSolver(config)
        exact = solver.forcing.values(solver.x, solver.basis.y, scaled.T)
        numeric = solver.basis.synthesize(result.final_state.g)
        errors.append(float(np.abs(numeric - exact).max()))
        residuals.append(float(np.nanmax(np.abs(result.table["r_l2"]))))
        hs.append(base.domain.L / scaled.M)
    orders = [float(np.log2(errors[i] / errors[i + 1])) for i in range(levels - 1)]
    res_orders = [float(np.log2(residuals[i] / residuals[i + 1])) for i in range(levels - 1)]
    return {"h": hs, "error": errors, "r_l2_max": residuals,
            "order": orders, "r_l2_order": res_orders}


def cmd_convergence(args) -> int:
    base = parse_config(args.config)
    study = convergence_study(base, args.levels)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["level,h,max_error,order,r_l2_max,r_l2_order"]
    for i in range(len(study["h"])):
        order = f"{study['order'][i - 1]:.3f}" if i > 0 else ""
        rorder = f"{study['r_l2_order'][i - 1]:.3f}" if i > 0 else ""
        lines.append(f"{i},{study['h'][i]:.10g},{study['error'][i]:.10e},{order},"
                     f"{study['r_l2_max'][i]:.10e},{rorder}")
    out.write_text("\n".join(lines) + "\n")
    from .plots import convergence_figure
    convergence_figure(study["h"], study["error"], study["r_l2_max"],
                       out.with_name(out.stem + ".png"))
    print("\n".join(lines))
    print(f"observed orders: {['%.2f' % o for o in study['order']]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zk2d",
                                     description="spectral-Galerkin solver and verification harness")
    parser.add_argument("--version", action="version", version=f"zk2d {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="advance a configured simulation and write records")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None, help="override out_dir from the config")
    p.add_argument("--snapshot-every", type=int, default=0,
                   help="also dump every k-th recorded state (0 = final only)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify-inequalities", help="randomized margins of the functional inequalities")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--band", type=int, default=6, metavar="N")
    p.add_argument("--report", required=True, help="margins CSV output path")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.set_defaults(func=cmd_verify_inequalities)

    p = sub.add_parser("decay-report", help="fit decay rates and check chi-envelopes")
    p.add_argument("--records", required=True)
    p.add_argument("--threshold", required=True, help="threshold JSON from the threshold subcommand")
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--out", required=True, help="report text output path")
    p.set_defaults(func=cmd_decay_report)

    p = sub.add_parser("convergence", help="manufactured-solution refinement study")
    p.add_argument("--config", required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out", required=True, help="order table CSV output path")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("threshold", help="smallness threshold and admissibility of the configured datum")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="threshold JSON output path")
    p.set_defaults(func=cmd_threshold)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as err:
        print(f"solver blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except FileNotFoundError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
