"""Command-line front end.

Subcommands: threshold, check-ppositive, optimize, region, trajectory,
simulate, binomial.  Structured inputs and outputs are JSON, grids and
traces are CSV, and every report path renders a matplotlib figure next to
its CSV unless --no-plot is given.  Exit codes: 0 success, 2 bad input,
3 computation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ensemble import (
    RegularEnsemble,
    as_check_regular,
    binomial_ensemble,
    design_rate,
    load_ensemble,
    save_ensemble,
)
from .errors import (
    ComputationError,
    InputError,
    NotPPositive,
    NumericallyIndeterminate,
)
from .optimize import (
    analytic_optimize,
    de_optimize,
    load_spec,
    permitted_region,
    trajectory,
    write_p_curve_csv,
    write_region_csv,
    write_trace_csv,
    write_trajectory_csv,
)
from .ppositive import (
    NEGATIVE_TOL,
    build_p_polynomial,
    capacity_gap,
    certify_positivity,
    closed_form_threshold,
    fourier_budan_sign_changes,
)
from .simulate import waterfall, write_waterfall_csv, write_waterfall_metadata
from .threshold import (
    DeRecursionConfig,
    analytic_threshold,
    de_threshold,
    regular_threshold,
)


def _add_ensemble_source(parser: argparse.ArgumentParser, with_regular: bool = True) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--ensemble", metavar="PATH", help="ensemble JSON file")
    group.add_argument("--binomial", nargs=2, type=int, metavar=("DC", "L"),
                       help="generate the binomial ensemble for (d_c, L)")
    if with_regular:
        group.add_argument("--regular", nargs=2, type=int, metavar=("DV", "DC"),
                           help="(d_v, d_c)-regular code")


def _resolve_ensemble(args):
    """Returns (check_regular_ensemble, regular_or_none)."""
    if getattr(args, "ensemble", None):
        return load_ensemble(args.ensemble), None
    if getattr(args, "binomial", None):
        return binomial_ensemble(*args.binomial), None
    reg = RegularEnsemble(*args.regular)
    return as_check_regular(reg), reg


def _recursion_config(args) -> DeRecursionConfig:
    return DeRecursionConfig(
        max_iterations=args.max_iterations,
        convergence_epsilon=args.convergence_epsilon,
        stall_epsilon=args.stall_epsilon,
        bisection_tolerance=args.bisection_tolerance,
    )


def _report_dict(report) -> dict:
    return {
        "delta_star": report.delta_star,
        "method": report.method.value,
        "gamma": report.gamma,
        "fixed_points": [[g, h] for g, h in report.fixed_points],
    }


def cmd_threshold(args) -> int:
    ens, reg = _resolve_ensemble(args)
    config = _recursion_config(args)
    wanted = ["de", "analytic", "closed"] if args.method == "all" else [args.method]
    reports = {}
    skipped = {}
    for method in wanted:
        if method == "de":
            reports["de"] = de_threshold(ens, config)
        elif method == "analytic":
            reports["analytic"] = analytic_threshold(ens)
        elif method == "closed":
            try:
                if reg is not None and reg.d_v >= 3:
                    reports["closed"] = regular_threshold(reg)
                else:
                    reports["closed"] = closed_form_threshold(ens)
            except NotPPositive as exc:
                if args.method == "closed":
                    raise
                skipped["closed"] = str(exc)
    for name, report in reports.items():
        line = f"{name}: delta_star={report.delta_star:.8f}"
        if report.gamma is not None:
            line += f" gamma={report.gamma:.8f}"
        print(line)
        if name == "analytic":
            for g, h in report.fixed_points:
                h_text = f"{h:.8f}" if h != float("inf") else "inf"
                print(f"    fixed point gamma={g:.8f} h={h_text}")
    for name, why in skipped.items():
        print(f"{name}: not applicable ({why})")
    if len(reports) > 1:
        values = [r.delta_star for r in reports.values()]
        spread = max(values) - min(values)
        print(f"max pairwise deviation: {spread:.3e}")
    if args.json:
        payload = {name: _report_dict(r) for name, r in reports.items()}
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_check_ppositive(args) -> int:
    ens, _ = _resolve_ensemble(args)
    p = build_p_polynomial(ens)
    signs = fourier_budan_sign_changes(p)
    print("p coefficients (ascending):")
    print("  " + " ".join(f"{c:.6g}" for c in p.coeffs))
    print(f"sign changes: A={signs.A} B={signs.B} parity_ok={signs.parity_ok}")
    try:
        cert = certify_positivity(p, negative_tol=args.tolerance)
    except NumericallyIndeterminate as exc:
        print(f"certification indeterminate: {exc}", file=sys.stderr)
        print("rerun with a looser --tolerance to force a sign decision", file=sys.stderr)
        return 3
    payload = {
        "p_coefficients": list(p.coeffs),
        "A": signs.A,
        "B": signs.B,
        "parity_ok": signs.parity_ok,
        "is_p_positive": cert.is_p_positive,
    }
    if cert.is_p_positive:
        report = closed_form_threshold(ens, cert)
        print("certified p-positive: yes")
        print(f"closed-form threshold: delta_star={report.delta_star:.8f}")
        payload["delta_star"] = report.delta_star
    else:
        print("certified p-positive: no")
        print(f"witness: p({cert.witness:.8f}) = {p(cert.witness):.6e}")
        payload["witness"] = cert.witness
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_optimize(args) -> int:
    spec = load_spec(args.spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if spec.mode == "de":
        result = de_optimize(spec)
        write_trace_csv(result, out_dir / "trace.csv")
        if not args.no_plot:
            from .plots import save_trace_figure
            save_trace_figure(result, out_dir / "trace.png")
    else:
        result = analytic_optimize(spec)
        points = trajectory(spec)
        write_trajectory_csv(points, out_dir / "trajectory.csv")
        if not args.no_plot:
            from .plots import save_trajectory_figure
            save_trajectory_figure(points, out_dir / "trajectory.png",
                                   region=permitted_region(spec, resolution=200))
    save_ensemble(result.ensemble, out_dir / "ensemble.json")
    print(f"delta_star={result.report.delta_star:.6f} epsilon_opt={result.epsilon_opt:.6f} "
          f"rate={design_rate(result.ensemble):.6f}")
    if result.crossing:
        print(f"feasible crossing: x_bar in [{result.crossing[0]:.6f}, {result.crossing[1]:.6f}]")
    print(f"wrote {out_dir / 'ensemble.json'}")
    return 0


def cmd_region(args) -> int:
    spec = load_spec(args.spec)
    region = permitted_region(spec, resolution=args.resolution)
    write_region_csv(region, args.out)
    if not args.no_plot:
        from .plots import save_region_figure
        save_region_figure(region, Path(args.out).with_suffix(".png"))
    if region.is_empty:
        print("permitted region is empty", file=sys.stderr)
        return 3
    print(f"epsilon_min={region.eps_min:.6f}; wrote {args.out}")
    return 0


def cmd_trajectory(args) -> int:
    spec = load_spec(args.spec)
    points = trajectory(spec)
    write_trajectory_csv(points, args.out)
    if not args.no_plot:
        from .plots import save_trajectory_figure
        save_trajectory_figure(points, Path(args.out).with_suffix(".png"),
                               region=permitted_region(spec, resolution=200))
    feasible = [p for p in points if p.feasible]
    if feasible:
        print(f"feasible crossing: x_bar in [{feasible[0].x_bar:.6f}, {feasible[-1].x_bar:.6f}]")
    else:
        print("no feasible trajectory points")
    if args.p_out:
        result = analytic_optimize(spec)
        write_p_curve_csv(result.ensemble, args.p_out)
        if not args.no_plot:
            from .plots import save_p_curve_figure
            save_p_curve_figure(result.ensemble, Path(args.p_out).with_suffix(".png"))
        print(f"optimal ensemble p-curve written to {args.p_out}")
    print(f"wrote {args.out}")
    return 0


def cmd_simulate(args) -> int:
    ens, _ = _resolve_ensemble(args)
    deltas = [float(tok) for tok in args.deltas.split(",") if tok.strip()]
    if not deltas:
        raise InputError("no delta values given")
    analytic = analytic_threshold(ens)
    result = waterfall(ens, n=args.n, deltas=deltas, trials=args.trials, seed=args.seed)
    write_waterfall_csv(result, args.out)
    write_waterfall_metadata(result, ens, str(args.out) + ".meta.json")
    if not args.no_plot:
        from .plots import save_waterfall_figure
        save_waterfall_figure(result, Path(args.out).with_suffix(".png"),
                              threshold=analytic.delta_star)
    print(f"analytic threshold delta_star={analytic.delta_star:.6f}")
    for d, ber, blk in zip(result.deltas, result.mean_ber, result.block_failure_rate):
        print(f"delta={d:.4f} mean_ber={ber:.6g} block_failure_rate={blk:.6g}")
    print(f"wrote {args.out}")
    return 0


def cmd_binomial(args) -> int:
    ens = binomial_ensemble(args.d_c, args.max_degree)
    save_ensemble(ens, args.out)
    report = closed_form_threshold(ens)
    eps = capacity_gap(ens, report.delta_star)
    print(f"lambda coefficients: {ens.to_json_dict()['lambda']}")
    print(f"rate={design_rate(ens):.6f} delta_star={report.delta_star:.8f} "
          f"capacity_gap={eps:.6f}")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="becthresh",
        description="BEC decoding thresholds and degree-distribution optimization "
                    "for check-regular LDPC ensembles")
    sub = parser.add_subparsers(dest="command", required=True)

    p_thr = sub.add_parser("threshold", help="compute the decoding threshold")
    _add_ensemble_source(p_thr)
    p_thr.add_argument("--method", choices=["de", "analytic", "closed", "all"],
                       default="all")
    p_thr.add_argument("--json", metavar="PATH", help="write the reports as JSON")
    p_thr.add_argument("--max-iterations", type=int, default=20000)
    p_thr.add_argument("--convergence-epsilon", type=float, default=1e-10)
    p_thr.add_argument("--stall-epsilon", type=float, default=1e-12)
    p_thr.add_argument("--bisection-tolerance", type=float, default=1e-8)
    p_thr.set_defaults(func=cmd_threshold)

    p_chk = sub.add_parser("check-ppositive", help="certify p(x) >= 0 on (0, 1]")
    _add_ensemble_source(p_chk)
    p_chk.add_argument("--tolerance", type=float, default=NEGATIVE_TOL,
                       help="values above -tolerance count as nonnegative")
    p_chk.add_argument("--json", metavar="PATH")
    p_chk.set_defaults(func=cmd_check_ppositive)

    p_opt = sub.add_parser("optimize", help="optimize a degree distribution")
    p_opt.add_argument("--spec", required=True, metavar="PATH")
    p_opt.add_argument("--out-dir", required=True, metavar="DIR")
    p_opt.add_argument("--no-plot", action="store_true")
    p_opt.set_defaults(func=cmd_optimize)

    p_reg = sub.add_parser("region", help="permitted-region grid for a 4-term family")
    p_reg.add_argument("--spec", required=True, metavar="PATH")
    p_reg.add_argument("--out", required=True, metavar="CSV")
    p_reg.add_argument("--resolution", type=int, default=200)
    p_reg.add_argument("--no-plot", action="store_true")
    p_reg.set_defaults(func=cmd_region)

    p_trj = sub.add_parser("trajectory", help="double-root trajectory for a 4-term family")
    p_trj.add_argument("--spec", required=True, metavar="PATH")
    p_trj.add_argument("--out", required=True, metavar="CSV")
    p_trj.add_argument("--p-out", metavar="CSV",
                       help="also write (x, p(x)) for the optimal ensemble")
    p_trj.add_argument("--no-plot", action="store_true")
    p_trj.set_defaults(func=cmd_trajectory)

    p_sim = sub.add_parser("simulate", help="finite-length Monte Carlo waterfall")
    _add_ensemble_source(p_sim)
    p_sim.add_argument("--n", type=int, required=True, help="block length")
    p_sim.add_argument("--deltas", required=True,
                       help="comma-separated erasure probabilities")
    p_sim.add_argument("--trials", type=int, default=50)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, metavar="CSV")
    p_sim.add_argument("--no-plot", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    p_bin = sub.add_parser("binomial", help="write a binomial-family ensemble")
    p_bin.add_argument("d_c", type=int)
    p_bin.add_argument("max_degree", type=int)
    p_bin.add_argument("--out", required=True, metavar="PATH")
    p_bin.set_defaults(func=cmd_binomial)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
