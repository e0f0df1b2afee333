"""Command line interface: ``solve``, ``synth``, ``oracle`` and ``check-density``."""

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import forward_oracle as fo
from .config import ProblemConfig, default_config_text, load_config, solve_config, synthetic_plan
from .errors import InvalidInputError, StageError, WeylslError
from .io import read_samples, write_json, write_samples, write_table
from .pipeline import PotentialResult, SolverOptions, synth_samples
from .potentials import catalog, catalog_names
from .weyl_system import density_check


def _auto_int(text):
    return None if text == "auto" else int(text)


def _add_solver_flags(p):
    g = p.add_argument_group("solver", "override the config values; omitted flags keep them")
    g.argument_default = argparse.SUPPRESS
    g.add_argument("--n-unknown-h", type=_auto_int, help="number of h_n coefficients, or 'auto'")
    g.add_argument("--cond-limit", type=float, help="condition-number limit of the truncation rule")
    g.add_argument("--fail-cond", type=float, help="condition number treated as ill-conditioned input")
    g.add_argument("--K", dest="K", type=_auto_int, help="number of eigenvalues in the series, or 'auto'")
    g.add_argument("--N", dest="N", type=int, help="size of the truncated Gelfand-Levitan system")
    g.add_argument("--grid-points", type=int, help="number of x grid points")
    g.add_argument("--spline-degree", type=int, help="degree of the beta_0 spline (3, 5, 7 or 9)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--timings", action="store_true", help="print stage timings to stderr")


def _apply_solver_flags(opts, args):
    names = ("n_unknown_h", "cond_limit", "fail_cond", "K", "N", "grid_points", "spline_degree")
    return replace(opts, **{n: getattr(args, n) for n in names if hasattr(args, n)})


def _add_plan_flags(p):
    p.add_argument("--potential", required=True, choices=catalog_names())
    p.add_argument("--h", type=float, help="left boundary constant (catalog default if omitted)")
    p.add_argument("--H", dest="H", type=float, help="right boundary constant (catalog default if omitted)")
    p.add_argument("--plan", required=True, choices=("two-spectra", "variable-h", "points", "partial"))
    p.add_argument("--count", type=int, help="pairs (two-spectra) or points (points)")
    p.add_argument("--offset", type=float, help="points plan: z_n = (offset + n step + i imag)^2")
    p.add_argument("--step", type=float)
    p.add_argument("--imag", type=float)
    p.add_argument("--include-zero", action="store_true", help="points plan: add z = 0")
    p.add_argument("--h-values", type=float, nargs="+", help="variable-h plan boundary constants")
    p.add_argument("--per-spectrum", type=int, help="variable-h plan: eigenvalues per spectrum")
    p.add_argument("--a", type=float, help="partial plan: end of the known part")
    p.add_argument("--indices", type=int, nargs="+", help="partial plan: eigenvalue indices used")
    p.add_argument("--h-ref", type=float, help="reference constant for m to M conversion")


def _plan_section(args):
    sec = {"potential": args.potential, "plan": args.plan}
    if args.h is not None:
        sec["h"] = args.h
    if args.H is not None:
        sec["H"] = args.H
    for key in ("count", "offset", "step", "imag", "h_values", "per_spectrum", "a", "indices", "h_ref"):
        v = getattr(args, key)
        if v is not None:
            sec[key] = v
    if args.include_zero:
        sec["include_zero"] = True
    return sec


def build_parser():
    parser = argparse.ArgumentParser(
        "weylsl",
        description="Recover a Sturm-Liouville potential and boundary constants from Weyl-function samples.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the problem described by a TOML config file")
    p.add_argument("config", type=Path, nargs="?", help="problem file (TOML)")
    p.add_argument("--template", action="store_true", help="print a commented config template and exit")
    _add_solver_flags(p)

    p = sub.add_parser("synth", help="oracle samples for a catalog potential, then solve and report errors")
    _add_plan_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("oracle", help="emit oracle samples (and optionally eigendata) only")
    _add_plan_flags(p)
    p.add_argument("--eigen", type=int, metavar="COUNT", help="also write COUNT eigenvalues and norming constants")
    p.add_argument("--out", type=Path, default=Path("weylsl-out"), help="output directory")

    p = sub.add_parser("check-density", help="advisory density report for a sample file")
    p.add_argument("samples", type=Path)
    return parser


def write_result(out, result: PotentialResult, report=None, error=None, timings=False):
    out.mkdir(parents=True, exist_ok=True)
    if result is not None:
        write_table(out / "q.csv", ("x", "q"), (result.x, result.q),
                    comments=(f"h = {result.h:.15g}", f"H = {result.H:.15g}"))
        sd = result.spectral
        write_table(out / "spectral.csv", ("lambda", "alpha"), (sd.lambdas, sd.alphas),
                    comments=(f"omega = {sd.omega:.15g}", f"omega2 = {sd.omega2:.15g}",
                              f"shift = {result.diagnostics.get('shift', 0.0):.15g}"))
        record = {"h": result.h, "H": result.H, "diagnostics": result.diagnostics}
    else:
        record = {}
    if report is not None:
        record["errors"] = report
    if error is not None:
        record["failure"] = error
    write_json(out / "diagnostics.json", record)
    if timings and result is not None:
        print(json.dumps({k: round(v, 3) for k, v in result.timings.items()}), file=sys.stderr)


def _run(cfg, args, samples_out=False):
    out = Path(args.out) if args.out else Path(cfg.output_dir)
    try:
        samples, result, report = solve_config(cfg)
    except StageError as exc:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "diagnostics.json",
                   {"failure": {"stage": exc.stage, "error": str(exc.cause)}, "diagnostics": exc.diagnostics})
        print(f"weylsl: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
        return 1
    write_result(out, result, report, timings=args.timings)
    if samples_out:
        write_samples(out / "samples.csv", samples)
    line = f"h = {result.h:.15g}  H = {result.H:.15g}"
    if report:
        line += "  " + "  ".join(f"{k} = {v:.3g}" for k, v in report.items())
    print(line)
    return 0


def _cmd_solve(args):
    if args.template:
        sys.stdout.write(default_config_text())
        return 0
    if args.config is None:
        raise InvalidInputError("a config file is required (or --template)")
    cfg = load_config(args.config)
    cfg.solver = _apply_solver_flags(cfg.solver, args).validate()
    return _run(cfg, args)


def _cmd_synth(args):
    cfg = ProblemConfig("synthetic", synthetic=_plan_section(args))
    cfg.solver = _apply_solver_flags(SolverOptions(), args)
    cfg.validate()
    return _run(cfg, args, samples_out=True)


def _cmd_oracle(args):
    sec = _plan_section(args)
    spec = catalog(args.potential, sec.get("h"), sec.get("H"))
    samples, rec, _ = synth_samples(spec, synthetic_plan(sec))
    args.out.mkdir(parents=True, exist_ok=True)
    comments = [f"potential {spec.label} h={spec.h:.15g} H={spec.H:.15g} plan {args.plan}"]
    if rec is not None:
        comments.append(f"rescaled from [{rec.a:.15g}, pi]")
    write_samples(args.out / "samples.csv", samples, comments)
    if args.eigen:
        data = fo.oracle_eigen_data(spec, args.eigen)
        write_table(args.out / "eigen.csv", ("lambda", "alpha"), (data.lambdas, data.alphas),
                    comments=(f"omega = {data.omega:.15g}", f"omega2 = {data.omega2:.15g}"))
    print(f"wrote {len(samples)} samples to {args.out / 'samples.csv'}")
    return 0


def _cmd_density(args):
    samples = read_samples(args.samples)
    if any(s.z.imag != 0 for s in samples):
        raise InvalidInputError("density check needs real sample points")
    rep = density_check(samples)
    print(f"samples: {len(samples)}")
    print(f"empirical rule rho_k < k/2 + 1: {'satisfied' if rep.rule_satisfied else 'violated'}"
          f" ({int(np.sum(rep.rule_violations))} points)")
    slope = "-inf" if math.isinf(rep.tail_slope) else f"{rep.tail_slope:.3g}"
    print(f"summability of (z_k - k^2/4)_+/k^2: tail slope {slope},"
          f" {'satisfied' if rep.condition_satisfied else 'FLAGGED'}")
    return 0


COMMANDS = {"solve": _cmd_solve, "synth": _cmd_synth, "oracle": _cmd_oracle, "check-density": _cmd_density}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (WeylslError, OSError) as exc:
        print(f"weylsl: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
