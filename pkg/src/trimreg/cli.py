"""Command-line interface for the benchmark harness and bound curves.

Subcommands
-----------
run-setup-a   Gaussian-design benchmark over a contamination grid.
run-setup-b   Bernoulli-masked-design benchmark over a contamination grid.
compare-algs  The fixed algorithm-comparison grid (n in {120, 360},
              eps in {0.05, 0.2}, four error distributions).
bounds        Emit CSV curves of the closed-form constants and bounds.

Any subcommand accepts ``@FILE`` arguments: a flat config file with one
``key = value`` line per option, mirroring the long flags ('#' starts a
comment). Command-line flags given after the file override its values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import bounds as bnd
from .harness import (
    DEFAULT_EPS_GRID,
    METHODS,
    ExperimentConfig,
    delta_percent,
    emit,
    run_experiment,
    summarize,
    table_grid_configs,
)
from .regression import GdConfig
from .synthdata import ErrorDist


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reads 'key = value' lines from @FILE arguments."""

    def convert_arg_line_to_args(self, line: str) -> List[str]:
        line = line.split("#", 1)[0].strip()
        if not line:
            return []
        if "=" in line:
            key, value = line.split("=", 1)
        else:
            parts = line.split(None, 1)
            key, value = parts[0], parts[1] if len(parts) > 1 else ""
        key = key.strip().lstrip("-").replace("_", "-")
        value = value.strip()
        return ["--" + key] if value == "" else ["--" + key, value]


def _parse_eps_grid(text: str):
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eps grid {text!r}: {exc}")
    if not values:
        raise argparse.ArgumentTypeError("eps grid must be nonempty")
    return values


def _parse_methods(text: str):
    names = tuple(tok.strip() for tok in text.split(",") if tok.strip() != "")
    unknown = [m for m in names if m not in METHODS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown methods {unknown}; choose from {', '.join(METHODS)}"
        )
    return names


def _parse_profile(text: str):
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            p, v = tok.split(":")
            pairs.append((float(p), float(v)))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad moment entry {tok!r}: {exc}")
    if not pairs:
        raise argparse.ArgumentTypeError("moment profile must be nonempty")
    return bnd.MomentProfile(tuple(pairs))


def _add_common_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, required=True, help="sample size per trial")
    sub.add_argument("--d", type=int, default=20, help="covariate dimension")
    sub.add_argument(
        "--eps-grid",
        type=_parse_eps_grid,
        default=DEFAULT_EPS_GRID,
        help="comma-separated contamination levels in [0, 0.5) "
        "(default: 0,0.025,0.05,0.075,0.1,0.2,0.3,0.4)",
    )
    sub.add_argument(
        "--methods",
        type=_parse_methods,
        default=METHODS,
        help=f"comma-separated subset of: {', '.join(METHODS)}",
    )
    sub.add_argument("--trials", type=int, default=240, help="trials per cell")
    sub.add_argument("--seed", type=int, default=0, help="base seed")
    sub.add_argument(
        "--trim-extra",
        type=int,
        default=5,
        help="trimming rule k = floor(eps*n) + TRIM_EXTRA",
    )
    sub.add_argument(
        "--mom-blocks",
        type=int,
        default=None,
        help="bucket count for the plain MoM method "
        "(default: min(n, 2*floor(eps*n) + 5))",
    )
    sub.add_argument("--max-iters", type=int, default=1000, help="descent iterations")
    sub.add_argument("--tol", type=float, default=1e-4, help="descent stop tolerance")
    sub.add_argument(
        "--plugin-iters", type=int, default=2, help="plug-in refit iterations"
    )
    sub.add_argument(
        "--init",
        choices=("random", "zeros"),
        default="random",
        help="iterate initialization: seeded random pair or the zero pair",
    )
    sub.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="trimreg",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        fromfile_prefix_chars="@",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub_a = subs.add_parser(
        "run-setup-a",
        help="Gaussian AR(1) design with planted outlier rows",
        fromfile_prefix_chars="@",
    )
    sub_a.convert_arg_line_to_args = parser.convert_arg_line_to_args
    _add_common_run_flags(sub_a)
    sub_a.add_argument("--rho", type=float, default=0.0, help="AR(1) correlation")
    sub_a.add_argument(
        "--error",
        choices=("normal", "t1", "t2", "t4"),
        default="normal",
        help="noise distribution",
    )
    sub_a.add_argument(
        "--outlier-y",
        type=float,
        default=10000.0,
        help="planted response value of contaminated rows",
    )

    sub_b = subs.add_parser(
        "run-setup-b",
        help="Bernoulli-masked isotropic design (missing-data caricature)",
        fromfile_prefix_chars="@",
    )
    sub_b.convert_arg_line_to_args = parser.convert_arg_line_to_args
    _add_common_run_flags(sub_b)
    sub_b.add_argument("--p", type=float, default=0.3, help="mask rate in (0, 1]")

    sub_c = subs.add_parser(
        "compare-algs",
        help="fixed grid comparing the two trimmed-mean heuristics",
        fromfile_prefix_chars="@",
    )
    sub_c.convert_arg_line_to_args = parser.convert_arg_line_to_args
    sub_c.add_argument("--trials", type=int, default=240)
    sub_c.add_argument("--seed", type=int, default=0)
    sub_c.add_argument("--workers", type=int, default=1)
    sub_c.add_argument("--out", required=True)
    sub_c.add_argument("--format", choices=("csv", "json"), default="csv")

    sub_d = subs.add_parser(
        "bounds",
        help="emit closed-form constant and bound curves as CSV",
        description=(
            "Writes four CSV files into --out:\n"
            "  c_epsilon_curve.csv      columns eps,c_epsilon\n"
            "  c_j_epsilon_curve.csv    columns eps,c_j_epsilon "
            "(single unbounded family, default per-family share)\n"
            "  phi_p_uniform_slice.csv  columns n,phi_p_uniform at fixed "
            "(--slice-eps, --slice-alpha, --slice-emp, --slice-nu)\n"
            "  phi_p_regression_slice.csv  columns n,r_q,r_m_bound,"
            "phi_p_regression using the closed-form linear radii at the "
            "default deltas for --theta0"
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
        fromfile_prefix_chars="@",
    )
    sub_d.convert_arg_line_to_args = parser.convert_arg_line_to_args
    sub_d.add_argument("--out", required=True)
    sub_d.add_argument(
        "--eps-step", type=float, default=0.005, help="grid step over [0, 0.5)"
    )
    sub_d.add_argument("--slice-eps", type=float, default=0.05)
    sub_d.add_argument("--slice-alpha", type=float, default=0.05)
    sub_d.add_argument("--slice-emp", type=float, default=0.0)
    sub_d.add_argument(
        "--slice-nu",
        type=_parse_profile,
        default=bnd.MomentProfile(((2.0, 1.0),)),
        help="moment profile as p:value pairs, e.g. '2:1,4:1.5'",
    )
    sub_d.add_argument("--theta0", type=float, default=1.0)
    sub_d.add_argument("--trace-sigma", type=float, default=20.0)
    sub_d.add_argument("--sigma-noise", type=float, default=1.0)
    sub_d.add_argument(
        "--n-max", type=int, default=1000000, help="largest n in the slices"
    )
    return parser


def _config_metadata(config: ExperimentConfig) -> dict:
    return {
        "setup": config.setup,
        "n": config.n,
        "d": config.d,
        "rho_or_p": config.rho_or_p,
        "error_dist": config.error_dist.label,
        "eps_grid": list(config.eps_grid),
        "methods": list(config.methods),
        "trials": config.trials,
        "base_seed": config.base_seed,
        "trim_rule": f"k = floor(eps*n) + {config.trim_extra}",
        "initializer": config.init_rule,
        "plugin_iters": config.plugin_iters,
        "descent": {
            "tol_delta": config.gd.tol_delta,
            "theta": config.gd.theta,
            "max_iters": config.gd.max_iters,
        },
        "notes": [
            "Best-MoM is an infeasible oracle baseline: it selects the bucket "
            "count using the true coefficients and population covariance.",
            "workers affect scheduling only; output is identical at any "
            "parallelism degree",
        ],
    }


def _write_metadata(path: str, meta: dict) -> str:
    target = os.path.join(path, "metadata.json")
    with open(target, "w", encoding="ascii", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return target


def _run_and_emit(config: ExperimentConfig, args) -> int:
    records = run_experiment(config, workers=args.workers)
    stats = summarize(records)
    written = emit(records, stats, args.out, args.format)
    written.append(_write_metadata(args.out, _config_metadata(config)))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_run_setup_a(args) -> int:
    config = ExperimentConfig(
        setup="A",
        n=args.n,
        d=args.d,
        rho=args.rho,
        error_dist=ErrorDist.from_label(args.error),
        eps_grid=args.eps_grid,
        methods=args.methods,
        trials=args.trials,
        base_seed=args.seed,
        trim_extra=args.trim_extra,
        mom_blocks=args.mom_blocks,
        outlier_response=args.outlier_y,
        gd=GdConfig(tol_delta=args.tol, max_iters=args.max_iters),
        plugin_iters=args.plugin_iters,
        init_rule=args.init,
    )
    return _run_and_emit(config, args)


def _cmd_run_setup_b(args) -> int:
    config = ExperimentConfig(
        setup="B",
        n=args.n,
        d=args.d,
        p=args.p,
        eps_grid=args.eps_grid,
        methods=args.methods,
        trials=args.trials,
        base_seed=args.seed,
        trim_extra=args.trim_extra,
        mom_blocks=args.mom_blocks,
        gd=GdConfig(tol_delta=args.tol, max_iters=args.max_iters),
        plugin_iters=args.plugin_iters,
        init_rule=args.init,
    )
    return _run_and_emit(config, args)


def _cmd_compare_algs(args) -> int:
    all_records = []
    for config in table_grid_configs(trials=args.trials, base_seed=args.seed):
        all_records.extend(run_experiment(config, workers=args.workers))
    all_records.sort(key=lambda r: r.sort_key)
    stats = summarize(all_records)
    written = emit(all_records, stats, args.out, args.format)

    lines = [
        "n,eps,error_dist,aasd_mean,aasd_std,plugin_mean,plugin_std,"
        "delta_mean_pct,delta_std_pct"
    ]
    cells = sorted({k[:-1] for k in stats})
    for cell in cells:
        aasd_stats = stats[cell + ("TM-AASD",)]
        plug_stats = stats[cell + ("TM-PlugIn",)]
        _, n, _, _, eps, error = cell
        lines.append(
            ",".join(
                [
                    str(n),
                    "%.17g" % eps,
                    error,
                    "%.17g" % aasd_stats.mean,
                    "%.17g" % aasd_stats.std,
                    "%.17g" % plug_stats.mean,
                    "%.17g" % plug_stats.std,
                    "%d" % int(delta_percent(aasd_stats.mean, plug_stats.mean)),
                    "%d" % int(delta_percent(aasd_stats.std, plug_stats.std)),
                ]
            )
        )
    comparison = os.path.join(args.out, "comparison.csv")
    with open(comparison, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(comparison)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_bounds(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    written = []

    step = args.eps_step
    if not 0.0 < step < 0.5:
        raise ValueError(f"eps step must lie in (0, 0.5), got {step}")
    eps_grid = [0.0]
    eps = step
    while eps < 0.5 - 1e-12:
        eps_grid.append(round(eps, 12))
        eps += step

    path = os.path.join(args.out, "c_epsilon_curve.csv")
    rows = ["eps,c_epsilon"]
    rows += ["%.17g,%.17g" % (e, bnd.c_epsilon(e)) for e in eps_grid]
    _write_lines(path, rows)
    written.append(path)

    path = os.path.join(args.out, "c_j_epsilon_curve.csv")
    rows = ["eps,c_j_epsilon"]
    rows += [
        "%.17g,%.17g" % (e, c) for e, c in bnd.c_j_epsilon_curve(eps_grid)
    ]
    _write_lines(path, rows)
    written.append(path)

    n_grid = sorted(
        {int(n) for n in np.logspace(1, math.log10(args.n_max), 61).round()}
    )

    path = os.path.join(args.out, "phi_p_uniform_slice.csv")
    rows = ["n,phi_p_uniform"]
    for n in n_grid:
        inputs = bnd.UniformBoundInputs(
            emp=args.slice_emp,
            nu=args.slice_nu,
            n=n,
            eps=args.slice_eps,
            alpha=args.slice_alpha,
        )
        rows.append("%d,%.17g" % (n, bnd.phi_p_uniform(inputs)))
    _write_lines(path, rows)
    written.append(path)

    path = os.path.join(args.out, "phi_p_regression_slice.csv")
    rows = ["n,r_q,r_m_bound,phi_p_regression"]
    for n in n_grid:
        radii = bnd.critical_radii_linear(
            args.trace_sigma,
            args.sigma_noise,
            n,
            bnd.delta_q_default(args.theta0),
            bnd.delta_m_default(args.theta0),
        )
        inputs = bnd.RegressionBoundInputs(
            theta0=args.theta0,
            r_q=radii.r_q,
            r_m=radii.r_m_bound,
            kappa=args.slice_nu,
            n=n,
            eps=args.slice_eps,
            alpha=args.slice_alpha,
        )
        rows.append(
            "%d,%.17g,%.17g,%.17g"
            % (n, radii.r_q, radii.r_m_bound, bnd.phi_p_regression(inputs))
        )
    _write_lines(path, rows)
    written.append(path)

    for p in written:
        print(f"wrote {p}")
    return 0


def _write_lines(path: str, lines: List[str]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_COMMANDS = {
    "run-setup-a": _cmd_run_setup_a,
    "run-setup-b": _cmd_run_setup_b,
    "compare-algs": _cmd_compare_algs,
    "bounds": _cmd_bounds,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
