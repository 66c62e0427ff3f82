"""Command-line interface: simulate, fit, forecast, benchmark.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure.  All behavior flows through flags and config files (no environment
variables), and every command is deterministic given its flags and seeds.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .alse import AlseConfig, fit_alse
from .banded import BandedConfig, fit_banded
from .errors import ConfigError, DataFormatError, MarError
from .evalkit import holdout_forecast_eval, rolling_forecast_eval, run_monte_carlo
from .matcore import BandSpec, MatrixSeries
from .simgen import BandedDesign, NoiseSpec, SparseDesign, gen_banded_coeffs, gen_sparse_coeffs, simulate
from .sparse import SparseConfig, TuningMethod, fit_sparse
from .seriesio import (
    ensure_dir,
    parse_experiment_config,
    read_model,
    read_series,
    write_model,
    write_series,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=int, default=1, help="worker-pool size (default 1)")
    p.add_argument("--output-dir", default=".", help="directory for output files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="marfit", description="Regularized estimation of matrix autoregressive models.")
    parser.add_argument("--version", action="version", version=f"marfit {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_sim = sub.add_parser("simulate", help="simulate a MAR(1) series from a banded or sparse design")
    _common_flags(p_sim)
    p_sim.add_argument("--design", choices=["banded", "sparse"], required=True)
    p_sim.add_argument("--p1", type=int, required=True)
    p_sim.add_argument("--p2", type=int, required=True)
    p_sim.add_argument("--k1", type=int, default=1)
    p_sim.add_argument("--k2", type=int, default=1)
    p_sim.add_argument("--r1", type=float, default=0.3)
    p_sim.add_argument("--r2", type=float, default=0.3)
    p_sim.add_argument("--T", type=int, required=True)
    p_sim.add_argument("--rho", type=float, required=True)
    p_sim.add_argument("--burn-in", type=int, default=200)
    p_sim.add_argument("--series-out", default="series.csv")
    p_sim.add_argument("--truth-out", default="truth.model")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a MAR(1) model to a series file")
    _common_flags(p_fit)
    p_fit.add_argument("series", help="SeriesFile path")
    p_fit.add_argument("--method", choices=["alse", "banded", "lasso"], required=True)
    p_fit.add_argument("--eta", type=float, default=1e-6)
    p_fit.add_argument("--max-iter", type=int, default=200)
    p_fit.add_argument("--order", choices=["A", "B"], default="A")
    p_fit.add_argument("--k1-max", type=int, default=None, help="banded: bandwidth search bound for A")
    p_fit.add_argument("--k2-max", type=int, default=None, help="banded: bandwidth search bound for B")
    p_fit.add_argument("--tuning", choices=["sdcv", "mcv", "ksc", "fixed"], default="ksc")
    p_fit.add_argument("--lambda1", type=float, default=None, help="lasso: fixed penalty for A")
    p_fit.add_argument("--lambda2", type=float, default=None, help="lasso: fixed penalty for B")
    p_fit.add_argument("--cv-folds", type=int, default=10)
    p_fit.add_argument("--ksc-splits", type=int, default=50)
    p_fit.add_argument("--ksc-alpha", type=float, default=0.4)
    p_fit.add_argument("--model-out", default="fit.model")
    p_fit.set_defaults(func=cmd_fit)

    p_fc = sub.add_parser("forecast", help="holdout or rolling one-step forecast evaluation")
    _common_flags(p_fc)
    p_fc.add_argument("series", help="SeriesFile path")
    p_fc.add_argument("model", help="ModelFile path")
    p_fc.add_argument("--mode", choices=["holdout", "rolling"], required=True)
    p_fc.add_argument("--split", type=int, default=None, help="holdout: last training index")
    p_fc.add_argument("--start", type=int, default=None, help="rolling: first forecast origin")
    p_fc.add_argument("--end", type=int, default=None, help="rolling: last forecast origin")
    p_fc.add_argument("--squared", action="store_true", help="use squared Frobenius errors")
    p_fc.add_argument("--elementwise", action="store_true", help="entrywise absolute sums instead of matrix 1-norm")
    p_fc.add_argument("--report-out", default="forecast.csv")
    p_fc.set_defaults(func=cmd_forecast)

    p_bm = sub.add_parser("benchmark", help="run a Monte Carlo experiment from a config file")
    _common_flags(p_bm)
    p_bm.add_argument("config", help="ExperimentConfig path")
    p_bm.set_defaults(func=cmd_benchmark)

    return parser


def _out_path(args, name: str) -> str:
    ensure_dir(args.output_dir)
    return os.path.join(args.output_dir, name)


def cmd_simulate(args) -> None:
    if args.T < 2:
        raise ConfigError(f"--T must be >= 2, got {args.T}")
    rng = np.random.default_rng(args.seed)
    if args.design == "banded":
        design = BandedDesign(args.p1, args.p2, BandSpec(args.k1, args.k2), args.rho)
        truth = gen_banded_coeffs(design, rng)
        design_meta = {"design": "banded", "k1": args.k1, "k2": args.k2}
    else:
        design = SparseDesign(args.p1, args.p2, args.r1, args.r2, args.rho)
        truth = gen_sparse_coeffs(design, rng)
        design_meta = {"design": "sparse", "r1": args.r1, "r2": args.r2}
    series = simulate(truth, NoiseSpec(), args.T, burn_in=args.burn_in, seed=rng)
    series_path = _out_path(args, args.series_out)
    truth_path = _out_path(args, args.truth_out)
    write_series(series_path, series)
    meta = {"estimator": "truth", "rho": args.rho, "T": args.T, "seed": args.seed}
    meta.update(design_meta)
    write_model(truth_path, truth, meta)
    print(f"wrote {series_path} (T={args.T}, p1={args.p1}, p2={args.p2})")
    print(f"wrote {truth_path}")


def _fit_series(series: MatrixSeries, args):
    """Dispatch on --method; returns (coeffs, metadata, report_lines)."""
    meta = {"estimator": args.method, "eta": args.eta, "max_iter": args.max_iter, "seed": args.seed}
    report = [f"method: {args.method}"]
    if args.method == "alse":
        coeffs, trace = fit_alse(series, AlseConfig(eta=args.eta, max_iter=args.max_iter, order=args.order))
        extra: dict = {}
    elif args.method == "banded":
        fit = fit_banded(
            series,
            BandedConfig(
                eta=args.eta, max_iter=args.max_iter, K1_max=args.k1_max, K2_max=args.k2_max, order=args.order
            ),
        )
        coeffs, trace = fit.coeffs, fit.trace
        extra = {"k1": fit.band.k1, "k2": fit.band.k2}
        report.append(f"selected k1: {fit.band.k1}")
        report.append(f"selected k2: {fit.band.k2}")
    else:
        if args.tuning == "fixed" and (args.lambda1 is None or args.lambda2 is None):
            raise ConfigError("--tuning fixed requires --lambda1 and --lambda2")
        tuning = TuningMethod(
            kind=args.tuning,
            cv_folds=args.cv_folds,
            n_splits=args.ksc_splits,
            alpha=args.ksc_alpha,
            lambda_A=args.lambda1,
            lambda_B=args.lambda2,
            seed=args.seed,
        )
        fit = fit_sparse(series, tuning, SparseConfig(eta=args.eta, max_iter=args.max_iter, order=args.order))
        coeffs, trace = fit.coeffs, fit.trace
        extra = {"tuning": args.tuning, "lambda1": format(fit.lambda_A, ".17g"), "lambda2": format(fit.lambda_B, ".17g")}
        report.append(f"tuning: {args.tuning}")
        report.append(f"selected lambda1: {fit.lambda_A:.6g}")
        report.append(f"selected lambda2: {fit.lambda_B:.6g}")
        for side in ("A", "B"):
            diag = fit.tuning_diagnostics.get(side, {})
            if "stability" in diag:
                report.append(f"stability curve {side} (lambda, S):")
                for lam, s in zip(diag["grid"], diag["stability"]):
                    report.append(f"  {lam:.6g} {s:.6g}")
    A, B = coeffs.A, coeffs.B
    report.append(f"iterations: {trace.iterations}")
    report.append(f"converged: {str(trace.converged).lower()}")
    report.append(f"sparsity A: {float(np.mean(A == 0.0)):.6g}")
    report.append(f"sparsity B: {float(np.mean(B == 0.0)):.6g}")
    meta.update(extra)
    meta["iterations"] = trace.iterations
    meta["converged"] = str(trace.converged).lower()
    return coeffs, meta, report


def cmd_fit(args) -> None:
    series = read_series(args.series)
    coeffs, meta, report = _fit_series(series, args)
    model_path = _out_path(args, args.model_out)
    write_model(model_path, coeffs, meta)
    for line in report:
        print(line)
    print(f"wrote {model_path}")


def _fitter_from_metadata(meta: dict, seed: int):
    method = meta.get("estimator")
    eta = float(meta.get("eta", 1e-6))
    max_iter = int(meta.get("max_iter", 200))
    if method == "alse":
        return lambda s: fit_alse(s, AlseConfig(eta=eta, max_iter=max_iter))[0]
    if method == "banded":
        return lambda s: fit_banded(s, BandedConfig(eta=eta, max_iter=max_iter)).coeffs
    if method == "lasso":
        if "lambda1" not in meta or "lambda2" not in meta:
            raise DataFormatError("lasso model file lacks the selected penalties")
        tuning = TuningMethod(
            kind="fixed", lambda_A=float(meta["lambda1"]), lambda_B=float(meta["lambda2"]), seed=seed
        )
        return lambda s: fit_sparse(s, tuning, SparseConfig(eta=eta, max_iter=max_iter)).coeffs
    raise ConfigError(
        f"model file records estimator {method!r}; rolling forecasts need a model fitted by "
        "'marfit fit' (alse, banded, or lasso)"
    )


def cmd_forecast(args) -> None:
    series = read_series(args.series)
    coeffs, meta = read_model(args.model)
    if (coeffs.p1, coeffs.p2) != (series.p1, series.p2):
        raise DataFormatError(
            f"model is ({coeffs.p1}, {coeffs.p2}) but series is ({series.p1}, {series.p2})"
        )
    if args.mode == "holdout":
        if args.split is None:
            raise ConfigError("--mode holdout requires --split")
        if not 2 <= args.split <= series.T_len - 1:
            raise ConfigError(f"--split must be in [2, {series.T_len - 1}], got {args.split}")
        report = holdout_forecast_eval(
            series, args.split, lambda _s: coeffs, squared=args.squared, elementwise=args.elementwise
        )
    else:
        if args.start is None or args.end is None:
            raise ConfigError("--mode rolling requires --start and --end")
        if not 2 <= args.start <= args.end <= series.T_len - 1:
            raise ConfigError(
                f"need 2 <= start <= end <= {series.T_len - 1}, got [{args.start}, {args.end}]"
            )
        fitter = _fitter_from_metadata(meta, args.seed)
        report = rolling_forecast_eval(
            series, args.start, args.end, fitter, squared=args.squared, elementwise=args.elementwise
        )
    out_path = _out_path(args, args.report_out)
    with open(out_path, "w") as fh:
        fh.write("origin,fro_error,one_norm_error\n")
        for t, f, o in zip(report.origins, report.per_step_fro, report.per_step_one):
            fh.write(f"{t},{format(f, '.17g')},{format(o, '.17g')}\n")
        fh.write(f"# pmse={format(report.pmse, '.17g')}\n")
        fh.write(f"# pmae={format(report.pmae, '.17g')}\n")
        fh.write(f"# mse={format(report.mse, '.17g')}\n")
        fh.write(f"# mae={format(report.mae, '.17g')}\n")
    print(f"mode: {report.mode} ({len(report.origins)} origins)")
    print(f"PMSE: {report.pmse:.6g}")
    print(f"PMAE: {report.pmae:.6g}")
    print(f"MSE: {report.mse:.6g}")
    print(f"MAE: {report.mae:.6g}")
    print(f"wrote {out_path}")


def cmd_benchmark(args) -> None:
    spec, n_reps, seed = parse_experiment_config(args.config)
    result = run_monte_carlo(spec, n_reps, seed, threads=args.threads)
    table_path = _out_path(args, f"{spec.table}.csv")
    with open(table_path, "w") as fh:
        fh.write(result.to_delimited())
    manifest_path = _out_path(args, "manifest.txt")
    with open(manifest_path, "w") as fh:
        fh.write(f"marfit version: {__version__}\n")
        fh.write(f"numpy version: {np.__version__}\n")
        fh.write(f"config: {os.path.basename(args.config)}\n")
        fh.write(f"table: {spec.table}\n")
        fh.write(f"n_reps: {n_reps}\n")
        fh.write(f"seed: {seed}\n")
        fh.write(f"threads: {args.threads}\n")
        fh.write(f"replicate failures: {result.failures}\n")
    print(f"wrote {table_path}")
    print(f"wrote {manifest_path}")
    if result.failures:
        print(f"warning: {result.failures} replicate(s) failed; see {manifest_path}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help()
            return 1
        args.func(args)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MarError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
