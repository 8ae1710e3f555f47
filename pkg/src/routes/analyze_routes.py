from src.config.env import env_config
from src.controllers.analysis_controller import AnalysisController, AnalyzeOptions
from src.models.sensitivity import FitConfig, NiwHyperparams
from src.utils.errors import UsageError
from src.utils.method_registry import SELECTIONS
from src.utils.report_writer import analysis_to_csv, analysis_to_json, emit
from pydantic import ValidationError as PydanticValidationError
import argparse
import sys


def add_fit_arguments(parser: argparse.ArgumentParser):
    fit = parser.add_argument_group("prior fit")
    fit.add_argument("--nu-min", type=float, default=1.05, help="lower end of the nu grid")
    fit.add_argument("--nu-max-factor", type=float, default=50.0, help="upper end of the nu grid as a multiple of m")
    fit.add_argument("--grid-size", type=int, default=400, help="nu grid points")
    fit.add_argument("--no-refine-knee", action="store_true", help="use the grid knee without refinement")
    fit.add_argument("--tol", type=float, default=1e-9, help="objective improvement that stops the alternation")
    fit.add_argument("--max-iter", type=int, default=50, help="maximum alternation passes")


def fit_config_from(args) -> FitConfig:
    try:
        return FitConfig(
            nu_min=args.nu_min,
            nu_max_factor=args.nu_max_factor,
            grid_size=args.grid_size,
            refine_knee=not args.no_refine_knee,
            tol=args.tol,
            max_iter=args.max_iter,
        )
    except PydanticValidationError as e:
        raise UsageError(f"invalid fit options: {e}")


def register(subparsers):
    parser = subparsers.add_parser("analyze", help="E-value intervals per event from unit and benchmark CSVs")
    parser.add_argument("unit_csv", help="CSV with header event_name,y,r,propensity")
    parser.add_argument("benchmark_csv", help="CSV with header event_name,mu_source1,mu_source2")
    parser.add_argument("--level", type=float, default=0.95)
    parser.add_argument("--draws", type=int, default=env_config.DEFAULT_DRAWS)
    parser.add_argument("--seed", type=int, default=env_config.DEFAULT_SEED)
    parser.add_argument("--method", choices=SELECTIONS, default="all")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--delta0", type=float, help="fixed prior location (skips the fit; needs --psi and --nu)")
    parser.add_argument("--psi", type=float, nargs=3, metavar=("P11", "P12", "P22"), help="fixed prior scale entries")
    parser.add_argument("--nu", type=float, help="fixed prior degrees of freedom")
    parser.add_argument("--no-closed-form", action="store_true", help="omit the closed-form interval")
    add_fit_arguments(parser)
    parser.set_defaults(handler=handle_analyze)


def _fixed_hyperparams(args):
    given = [args.delta0 is not None, args.psi is not None, args.nu is not None]
    if not any(given):
        return None
    if not all(given):
        raise UsageError("--delta0, --psi and --nu must be given together")
    p11, p12, p22 = args.psi
    try:
        return NiwHyperparams(delta0=args.delta0, psi=[[p11, p12], [p12, p22]], nu=args.nu)
    except PydanticValidationError as e:
        raise UsageError(f"invalid prior hyperparameters: {e}")


def handle_analyze(args) -> int:
    try:
        options = AnalyzeOptions(
            level=args.level,
            n_draws=args.draws,
            seed=args.seed,
            method=args.method,
            fit=fit_config_from(args),
            hyperparams=_fixed_hyperparams(args),
            closed_form=not args.no_closed_form,
        )
    except PydanticValidationError as e:
        raise UsageError(f"invalid analyze options: {e}")
    report = AnalysisController(options).analyze_files(args.unit_csv, args.benchmark_csv)
    text = analysis_to_csv(report, args.sig_digits) if args.format == "csv" else analysis_to_json(report, args.sig_digits)
    emit(text, args.output, sys.stdout)
    return 0
