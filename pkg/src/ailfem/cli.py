import argparse
import logging
from pathlib import Path
from typing import Any

from rich.logging import RichHandler

from ailfem.config import (
    PRESET_CONFIGS,
    PROBLEMS,
    AdaptiveConfig,
    ExperimentConfig,
    ExperimentManifest,
    available_presets,
    preset_overrides,
)
from ailfem.experiment import run_experiment
from ailfem.model.problem import MODELS, model_by_name
from ailfem.parallel import compare_schemes
from ailfem.schemes.base import SCHEME_KINDS, SchemeSpec

DEFAULT_SCHEME = "kacanov"


def _coalesce(*values: Any) -> Any:
    for value in values:
        if value is not None:
            return value
    return None


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=verbose)],
    )


def _build_config_from_base(
    *, args: argparse.Namespace, base: dict[str, Any]
) -> ExperimentConfig:
    spec_defaults = SchemeSpec(DEFAULT_SCHEME)
    scheme = SchemeSpec(
        _coalesce(args.scheme, base.get("scheme"), DEFAULT_SCHEME),
        delta_z=_coalesce(args.delta_z, base.get("delta_z"), spec_defaults.delta_z),
        newton_damping=_coalesce(
            args.newton_damping, base.get("newton_damping"), spec_defaults.newton_damping
        ),
        newton_correction=base.get("newton_correction", spec_defaults.newton_correction)
        and not args.no_newton_correction,
    )
    adaptive = AdaptiveConfig(
        theta=_coalesce(args.theta, base.get("theta"), 0.5),
        lambda_=_coalesce(args.lambda_, base.get("lambda_"), 0.1),
        scheme=scheme,
        max_elements=_coalesce(
            args.max_elements, base.get("max_elements"), AdaptiveConfig.max_elements
        ),
        max_inner_iterations=_coalesce(
            args.max_inner,
            base.get("max_inner_iterations"),
            AdaptiveConfig.max_inner_iterations,
        ),
        solver_rel_tol=_coalesce(
            args.solver_rtol, base.get("solver_rel_tol"), AdaptiveConfig.solver_rel_tol
        ),
    )
    return ExperimentConfig(
        adaptive=adaptive,
        problem=_coalesce(args.problem, base.get("problem"), ExperimentConfig.problem),
        model=_coalesce(args.model, base.get("model"), ExperimentConfig.model),
        out_dir=_coalesce(args.out, base.get("out_dir")),
        plots=not args.no_plots,
        mesh_dump=args.mesh_dump,
        live=not args.no_live,
        seed=_coalesce(args.seed, base.get("seed"), ExperimentConfig.seed),
        preset=_coalesce(args.preset, base.get("preset")),
        reference_budget=_coalesce(
            args.reference_budget,
            base.get("reference_budget"),
            ExperimentConfig.reference_budget,
        ),
        reference_check=base.get("reference_check", ExperimentConfig.reference_check)
        and not args.no_reference_check,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ailfem",
        description="Adaptive iteratively linearized finite element experiments",
    )
    preset_choices = list(available_presets())

    # Experiment selection
    parser.add_argument(
        "--preset",
        choices=preset_choices,
        default=None,
        help="Built-in parameter set to load as base configuration",
    )
    parser.add_argument(
        "--list-experiments",
        action="store_true",
        help="List the built-in parameter sets and exit",
    )
    parser.add_argument(
        "--from-manifest",
        type=Path,
        default=None,
        help="Rerun the experiment recorded in a manifest.json",
    )
    parser.add_argument(
        "--compare",
        action="store_true",
        help="Run all three schemes with shared parameters and merge the results",
    )

    # Scheme
    parser.add_argument(
        "--scheme",
        choices=SCHEME_KINDS,
        default=None,
        help=f"Linearization scheme (default: {DEFAULT_SCHEME})",
    )
    parser.add_argument(
        "--delta-z",
        type=float,
        default=None,
        help=f"Zarantonello step size (default: {SchemeSpec.delta_z})",
    )
    parser.add_argument(
        "--newton-damping",
        type=float,
        default=None,
        help=f"Initial Newton damping in (0, 1] (default: {SchemeSpec.newton_damping})",
    )
    parser.add_argument(
        "--no-newton-correction",
        action="store_true",
        help="Take the damped Newton step without the energy-decrease halvings",
    )

    # Adaptivity
    parser.add_argument(
        "--theta", type=float, default=None, help="Doerfler bulk parameter (default: 0.5)"
    )
    parser.add_argument(
        "--lambda",
        dest="lambda_",
        type=float,
        default=None,
        help="Linearization stopping parameter (default: 0.1)",
    )
    parser.add_argument(
        "--max-elements",
        type=int,
        default=None,
        help=f"Stop once the mesh exceeds this size (default: {AdaptiveConfig.max_elements})",
    )
    parser.add_argument(
        "--max-inner",
        type=int,
        default=None,
        help=(
            "Inner linearization steps per mesh before the run is aborted "
            f"(default: {AdaptiveConfig.max_inner_iterations})"
        ),
    )
    parser.add_argument(
        "--solver-rtol",
        type=float,
        default=None,
        help=f"PCG relative residual tolerance (default: {AdaptiveConfig.solver_rel_tol})",
    )

    # Problem
    parser.add_argument(
        "--problem",
        choices=PROBLEMS,
        default=None,
        help=f"Domain and manufactured solution (default: {ExperimentConfig.problem})",
    )
    parser.add_argument(
        "--model",
        choices=sorted(MODELS),
        default=None,
        help=f"Nonlinearity mu (default: {ExperimentConfig.model})",
    )

    # Output
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Output directory (default: runs/<timestamp>)",
    )
    parser.add_argument("--no-plots", action="store_true", help="Skip the SVG figures")
    parser.add_argument(
        "--mesh-dump", action="store_true", help="Write the final mesh to mesh_final.txt"
    )
    parser.add_argument(
        "--no-live", action="store_true", help="Disable the live dashboard"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Recorded in the manifest; the pipeline is deterministic",
    )
    parser.add_argument(
        "--reference-budget",
        type=int,
        default=None,
        help=(
            "Elements for the reference energy, 0 to skip it "
            f"(default: {ExperimentConfig.reference_budget})"
        ),
    )
    parser.add_argument(
        "--no-reference-check",
        action="store_true",
        help="Skip the extrapolation cross-check of the reference energy",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.list_experiments:
        for name in available_presets():
            values = PRESET_CONFIGS[name]
            print(
                f"{name}: delta_z={values['delta_z']:g} lambda={values['lambda_']:g} "
                f"theta={values['theta']:g}"
            )
        return 0
    if args.from_manifest is not None and args.preset is not None:
        parser.error("--from-manifest and --preset cannot be used together")

    _configure_logging(args.verbose)

    base: dict[str, Any] = {}
    try:
        if args.from_manifest is not None:
            manifest = ExperimentManifest.load(args.from_manifest)
            base = {
                "scheme": manifest.scheme,
                "delta_z": manifest.delta_z,
                "newton_damping": manifest.newton_damping,
                "newton_correction": manifest.newton_correction,
                "theta": manifest.theta,
                "lambda_": manifest.lambda_,
                "max_elements": manifest.max_elements,
                "max_inner_iterations": manifest.max_inner_iterations,
                "solver_rel_tol": manifest.solver_rel_tol,
                "problem": manifest.problem,
                "model": manifest.model,
                "seed": manifest.seed,
                "preset": manifest.preset,
                "reference_budget": manifest.reference_budget,
                "reference_check": manifest.reference_check,
            }
        elif args.preset is not None:
            base = preset_overrides(args.preset)
        config = _build_config_from_base(args=args, base=base)
        if args.compare:
            model = model_by_name(config.model)
            for kind in SCHEME_KINDS:
                SchemeSpec(kind, delta_z=config.scheme.delta_z).validate_for(model)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))

    if args.compare:
        return compare_schemes(config)
    return run_experiment(config)
