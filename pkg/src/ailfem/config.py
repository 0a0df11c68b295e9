"""
Configuration for adaptive runs and experiments.
"""

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

from ailfem import __version__
from ailfem.mesh.generators import make_lshape_initial, make_unit_square
from ailfem.mesh.mesh import Mesh
from ailfem.model.manufactured import (
    ManufacturedSolution,
    lshape_solution,
    square_polynomial_solution,
)
from ailfem.model.problem import model_by_name
from ailfem.schemes.base import SchemeSpec

DEFAULT_MAX_ELEMENTS = 200_000
DEFAULT_MAX_INNER = 500

PRESET_CONFIGS: dict[str, dict[str, Any]] = {
    "1": {"delta_z": 0.1, "lambda_": 0.5, "theta": 0.5},
    "2": {"delta_z": 0.3, "lambda_": 0.1, "theta": 0.5},
    "3": {"delta_z": 0.3, "lambda_": 0.01, "theta": 0.5},
}

PROBLEMS = ("lshape", "square")


def available_presets() -> tuple[str, ...]:
    """Return the sorted list of built-in experiment presets."""
    return tuple(sorted(PRESET_CONFIGS))


def preset_overrides(name: str) -> dict[str, Any]:
    """Return preset key/value overrides for *name*."""
    try:
        return dict(PRESET_CONFIGS[name])
    except KeyError as exc:
        raise ValueError(f"Unknown preset: {name!r}") from exc


def build_problem(problem: str, model: str) -> tuple[ManufacturedSolution, Mesh]:
    """Manufactured solution and initial mesh for a named problem."""
    nonlinear = model_by_name(model)
    if problem == "lshape":
        return lshape_solution(nonlinear), make_lshape_initial()
    if problem == "square":
        return square_polynomial_solution(nonlinear), make_unit_square()
    raise ValueError(f"Unknown problem {problem!r}. Available: {', '.join(PROBLEMS)}")


@dataclass
class AdaptiveConfig:
    theta: float
    lambda_: float
    scheme: SchemeSpec

    # Termination
    max_elements: int = DEFAULT_MAX_ELEMENTS
    max_inner_iterations: int = DEFAULT_MAX_INNER

    # PCG relative residual tolerance
    solver_rel_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if not self.lambda_ > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lambda_}")
        if self.max_elements < 1:
            raise ValueError(f"max_elements must be >= 1, got {self.max_elements}")
        if self.max_inner_iterations < 1:
            raise ValueError(
                f"max_inner_iterations must be >= 1, got {self.max_inner_iterations}"
            )
        if not 0.0 < self.solver_rel_tol < 1.0:
            raise ValueError(f"solver_rel_tol must lie in (0, 1), got {self.solver_rel_tol}")

    def check_initial_mesh(self, mesh: Mesh) -> None:
        if self.max_elements < mesh.n_elements:
            raise ValueError(
                f"max_elements ({self.max_elements}) is below the initial mesh size "
                f"({mesh.n_elements})"
            )


@dataclass
class ExperimentConfig:
    adaptive: AdaptiveConfig

    # Problem
    problem: str = "lshape"
    model: str = "exp"

    # Output (default: runs/<timestamp>)
    out_dir: Path | None = None
    plots: bool = True
    mesh_dump: bool = False
    live: bool = True

    # Recorded only; the pipeline is deterministic
    seed: int = 0
    preset: str | None = None

    # Reference energy for the contraction factors (0 disables it)
    reference_budget: int = 10_000
    reference_check: bool = True

    def __post_init__(self) -> None:
        if self.out_dir is None:
            self.out_dir = Path("runs") / datetime.now().strftime("%Y%m%d_%H%M%S")
        self.out_dir = Path(self.out_dir).resolve()
        if self.problem not in PROBLEMS:
            raise ValueError(
                f"Unknown problem {self.problem!r}. Available: {', '.join(PROBLEMS)}"
            )
        self.adaptive.scheme.validate_for(model_by_name(self.model))
        if self.reference_budget and self.reference_budget < 10_000:
            raise ValueError(
                f"reference_budget must be 0 or >= 10000, got {self.reference_budget}"
            )

    @property
    def scheme(self) -> SchemeSpec:
        return self.adaptive.scheme

    def manifest(self) -> "ExperimentManifest":
        spec = self.adaptive.scheme
        return ExperimentManifest(
            scheme=spec.kind,
            delta_z=spec.delta_z,
            newton_damping=spec.newton_damping,
            newton_correction=spec.newton_correction,
            lambda_=self.adaptive.lambda_,
            theta=self.adaptive.theta,
            max_elements=self.adaptive.max_elements,
            max_inner_iterations=self.adaptive.max_inner_iterations,
            solver_rel_tol=self.adaptive.solver_rel_tol,
            problem=self.problem,
            model=self.model,
            output_dir=str(self.out_dir),
            seed=self.seed,
            preset=self.preset,
            reference_budget=self.reference_budget,
            reference_check=self.reference_check,
        )


@dataclass
class ExperimentManifest:
    scheme: str
    delta_z: float
    lambda_: float
    theta: float
    max_elements: int
    output_dir: str
    newton_damping: float = 1.0
    newton_correction: bool = True
    max_inner_iterations: int = DEFAULT_MAX_INNER
    solver_rel_tol: float = 1e-12
    problem: str = "lshape"
    model: str = "exp"
    seed: int = 0
    preset: str | None = None
    reference_budget: int = 10_000
    reference_check: bool = True
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        payload = json.loads(text)
        if not isinstance(payload, dict):
            raise ValueError("manifest must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ValueError(f"unknown manifest keys: {', '.join(unknown)}")
        try:
            return cls(**payload)
        except TypeError as exc:
            raise ValueError(f"incomplete manifest: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_config(self, **overrides: Any) -> ExperimentConfig:
        """Rebuild the experiment; ``overrides`` go to :class:`ExperimentConfig`."""
        adaptive = AdaptiveConfig(
            theta=self.theta,
            lambda_=self.lambda_,
            scheme=SchemeSpec(
                self.scheme,
                delta_z=self.delta_z,
                newton_damping=self.newton_damping,
                newton_correction=self.newton_correction,
            ),
            max_elements=self.max_elements,
            max_inner_iterations=self.max_inner_iterations,
            solver_rel_tol=self.solver_rel_tol,
        )
        options: dict[str, Any] = {
            "problem": self.problem,
            "model": self.model,
            "out_dir": Path(self.output_dir),
            "seed": self.seed,
            "preset": self.preset,
            "reference_budget": self.reference_budget,
            "reference_check": self.reference_check,
        }
        options.update(overrides)
        return ExperimentConfig(adaptive=adaptive, **options)
