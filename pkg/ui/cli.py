"""
ui/cli.py

Command-line interface: `propagate`, `compare` and `selfcheck`.

Exit codes: 0 success, 1 numerical/runtime failure, 2 usage or
validation error. Data goes to stdout (or --out), diagnostics to stderr.
"""

import argparse
import sys
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import (
    AfterValidator,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from src.comparison import compare_methods
from src.core import KeplerState
from src.propagator import FixedFictitious, FixedPhysical, Method, Schedule, propagate
from src.selfcheck import Check, run_selfcheck
from src.serialization import (
    table_to_csv,
    table_to_json,
    trajectory_to_csv,
    trajectory_to_json,
)
from src.utils import KeplerIntegratorError, parse_triple, setup_logger

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _split_triple(value):
    if isinstance(value, str):
        return parse_triple(value)
    return value


def _require_finite_triple(value):
    if not np.all(np.isfinite(value)):
        raise ValueError("vector components must be finite")
    return value


def _require_off_origin(value):
    if not np.linalg.norm(value) > 0.0:
        raise ValueError("collision state: |q| must be > 0")
    return value


Triple = Annotated[
    Tuple[float, float, float],
    BeforeValidator(_split_triple),
    AfterValidator(_require_finite_triple),
]
Position = Annotated[Triple, AfterValidator(_require_off_origin)]


# ==================== CONFIGURATION ====================
class RunConfig(BaseModel):
    """Validated inputs of one run; checked before any computation."""

    model_config = ConfigDict(frozen=True)

    method: Method = Method.EXACT_KS
    k: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    q0: Position
    p0: Triple
    h: Optional[float] = Field(default=None, gt=0.0, allow_inf_nan=False)
    dt: Optional[float] = Field(default=None, gt=0.0, allow_inf_nan=False)
    steps: int = Field(ge=0)
    output_format: Literal["csv", "json"] = "csv"
    out: Optional[Path] = None

    @model_validator(mode="after")
    def _step_matches_method(self) -> "RunConfig":
        if self.method is Method.EXACT_KS:
            if (self.h is None) == (self.dt is None):
                raise ValueError("exact method needs exactly one of --h or --dt")
        elif self.method is Method.MIDPOINT_KS:
            if self.h is None or self.dt is not None:
                raise ValueError("midpoint method needs --h (and no --dt)")
        elif self.dt is None or self.h is not None:
            raise ValueError(f"{self.method.value} method needs --dt (and no --h)")
        return self

    def initial_state(self) -> KeplerState:
        return KeplerState(q=self.q0, p=self.p0, t=0.0)

    def schedule(self) -> Schedule:
        if self.h is not None:
            return FixedFictitious(h=self.h, n_steps=self.steps)
        return FixedPhysical(dt=self.dt, n_steps=self.steps)


class CompareConfig(BaseModel):
    """Inputs of `compare`: a RunConfig without method, plus a method list."""

    model_config = ConfigDict(frozen=True)

    methods: List[Method] = Field(min_length=1)
    with_oracle: bool = False
    k: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    q0: Position
    p0: Triple
    h: Optional[float] = Field(default=None, gt=0.0, allow_inf_nan=False)
    dt: Optional[float] = Field(default=None, gt=0.0, allow_inf_nan=False)
    steps: int = Field(ge=0)
    output_format: Literal["csv", "json"] = "csv"
    out: Optional[Path] = None

    @field_validator("methods", mode="before")
    @classmethod
    def _split_methods(cls, value):
        if isinstance(value, str):
            return [name for name in value.split(",") if name]
        return value

    @model_validator(mode="after")
    def _has_step(self) -> "CompareConfig":
        if self.h is None and self.dt is None:
            raise ValueError("compare needs --h and/or --dt")
        return self


# ==================== OUTPUT ====================
def _emit(text: str, out: Optional[Path]) -> int:
    """Write data to the output path or stdout; exit code of the write."""
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return EXIT_OK
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        logger.error(f"Could not write {out}: {e}")
        _report_error("output failed", f"{out}: {e.strerror or e}")
        return EXIT_FAILURE
    logger.info(f"Wrote {len(text)} bytes to {out}")
    return EXIT_OK


def _report_error(kind: str, message: str) -> None:
    sys.stderr.write(f"error: {kind}: {message}\n")


def _validation_message(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(x) for x in err['loc']) or 'config'}: {err['msg']}"
        for err in error.errors()
    )


# ==================== COMMANDS ====================
def cmd_propagate(config: RunConfig) -> int:
    """Propagate one orbit and write the trajectory."""
    try:
        traj = propagate(config.initial_state(), config.k, config.method, config.schedule())
    except KeplerIntegratorError as e:
        logger.error(f"Propagation failed: {e}")
        _report_error("numerical failure", str(e))
        return EXIT_FAILURE
    except ArithmeticError as e:
        logger.error(f"Propagation overflowed: {e}")
        _report_error("numerical failure", f"floating-point range exceeded ({e})")
        return EXIT_FAILURE

    if config.output_format == "csv":
        text = trajectory_to_csv(traj)
    else:
        text = trajectory_to_json(traj)
    return _emit(text, config.out)


def cmd_compare(config: CompareConfig) -> int:
    """Run several methods on one orbit and write the comparison table."""
    try:
        rows = compare_methods(
            KeplerState(q=config.q0, p=config.p0, t=0.0),
            config.k,
            config.methods,
            config.steps,
            h=config.h,
            dt=config.dt,
            with_oracle=config.with_oracle,
        )
    except KeplerIntegratorError as e:
        logger.error(f"Comparison failed: {e}")
        _report_error("numerical failure", str(e))
        return EXIT_FAILURE
    except ArithmeticError as e:
        logger.error(f"Comparison overflowed: {e}")
        _report_error("numerical failure", f"floating-point range exceeded ({e})")
        return EXIT_FAILURE

    if config.output_format == "csv":
        text = table_to_csv(rows)
    else:
        text = table_to_json(rows)
    return _emit(text, config.out)


def cmd_selfcheck(checks: Optional[Sequence[Check]] = None) -> int:
    """Run the invariant suite, print PASS/FAIL per group, exit 0 iff all pass."""
    results = run_selfcheck(checks)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        line = f"{status} {result.name} (worst={result.worst:.3e}, tol={result.tolerance:.0e})"
        if result.detail:
            line += f" {result.detail}"
        sys.stdout.write(line + "\n")
    passed = sum(result.passed for result in results)
    sys.stdout.write(f"{passed}/{len(results)} check groups passed\n")
    return EXIT_OK if passed == len(results) else EXIT_FAILURE


# ==================== ARGUMENT PARSING ====================
def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=float, default=1.0, help="gravitational coupling (> 0)")
    parser.add_argument("--q", required=True, help="initial position, e.g. 1,0,0")
    parser.add_argument("--p", required=True, help="initial momentum, e.g. 0,1,0")
    parser.add_argument("--h", type=float, help="fictitious-time step (KS methods)")
    parser.add_argument("--dt", type=float, help="physical-time step")
    parser.add_argument("--steps", type=int, required=True, help="number of steps (>= 0)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv", dest="output_format")
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the three subcommands."""
    parser = argparse.ArgumentParser(
        prog="kepler-ks",
        description="Exact conservative Kepler integration via the KS oscillator.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    propagate_parser = subparsers.add_parser("propagate", help="propagate one orbit")
    propagate_parser.add_argument(
        "--method",
        choices=[m.value for m in Method],
        default=Method.EXACT_KS.value,
    )
    _add_run_arguments(propagate_parser)

    compare_parser = subparsers.add_parser("compare", help="compare methods on one orbit")
    compare_parser.add_argument(
        "--methods",
        default="exact,rk4",
        help="comma-separated list of: " + ", ".join(m.value for m in Method),
    )
    compare_parser.add_argument(
        "--oracle",
        action="store_true",
        dest="with_oracle",
        help="add errors against the analytic reference",
    )
    _add_run_arguments(compare_parser)

    subparsers.add_parser("selfcheck", help="run the built-in invariant suite")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, validate the configuration, run the command.

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    if args.command == "selfcheck":
        return cmd_selfcheck()

    fields = {
        "k": args.k,
        "q0": args.q,
        "p0": args.p,
        "h": args.h,
        "dt": args.dt,
        "steps": args.steps,
        "output_format": args.output_format,
        "out": args.out,
    }
    try:
        if args.command == "propagate":
            config = RunConfig(method=args.method, **fields)
        else:
            config = CompareConfig(methods=args.methods, with_oracle=args.with_oracle, **fields)
    except ValidationError as e:
        _report_error("invalid configuration", _validation_message(e))
        return EXIT_USAGE

    if args.command == "propagate":
        return cmd_propagate(config)
    return cmd_compare(config)
