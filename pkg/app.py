# app.py
import argparse
import math
import sys
import time
from pathlib import Path
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

# Import configurations and initializations
import CONFIGURATION as cfg
from Initialization import ConfigSyntaxError, format_float, parse_json_config

# Import laboratory functions
from Laboratory.ClassA import LambdaApproach, Verdict, overall_verdict, validate_class_a
from Laboratory.Expressions import ExpressionSyntaxError, parse_expression
from Laboratory.Kernels import (
    IndexSet,
    KernelFamily,
    catalog_kernel,
    kernel_from_expression,
    support_from_expressions,
)
from Laboratory.Lebesgue import MuPair, identity_mu, mu_from_expressions, verify_lebesgue_point
from Laboratory.Operator import (
    DomainSpec,
    KnownPoint,
    SampleFunction,
    apply,
    catalog_function,
    function_from_expression,
)
from Laboratory.Quadrature import EdgeFlags, Rect
from Laboratory.Rate import ApproachPath, check_rate_conditions, run_convergence
from Laboratory import Reporting

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3
EXIT_NUMERIC = 4

PATH_VARIABLES = ("lambda", "x0", "y0", "delta")
TOLERANCE_KEYS = ("tol", "tol_cond", "tol_leb", "ratio_tol", "tol_delta", "tol_converge")

Bound = Union[float, Literal["inf"]]


def _bound(value: Bound) -> float:
    return math.inf if value == "inf" else float(value)


# --- Pydantic Models ---
class KernelSpec(BaseModel):
    catalog: Optional[str] = Field(None, description="Built-in kernel: box, gauss or signed_asym.")
    expression: Optional[str] = Field(None, description="K_λ(t, s) over the variables lambda, t, s.")
    name: str = "expression"
    lambda_min: float = 1.0
    lambda_max: Bound = "inf"
    lambda0: Bound = "inf"
    support: Optional[List[str]] = Field(None, description="Four expressions in lambda: a, b, c, d of the support.")
    l1_bound: Optional[float] = None
    monotonicity_radii: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def one_source(self):
        if (self.catalog is None) == (self.expression is None):
            raise ValueError("kernel needs exactly one of 'catalog' or 'expression'")
        if self.support is not None and len(self.support) != 4:
            raise ValueError("kernel.support needs four expressions (a, b, c, d)")
        return self


class RectSpec(BaseModel):
    a: float
    b: float
    c: float
    d: float
    left: bool = True
    right: bool = True
    bottom: bool = True
    top: bool = True

    def rect(self) -> Rect:
        return Rect(self.a, self.b, self.c, self.d, EdgeFlags(self.left, self.right, self.bottom, self.top))


class FunctionSpec(BaseModel):
    catalog: Optional[str] = None
    expression: Optional[str] = Field(None, description="f(t, s) over the variables t, s.")
    name: str = "expression"
    params: Dict[str, float] = Field(default_factory=dict)
    breaks_t: List[float] = Field(default_factory=list)
    breaks_s: List[float] = Field(default_factory=list)
    effective_support: Optional[RectSpec] = None
    value_at_target: Optional[float] = Field(None, description="Representative value f(x₀, y₀) for a.e.-defined f.")

    @model_validator(mode="after")
    def one_source(self):
        if (self.catalog is None) == (self.expression is None):
            raise ValueError("function needs exactly one of 'catalog' or 'expression'")
        return self


class MuSpec(BaseModel):
    kind: Literal["identity", "density"] = "identity"
    rho1: str = "1"
    rho2: str = "1"
    delta0: float = cfg.DEFAULT_DELTA0
    symmetric_quadrants: bool = False


class TargetSpec(BaseModel):
    x0: float = 0.5
    y0: float = 0.5
    lambda0: Bound = "inf"


class PathSpec(BaseModel):
    lambda_start: float = 2.0
    ratio: float = 2.0
    count: int = 10
    x: str = "x0"
    y: str = "y0"
    delta: Optional[str] = Field(None, description="δ(λ) over lambda, x0, y0.")
    alpha: Optional[float] = None
    injected_delta: Optional[str] = Field(None, description="Test hook: Δ over lambda, delta, x, y.")


class ChecksSpec(BaseModel):
    lambda_start: Optional[float] = None
    ratio: float = 2.0
    count: int = cfg.GRID_POINTS
    lambda_grid: Optional[List[float]] = None
    probes: List[Tuple[float, float]] = Field(default_factory=lambda: [(0.0, 0.0)])
    gammas: List[float] = Field(default_factory=lambda: list(cfg.DEFAULT_GAMMAS))
    center: Tuple[float, float] = (0.0, 0.0)
    grid_n: int = 12
    lambda_samples: List[float] = Field(default_factory=lambda: [1.0, 4.0, 16.0])
    rate_gammas: Optional[List[float]] = None


class ToleranceSpec(BaseModel):
    tol: float = cfg.DEFAULT_TOL
    tol_cond: float = cfg.TOL_COND
    tol_leb: float = cfg.TOL_LEB
    ratio_tol: float = cfg.RATIO_TOL
    tol_delta: float = cfg.TOL_DELTA
    tol_converge: float = cfg.TOL_CONVERGE


class OutputSpec(BaseModel):
    format: Literal["csv", "json", "both"] = "both"
    path: str = "reports"


class ExperimentConfig(BaseModel):
    kernel: KernelSpec
    domain: Optional[Union[Literal["full_plane"], RectSpec]] = None
    function: Optional[FunctionSpec] = None
    mu: MuSpec = Field(default_factory=MuSpec)
    target: TargetSpec = Field(default_factory=TargetSpec)
    path: PathSpec = Field(default_factory=PathSpec)
    checks: ChecksSpec = Field(default_factory=ChecksSpec)
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)
    outputs: OutputSpec = Field(default_factory=OutputSpec)

    def resolved(self) -> Dict[str, Any]:
        """Fully defaulted config as embedded into reports (output location excluded)."""
        return self.model_dump(exclude={"outputs": {"path"}})


# --- Config Loading ---
def load_config(path: str, seed_tolerances: Sequence[str] = ()) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    config = ExperimentConfig.model_validate(parse_json_config(text))
    for item in seed_tolerances:
        key, sep, value = item.partition("=")
        if not sep or key not in TOLERANCE_KEYS:
            raise ValueError(f"--seed-tolerances expects key=value with key in {TOLERANCE_KEYS}, got '{item}'")
        setattr(config.tolerances, key, float(value))
    return config


def build_kernel(spec: KernelSpec) -> KernelFamily:
    if spec.catalog is not None:
        return catalog_kernel(spec.catalog)
    index_set = IndexSet(spec.lambda_min, _bound(spec.lambda_max), _bound(spec.lambda0))
    support = support_from_expressions(*spec.support) if spec.support else None
    return kernel_from_expression(
        spec.expression,
        index_set,
        support,
        name=spec.name,
        l1_bound_claim=spec.l1_bound,
        monotonicity_radii=tuple(spec.monotonicity_radii) if spec.monotonicity_radii else None,
    )


def build_function(config: ExperimentConfig) -> SampleFunction:
    spec = config.function
    if spec is None:
        raise ValueError("This command needs a 'function' section")
    known = ()
    if spec.value_at_target is not None:
        known = (KnownPoint(config.target.x0, config.target.y0, spec.value_at_target, True),)
    if spec.catalog is not None:
        params = dict(spec.params)
        if isinstance(config.domain, RectSpec):
            params["rect"] = config.domain.rect()
        try:
            f = catalog_function(spec.catalog, **params)
        except TypeError as e:
            raise ValueError(f"Catalog function '{spec.catalog}' does not accept {sorted(params)}: {e}") from e
        return f if not known else replace(f, known_points=known + f.known_points)
    if config.domain == "full_plane":
        if spec.effective_support is None:
            raise ValueError("A full-plane expression function needs 'effective_support'")
        domain, support = DomainSpec.full_plane(), spec.effective_support.rect()
    else:
        rect = config.domain.rect() if config.domain is not None else Rect(0.0, 1.0, 0.0, 1.0)
        domain, support = DomainSpec.bounded(rect), None
    return function_from_expression(
        spec.expression,
        domain,
        name=spec.name,
        breaks=(spec.breaks_t, spec.breaks_s),
        effective_support=support,
        known_points=known,
    )


def build_mu(spec: MuSpec) -> MuPair:
    if spec.kind == "identity":
        return identity_mu(spec.delta0)
    return mu_from_expressions(spec.rho1, spec.rho2, spec.delta0)


def build_approach(config: ExperimentConfig, kernel: KernelFamily) -> LambdaApproach:
    checks = config.checks
    if checks.lambda_grid:
        return LambdaApproach.explicit(kernel.index_set, checks.lambda_grid)
    return LambdaApproach.geometric(kernel.index_set, checks.count, checks.ratio, checks.lambda_start)


def build_path(config: ExperimentConfig, kernel: KernelFamily, *, need_delta: bool) -> ApproachPath:
    target, spec = config.target, config.path
    lam0 = _bound(target.lambda0)
    if lam0 != kernel.index_set.accumulation:
        raise ValueError(f"target.lambda0={target.lambda0} differs from λ₀={kernel.index_set.accumulation} of '{kernel.name}'")
    approach = LambdaApproach.geometric(kernel.index_set, spec.count, spec.ratio, spec.lambda_start)
    if need_delta and spec.delta is None:
        raise ValueError("This command needs 'path.delta', the coupling δ(λ)")
    delta = parse_expression(spec.delta, ("lambda", "x0", "y0")) if spec.delta else None
    x_rule = parse_expression(spec.x, PATH_VARIABLES)
    y_rule = parse_expression(spec.y, PATH_VARIABLES)
    anchor = {"x0": target.x0, "y0": target.y0}

    def delta_rule(lam: float) -> float:
        return delta.scalar(**{"lambda": lam}, **anchor) if delta is not None else 0.0

    def coordinate(rule):
        return lambda lam, d: rule.scalar(**{"lambda": lam, "delta": d}, **anchor)

    path = ApproachPath.coupled(
        (target.x0, target.y0, lam0),
        approach.grid,
        delta_rule,
        coordinate(x_rule),
        coordinate(y_rule),
        coupling=f"x = {spec.x}, y = {spec.y}, δ = {spec.delta}",
    )
    return path if delta is not None else ApproachPath(path.points, path.target, path.coupling)


# --- Experiment Assembly ---
@dataclass
class Experiment:
    kernel: KernelFamily
    function: Optional[SampleFunction] = None
    mu: Optional[MuPair] = None
    path: Optional[ApproachPath] = None
    approach: Optional[LambdaApproach] = None


def build_experiment(config: ExperimentConfig, command: str) -> Experiment:
    """Every object a command needs; failures here are configuration errors."""
    kernel = build_kernel(config.kernel)
    if command == "validate":
        return Experiment(kernel, approach=build_approach(config, kernel))
    function = build_function(config)
    if command == "eval":
        return Experiment(kernel, function)
    return Experiment(kernel, function, build_mu(config.mu), build_path(config, kernel, need_delta=command == "rate"))


# --- Commands ---
def _exit_for(verdicts: Iterable[Verdict]) -> int:
    return {Verdict.PASS: EXIT_OK, Verdict.FAIL: EXIT_FAIL, Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[overall_verdict(verdicts)]


def cmd_validate(config: ExperimentConfig, exp: Experiment, out_dir: Path, gnuplot: bool = False) -> int:
    kernel, approach = exp.kernel, exp.approach
    checks, tols = config.checks, config.tolerances
    reports = validate_class_a(
        kernel,
        approach,
        probes=checks.probes,
        gammas=checks.gammas,
        center=checks.center,
        lambda_samples=checks.lambda_samples,
        grid_n=checks.grid_n,
        tol=tols.tol,
        tol_cond=tols.tol_cond,
    )
    verdict = overall_verdict(r.verdict for r in reports)
    resolved = config.resolved()
    Reporting.write_report(out_dir, "validate", config.outputs.format, resolved,
                           {"kernel": kernel.name, "verdict": verdict, "reports": reports},
                           Reporting.CONDITION_HEADER, Reporting.condition_rows(reports))
    Reporting.write_summary(
        out_dir,
        f"Class A validation of '{kernel.name}'",
        {"kernel": kernel.name, "lambda grid": approach.description, "verdict": verdict},
        [(f"Condition ({r.condition.value.lower()}): {r.verdict.value}", r.notes) for r in reports],
    )
    if gnuplot:
        print("⚠️ validate reports have no plottable columns; no gnuplot script written.")
    return _exit_for(r.verdict for r in reports)


def cmd_eval(config: ExperimentConfig, exp: Experiment, x: float, y: float, lam: float) -> int:
    tol = config.tolerances.tol
    value = apply(exp.kernel, exp.function, lam, x, y, tol)
    print(f"L_λ(f; x, y) = {format_float(value)}  (λ={lam}, x={x}, y={y}, tol={tol:g})")
    return EXIT_OK


def cmd_converge(config: ExperimentConfig, exp: Experiment, out_dir: Path, gnuplot: bool = False) -> int:
    kernel, f, mp, path = exp.kernel, exp.function, exp.mu, exp.path
    tols = config.tolerances
    x0, y0 = config.target.x0, config.target.y0
    lebesgue = verify_lebesgue_point(f, mp, x0, y0, tol_leb=tols.tol_leb,
                                     symmetric_quadrants=config.mu.symmetric_quadrants)
    report = run_convergence(kernel, f, mp, path, tol=tols.tol, tol_converge=tols.tol_converge,
                             tol_leb=tols.tol_leb, lebesgue=lebesgue)
    resolved = config.resolved()
    rows = Reporting.convergence_rows(report)
    Reporting.write_report(out_dir, "convergence", config.outputs.format, resolved, {"report": report},
                           Reporting.CONVERGENCE_HEADER, rows)
    Reporting.write_report(out_dir, "lebesgue_trace", "csv", resolved, {}, Reporting.TRACE_HEADER, lebesgue.trace)
    Reporting.write_summary(
        out_dir,
        f"Convergence of L_λ({f.name}) with '{kernel.name}'",
        {"target": (x0, y0), "Lebesgue point": lebesgue.is_point, "converged": report.converged,
         "final error": report.final_error},
        [("Path", path.coupling),
         ("Errors", Reporting.markdown_table(Reporting.CONVERGENCE_HEADER, rows)),
         ("Notes", "\n".join(f"- {n}" for n in report.notes) or "none")],
    )
    if gnuplot:
        Reporting.write_gnuplot(out_dir, "convergence.gp",
                                Reporting.gnuplot_script("convergence.csv", 4, {"error": 6}))
    return EXIT_OK if report.converged else EXIT_FAIL


def cmd_rate(config: ExperimentConfig, exp: Experiment, out_dir: Path, gnuplot: bool = False) -> int:
    kernel, f, mp, path = exp.kernel, exp.function, exp.mu, exp.path
    tols = config.tolerances
    override = None
    if config.path.injected_delta is not None:
        injected = parse_expression(config.path.injected_delta, ("lambda", "delta", "x", "y"))
        override = lambda lam, d, x, y: injected.scalar(**{"lambda": lam, "delta": d, "x": x, "y": y})
    report = check_rate_conditions(
        kernel, mp, f, path,
        gammas=config.checks.rate_gammas,
        alpha=config.path.alpha,
        tol=tols.tol,
        tol_delta=tols.tol_delta,
        ratio_tol=tols.ratio_tol,
        delta_override=override,
    )
    resolved = config.resolved()
    Reporting.write_report(out_dir, "rate", config.outputs.format, resolved, {"report": report},
                           Reporting.RATE_HEADER, Reporting.rate_rows(report))
    overview: Dict[str, Any] = {f"condition ({name})": v for name, v in report.conditions.items()}
    overview["|L f - f| = o(Δ)"] = report.little_o_verdict
    if report.fitted_exponent is not None:
        overview["fitted Δ exponent"] = report.fitted_exponent.exponent
    sections = [("Path", path.coupling)]
    if report.comparison is not None:
        c = report.comparison
        sections.append(("Exponent comparison", Reporting.markdown_table(
            ("alpha", "measured", "2α", "1+α", "measured = 2α", "1+α = 2α"),
            [(c.alpha, c.measured_exponent, c.brute_force_exponent, c.stated_exponent,
              c.measured_matches_brute_force, c.stated_matches_brute_force)])))
    sections.append(("Notes", "\n".join(f"- {n}" for n in report.notes) or "none"))
    Reporting.write_summary(out_dir, f"Rate conditions for '{kernel.name}'", overview, sections)
    if gnuplot:
        Reporting.write_gnuplot(out_dir, "rate.gp",
                                Reporting.gnuplot_script("rate.csv", 4, {"Delta": 6, "op_error": 13}))
    return _exit_for(report.conditions.values())


# --- Command Line ---
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="singconv", description="Singular integral operator laboratory.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "Certify Class A conditions (a)-(f) for the configured kernel."),
        ("eval", "Print L_λ(f; x, y) for the configured kernel and function."),
        ("converge", "Measure |L_λ(f; x, y) - f(x₀, y₀)| along the configured path."),
        ("rate", "Check the rate conditions and fit the Δ exponent along the coupled path."),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="JSON experiment config (// comment lines allowed).")
        sub.add_argument("--out", default=None, help="Report directory (overrides outputs.path).")
        sub.add_argument("--format", choices=sorted(Reporting.REPORT_MODES), default=None)
        sub.add_argument("--seed-tolerances", nargs="*", default=[], metavar="KEY=VALUE",
                         help=f"Tolerance overrides, keys: {', '.join(TOLERANCE_KEYS)}.")
        sub.add_argument("--gnuplot-script", action="store_true", help="Also write a gnuplot script for the CSV.")
        sub.add_argument("--threads", type=int, default=None, help="Worker cap (overrides SINGCONV_THREADS).")
        if name == "eval":
            sub.add_argument("--x", type=float, required=True)
            sub.add_argument("--y", type=float, required=True)
            sub.add_argument("--lambda", dest="lam", type=float, required=True)
    return parser


def _log_run(out_dir: Path, command: str, config_path: str, code: int, elapsed: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y-%m-%d %H:%M:%S")
    with open(out_dir / cfg.SINGCONV_LOG_FILE, "a", encoding="utf-8") as log:
        log.write(f"{stamp} command={command} config={config_path} exit={code} "
                  f"processing_time_seconds={elapsed:.3f}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    print(f"\n--- {args.command} ---")
    start_time = time.time()
    out_dir = Path(args.out) if args.out else Path("reports")

    if args.threads is not None:
        if args.threads < 0:
            print(f"❌ --threads must be >= 0, got {args.threads}")
            return EXIT_CONFIG
        cfg.SINGCONV_THREADS = args.threads

    code = EXIT_CONFIG
    try:
        config = load_config(args.config, args.seed_tolerances)
        if args.format:
            config.outputs.format = args.format
        if not args.out:
            out_dir = Path(config.outputs.path)
        exp = build_experiment(config, args.command)
    except ConfigSyntaxError as e:
        print(f"❌ Config error in {args.config}: {e}")
    except ValidationError as e:
        print(f"❌ Invalid config {args.config}:\n{e}")
    except ArithmeticError as e:
        print(f"❌ Numeric failure while preparing the experiment: {e}")
        code = EXIT_NUMERIC
    except (OSError, ValueError) as e:
        print(f"❌ Could not set up the experiment from {args.config}: {e}")
    else:
        code = run_command(args, config, exp, out_dir)

    elapsed = time.time() - start_time
    _log_run(out_dir, args.command, args.config, code, elapsed)
    print(f"{'✅' if code == EXIT_OK else '⚠️'} {args.command} finished with exit code {code} "
          f"(processing_time_seconds={elapsed:.2f})")
    return code


def run_command(args: argparse.Namespace, config: ExperimentConfig, exp: Experiment, out_dir: Path) -> int:
    """Runs one command; failures at this stage are numeric (exit 4)."""
    try:
        if args.command == "validate":
            return cmd_validate(config, exp, out_dir, args.gnuplot_script)
        if args.command == "eval":
            return cmd_eval(config, exp, args.x, args.y, args.lam)
        if args.command == "converge":
            return cmd_converge(config, exp, out_dir, args.gnuplot_script)
        return cmd_rate(config, exp, out_dir, args.gnuplot_script)
    except ExpressionSyntaxError as e:
        print(f"❌ Expression error: {e}")
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as e:
        print(f"❌ Numeric failure: {e}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
