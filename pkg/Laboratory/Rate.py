# Laboratory/Rate.py
"""
Rate functional Δ(λ, δ, x, y), the two hypothesis functionals
of pointwise convergence, the rate conditions (i)-(iv), little-o verdicts and exponent fits.

Δ(λ, δ, x, y) = ∬_{[x₀-δ, x₀+δ]×[y₀-δ, y₀+δ]} |K_λ(t - x, s - y)| ρ₁(|t - x₀|) ρ₂(|s - y₀|) ds dt

Δ also serves as the first hypothesis functional; the second is the pair
|K_λ(0, 0)|μ₁(|x - x₀|), |K_λ(0, 0)|μ₂(|y - y₀|).
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import linregress

from CONFIGURATION import (
    MIN_FIT_POINTS,
    MIN_LITTLE_O_POINTS,
    NOISE_FLOOR,
    OPERATOR_TOL,
    RATIO_TOL,
    TOL_CONVERGE,
    TOL_DELTA,
    TOL_LEB,
    TREND_WINDOW,
)
from Initialization import ordered_map
from Laboratory.ClassA import Verdict, axis_values, shifted_integral, tail_mass
from Laboratory.Kernels import KernelFamily
from Laboratory.Lebesgue import LebesgueVerdict, MuPair, verify_lebesgue_point
from Laboratory.Limits import is_bounded, tail_non_increasing, tends_to_zero
from Laboratory.Operator import SampleFunction, apply
from Laboratory.Quadrature import Rect, integrate_rect

DeltaRule = Callable[[float], float]
# (λ, δ, x, y) -> Δ; replaces the quadrature when injected
DeltaOverride = Callable[[float, float, float, float], float]

RATE_MATCH_TOL = 0.05


@dataclass(frozen=True)
class ApproachPath:
    """(x_j, y_j, λ_j) → (x₀, y₀, λ₀); deltas, when given, are index-aligned with points."""
    points: Tuple[Tuple[float, float, float], ...]
    target: Tuple[float, float, float]
    coupling: str = ""
    deltas: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not self.points:
            raise ValueError("Approach path needs at least one point")
        if self.deltas is not None and len(self.deltas) != len(self.points):
            raise ValueError(f"{len(self.deltas)} deltas for {len(self.points)} path points")
        x0, y0, lam0 = self.target
        for j, ((xa, ya, la), (xb, yb, lb)) in enumerate(zip(self.points, self.points[1:]), start=1):
            toward_lam0 = lb > la if math.isinf(lam0) else abs(lb - lam0) < abs(la - lam0)
            if not toward_lam0:
                raise ValueError(f"Path point {j}: λ={lb} does not move toward λ₀={lam0}")
            if abs(xb - x0) > abs(xa - x0) or abs(yb - y0) > abs(ya - y0):
                raise ValueError(f"Path point {j}: ({xb}, {yb}) moves away from ({x0}, {y0})")

    @property
    def lambdas(self) -> List[float]:
        return [p[2] for p in self.points]

    @classmethod
    def coupled(
        cls,
        target: Tuple[float, float, float],
        lambdas: Sequence[float],
        delta_rule: DeltaRule,
        x_rule: Callable[[float, float], float],
        y_rule: Callable[[float, float], float],
        coupling: str = "",
    ) -> "ApproachPath":
        """Points (x_rule(λ, δ), y_rule(λ, δ), λ) with δ = delta_rule(λ)."""
        deltas = tuple(float(delta_rule(lam)) for lam in lambdas)
        points = tuple((float(x_rule(lam, d)), float(y_rule(lam, d)), float(lam)) for lam, d in zip(lambdas, deltas))
        return cls(points, target, coupling, deltas)


class LittleO(BaseModel):
    holds: bool
    ratios: List[float]
    tail_slope: Optional[float] = None


class ExponentFit(BaseModel):
    exponent: float
    stderr: float
    intercept: float


class RateComparison(BaseModel):
    alpha: float
    measured_exponent: float
    brute_force_exponent: float  # 2α, from direct evaluation of the box-kernel Δ
    stated_exponent: float  # 1 + α
    measured_matches_brute_force: bool
    stated_matches_brute_force: bool


class RateReport(BaseModel):
    coupling: str
    target: List[float]
    points: List[List[float]]
    deltas: List[float]
    gammas: List[float]
    delta_values: List[float]
    hypothesis_41: List[float]
    hypothesis_42: List[List[float]]
    hypothesis_41_bounded: Optional[bool] = None
    hypothesis_42_bounded: Optional[bool] = None
    condition_values: Dict[str, List[float]] = Field(default_factory=dict)
    conditions: Dict[str, Verdict] = Field(default_factory=dict)
    ratios: Dict[str, List[float]] = Field(default_factory=dict)
    operator_error: List[float] = Field(default_factory=list)
    little_o_verdict: bool = False
    fitted_exponent: Optional[ExponentFit] = None
    comparison: Optional[RateComparison] = None
    notes: List[str] = Field(default_factory=list)


class ConvergenceReport(BaseModel):
    function: str
    kernel: str
    target: List[float]
    points: List[List[float]]
    values: List[float]
    errors: List[float]
    reference_value: float
    lebesgue_point: bool
    lebesgue_inconclusive: bool
    converged: bool
    final_error: float
    notes: List[str] = Field(default_factory=list)


def delta_functional(
    k: KernelFamily,
    mp: MuPair,
    x0: float,
    y0: float,
    delta: float,
    x: float,
    y: float,
    lam: float,
    tol: float = OPERATOR_TOL,
) -> float:
    """Δ(λ, δ, x, y); requires 0 < δ < δ₀."""
    if not 0 < delta < mp.delta0:
        raise ValueError(f"Need 0 < δ < δ₀={mp.delta0}, got δ={delta}")
    k.require(lam)
    square = Rect.square(x0, y0, delta)
    region = square.intersect(k.effective_support(lam).shifted(x, y))
    if region is None:
        return 0.0
    kernel = k.absolute(lam, x, y)

    def integrand(t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return kernel(t, s) * np.asarray(mp.rho1(np.abs(t - x0))) * np.asarray(mp.rho2(np.abs(s - y0)))

    t_lines, s_lines = k.breaks(lam, x, y)
    breaks = (list(t_lines) + [x0], list(s_lines) + [y0])
    return integrate_rect(integrand, region, tol, breaks=breaks).value


hypothesis_41 = delta_functional


def hypothesis_42(
    k: KernelFamily,
    mp: MuPair,
    x0: float,
    y0: float,
    x: float,
    y: float,
    lam: float,
) -> Tuple[float, float]:
    """(|K_λ(0,0)|μ₁(|x - x₀|), |K_λ(0,0)|μ₂(|y - y₀|))."""
    dx, dy = abs(x - x0), abs(y - y0)
    if dx >= mp.delta0 or dy >= mp.delta0:
        raise ValueError(f"Need |x - x₀|, |y - y₀| < δ₀={mp.delta0}, got {dx}, {dy}")
    peak = k.peak(lam)
    return peak * mp.mu1(dx), peak * mp.mu2(dy)


def radius_note(k: KernelFamily, mp: MuPair) -> Optional[str]:
    """Note when δ₀ exceeds the smaller monotonicity radius of the kernel."""
    if k.monotonicity_radii is None:
        return None
    smallest = min(k.monotonicity_radii)
    if mp.delta0 <= smallest:
        return None
    return f"δ₀={mp.delta0} exceeds min(δ₁, δ₂)={smallest} of '{k.name}'"


def _hypothesis_42_series(k, mp, x0, y0, jobs) -> Tuple[Optional[List[Tuple[float, float]]], Optional[str]]:
    """hypothesis_42 along the path, or a note naming the first point where it is undefined."""
    values = []
    for j, (x, y, lam, _) in enumerate(jobs):
        try:
            values.append(hypothesis_42(k, mp, x0, y0, x, y, lam))
        except ValueError as e:
            return None, f"hypothesis_42 undefined at path index {j}: {e}"
    return values, None


def _log_slope(ratios: Sequence[float]) -> Optional[float]:
    points = [(math.log(j), math.log(r)) for j, r in enumerate(ratios, start=1) if r > 0]
    if len(points) < 2:
        return None
    xs, ys = zip(*points)
    return float(linregress(xs, ys).slope)


def little_o(
    numerator: Sequence[float],
    denominator: Sequence[float],
    ratio_tol: float = RATIO_TOL,
    window: int = TREND_WINDOW,
    noise_floor: float = NOISE_FLOOR,
) -> LittleO:
    """
    a_j = o(b_j) on a finite grid: the last `window` ratios are non-increasing and the final
    ratio is below ratio_tol. Numerators at or below noise_floor count as exact zeros.

    Raises:
        ValueError: lengths differ or are below 6, or a denominator is 0.
    """
    if len(numerator) != len(denominator):
        raise ValueError(f"Sequences differ in length: {len(numerator)} vs {len(denominator)}")
    if len(numerator) < MIN_LITTLE_O_POINTS:
        raise ValueError(f"little_o needs at least {MIN_LITTLE_O_POINTS} points, got {len(numerator)}")
    ratios = []
    for j, (a, b) in enumerate(zip(numerator, denominator)):
        if b == 0:
            raise ValueError(f"Denominator is zero at index {j}")
        a = abs(a)
        ratios.append(0.0 if a <= noise_floor else a / abs(b))
    holds = ratios[-1] < ratio_tol and tail_non_increasing(ratios, window)
    return LittleO(holds=holds, ratios=ratios, tail_slope=_log_slope(ratios))


def fit_exponent(lambdas: Sequence[float], values: Sequence[float]) -> ExponentFit:
    """Least-squares fit values ~ C·λ^(-exponent) on log-log axes."""
    if len(lambdas) != len(values):
        raise ValueError(f"Sequences differ in length: {len(lambdas)} vs {len(values)}")
    if len(values) < MIN_FIT_POINTS:
        raise ValueError(f"fit_exponent needs at least {MIN_FIT_POINTS} points, got {len(values)}")
    for j, (lam, v) in enumerate(zip(lambdas, values)):
        if not v > 0:
            raise ValueError(f"Value at index {j} must be > 0, got {v}")
        if not lam > 0:
            raise ValueError(f"λ at index {j} must be > 0, got {lam}")
    fit = linregress(np.log(np.asarray(lambdas, dtype=float)), np.log(np.asarray(values, dtype=float)))
    return ExponentFit(exponent=-float(fit.slope), stderr=float(fit.stderr), intercept=float(fit.intercept))


def compare_with_stated_rate(fit: ExponentFit, alpha: float, tol: float = RATE_MATCH_TOL) -> RateComparison:
    """Measured Δ exponent against 2α (direct evaluation) and 1 + α (the stated O-bound)."""
    brute_force = 2.0 * alpha
    stated = 1.0 + alpha
    return RateComparison(
        alpha=alpha,
        measured_exponent=fit.exponent,
        brute_force_exponent=brute_force,
        stated_exponent=stated,
        measured_matches_brute_force=abs(fit.exponent - brute_force) <= tol,
        stated_matches_brute_force=abs(stated - brute_force) <= tol,
    )


def _path_deltas(path: ApproachPath, delta_rule: Optional[DeltaRule], delta0: float) -> List[float]:
    if path.deltas is not None:
        deltas = list(path.deltas)
    elif delta_rule is not None:
        deltas = [float(delta_rule(lam)) for lam in path.lambdas]
    else:
        raise ValueError("Rate checks need a δ rule or a path carrying its deltas")
    for j, d in enumerate(deltas):
        if not 0 < d < delta0:
            raise ValueError(f"δ at path index {j} is {d}, outside (0, δ₀={delta0})")
    return deltas


def _series(fn, items) -> Tuple[Optional[List[float]], Optional[str]]:
    """Runs fn over items; a numeric failure returns the message instead of values."""
    try:
        return ordered_map(fn, items), None
    except ArithmeticError as e:
        return None, str(e)


def check_rate_conditions(
    k: KernelFamily,
    mp: MuPair,
    f: SampleFunction,
    path: ApproachPath,
    delta_rule: Optional[DeltaRule] = None,
    *,
    gammas: Optional[Sequence[float]] = None,
    alpha: Optional[float] = None,
    tol: float = OPERATOR_TOL,
    tol_delta: float = TOL_DELTA,
    ratio_tol: float = RATIO_TOL,
    noise_floor: float = NOISE_FLOOR,
    delta_override: Optional[DeltaOverride] = None,
) -> RateReport:
    """
    Conditions (i)-(iv) and the o(Δ) conclusion along a path.

    (i)   Δ_j → 0 (trend test with tol_delta).
    (ii)  max_γ max(|K_λ(γ,0)|, |K_λ(0,γ)|) = o(Δ).
    (iii) max_γ ∬ outside ⟨-γ,γ⟩² of |K_λ| = o(Δ).
    (iv)  |∬K_λ(t - x, s - y) - 1| = o(Δ).
    A numeric failure marks only the affected condition Inconclusive.
    """
    x0, y0, _ = path.target
    gammas = list(gammas) if gammas else [mp.delta0 / 2.0]
    deltas = _path_deltas(path, delta_rule, mp.delta0)
    jobs = [(x, y, lam, d) for (x, y, lam), d in zip(path.points, deltas)]
    notes: List[str] = []
    if delta_override is not None:
        notes.append("Δ injected by override")
    note = radius_note(k, mp)
    if note is not None:
        print(f"⚠️ {note}")
        notes.append(note)

    def delta_at(job):
        x, y, lam, d = job
        if delta_override is not None:
            return float(delta_override(lam, d, x, y))
        return delta_functional(k, mp, x0, y0, d, x, y, lam, tol)

    delta_values, delta_error = _series(delta_at, jobs)
    h42, h42_error = _hypothesis_42_series(k, mp, x0, y0, jobs)
    if h42_error is not None:
        print(f"⚠️ {h42_error}")
        notes.append(h42_error)
    report = RateReport(
        coupling=path.coupling,
        target=list(path.target),
        points=[list(p) for p in path.points],
        deltas=deltas,
        gammas=gammas,
        delta_values=delta_values or [],
        hypothesis_41=delta_values or [],
        hypothesis_42=[[a for a, _ in h42], [b for _, b in h42]] if h42 is not None else [[], []],
        hypothesis_42_bounded=(is_bounded([a for a, _ in h42]) and is_bounded([b for _, b in h42])
                               if h42 is not None else None),
        notes=notes,
    )
    if delta_values is None:
        report.notes.append(f"Δ failed: {delta_error}")
        for name in ("i", "ii", "iii", "iv"):
            report.conditions[name] = Verdict.INCONCLUSIVE
        print(f"⚠️ Rate conditions inconclusive: {delta_error}")
        return report

    report.hypothesis_41_bounded = is_bounded(delta_values)
    report.conditions["i"] = Verdict.PASS if tends_to_zero(delta_values, tol_delta) else Verdict.FAIL

    quantities = {
        "ii": lambda job: max(max(axis_values(k, job[2], g)) for g in gammas),
        "iii": lambda job: max(tail_mass(k, job[2], g, tol).value for g in gammas),
        "iv": lambda job: abs(shifted_integral(k, job[2], job[0], job[1], tol).value - 1.0),
        "conclusion": lambda job: abs(apply(k, f, job[2], job[0], job[1], tol) - f.value_at(x0, y0)),
    }
    for name, quantity in quantities.items():
        values, error = _series(quantity, jobs)
        verdict = None
        if values is None:
            report.notes.append(f"({name}) failed: {error}")
        else:
            try:
                verdict = little_o(values, delta_values, ratio_tol, noise_floor=noise_floor)
            except ValueError as e:
                report.notes.append(f"({name}) not comparable with Δ: {e}")
        if name == "conclusion":
            report.operator_error = values or []
            if verdict is not None:
                report.ratios[name] = verdict.ratios
                report.little_o_verdict = verdict.holds
            continue
        if values is not None:
            report.condition_values[name] = values
        if verdict is None:
            report.conditions[name] = Verdict.INCONCLUSIVE
            continue
        report.ratios[name] = verdict.ratios
        report.conditions[name] = Verdict.PASS if verdict.holds else Verdict.FAIL

    if len(delta_values) >= MIN_FIT_POINTS and all(v > 0 for v in delta_values):
        report.fitted_exponent = fit_exponent(path.lambdas, delta_values)
        if alpha is not None:
            report.comparison = compare_with_stated_rate(report.fitted_exponent, alpha)

    summary = ", ".join(f"({name}) {v.value}" for name, v in report.conditions.items())
    glyph = "✅" if all(v == Verdict.PASS for v in report.conditions.values()) else "⚠️"
    print(f"{glyph} Rate conditions: {summary}; |L_λ f - f(x₀,y₀)| = o(Δ): {report.little_o_verdict}")
    return report


def run_convergence(
    k: KernelFamily,
    f: SampleFunction,
    mp: MuPair,
    path: ApproachPath,
    *,
    tol: float = OPERATOR_TOL,
    tol_converge: float = TOL_CONVERGE,
    tol_leb: float = TOL_LEB,
    lebesgue: Optional[LebesgueVerdict] = None,
) -> ConvergenceReport:
    """
    |L_λ(f; x_j, y_j) - f(x₀, y₀)| along the path after checking that (x₀, y₀) is a
    μ-generalized Lebesgue point. A failed check is recorded and the run continues.
    """
    x0, y0, _ = path.target
    notes: List[str] = []
    note = radius_note(k, mp)
    if note is not None:
        print(f"⚠️ {note}")
        notes.append(note)
    if lebesgue is None:
        lebesgue = verify_lebesgue_point(f, mp, x0, y0, tol_leb=tol_leb)
    if not lebesgue.is_point:
        print(f"⚠️ ({x0}, {y0}) did not verify as a Lebesgue point; the convergence hypothesis is unmet")
        notes.append("target did not verify as a μ-generalized Lebesgue point")
        notes.extend(lebesgue.notes)

    reference = f.value_at(x0, y0)
    values = ordered_map(lambda p: apply(k, f, p[2], p[0], p[1], tol), path.points)
    errors = [abs(v - reference) for v in values]
    converged = tends_to_zero(errors, tol_converge)
    glyph = "✅" if converged else "❌"
    print(f"{glyph} L_λ({f.name}) at ({x0}, {y0}): final error {errors[-1]:.6g}, converged={converged}")
    return ConvergenceReport(
        function=f.name,
        kernel=k.name,
        target=list(path.target),
        points=[list(p) for p in path.points],
        values=values,
        errors=errors,
        reference_value=reference,
        lebesgue_point=lebesgue.is_point,
        lebesgue_inconclusive=lebesgue.inconclusive,
        converged=converged,
        final_error=errors[-1],
        notes=notes,
    )


class SweepRow(BaseModel):
    alpha: float
    lambdas: List[float]
    deltas: List[float]
    delta_values: List[float]
    tends_to_zero: bool
    fit: Optional[ExponentFit] = None


def delta_scaling_sweep(
    k: KernelFamily,
    mp: MuPair,
    x0: float,
    y0: float,
    lambdas: Sequence[float],
    alphas: Sequence[float],
    *,
    tol: float = OPERATOR_TOL,
    tol_delta: float = TOL_DELTA,
) -> List[SweepRow]:
    """Δ along δ = λ^-(1+α), x = x₀ - δ, y = y₀ - δ for each α."""
    rows = []
    for alpha in alphas:
        deltas = [lam ** -(1.0 + alpha) for lam in lambdas]
        values = ordered_map(
            lambda job: delta_functional(k, mp, x0, y0, job[1], x0 - job[1], y0 - job[1], job[0], tol),
            list(zip(lambdas, deltas)),
        )
        fit = fit_exponent(lambdas, values) if all(v > 0 for v in values) and len(values) >= MIN_FIT_POINTS else None
        rows.append(SweepRow(
            alpha=alpha,
            lambdas=list(lambdas),
            deltas=deltas,
            delta_values=values,
            tends_to_zero=tends_to_zero(values, tol_delta),
            fit=fit,
        ))
    return rows
