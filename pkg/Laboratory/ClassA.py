# Laboratory/ClassA.py
"""
Numerical certification of the Class A conditions (a)-(f) for a kernel family.

Every check evaluates its quantity along a finite λ grid approaching λ₀ and turns the
values into a verdict with the shared proxies in Laboratory.Limits. A Fail always carries
a witness that reproduces the violation when re-evaluated.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import linregress

from CONFIGURATION import (
    DEFAULT_GAMMAS,
    DEFAULT_TOL,
    DIVERGENCE_RATIO,
    GRID_POINTS,
    GROWTH_SLOPE_TOL,
    MONOTONE_SLACK,
    NEGLIGIBLE_FRACTION,
    TOL_COND,
    TOL_REL_MASS,
    TREND_WINDOW,
)
from Initialization import ordered_map
from Laboratory.Kernels import IndexSet, KernelFamily
from Laboratory.Limits import tail_non_decreasing, tends_to_zero
from Laboratory.Quadrature import QuadResult, Rect, integrate_complement, integrate_rect

CHECK_F_LAMBDAS = (1.0, 4.0, 16.0)
CHECK_F_GRID = 12


class Verdict(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


class Condition(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"


class ConditionReport(BaseModel):
    condition: Condition
    verdict: Verdict
    measurements: List[List[float]] = Field(default_factory=list)
    margin: float = 0.0
    notes: str = ""
    witness: Optional[List[float]] = None


@dataclass(frozen=True)
class LambdaApproach:
    """λ grid approaching λ₀ strictly monotonically from inside the index set."""
    grid: Tuple[float, ...]
    index_set: IndexSet
    description: str = ""

    def __post_init__(self):
        if not self.grid:
            raise ValueError("λ grid must not be empty")
        for j, lam in enumerate(self.grid):
            if not self.index_set.contains(lam):
                raise ValueError(f"λ grid point {j} ({lam}) is outside the index set")
        steps = list(zip(self.grid, self.grid[1:]))
        lam0 = self.index_set.accumulation
        if self.index_set.at_infinity:
            ok = all(b > a for a, b in steps)
        else:
            ok = all(abs(b - lam0) < abs(a - lam0) for a, b in steps)
        if not ok:
            raise ValueError(f"λ grid {list(self.grid)} does not approach λ₀={lam0} strictly monotonically")

    @classmethod
    def geometric(cls, index_set: IndexSet, count: int = GRID_POINTS, ratio: float = 2.0,
                  start: Optional[float] = None) -> "LambdaApproach":
        """λ_j = start·ratio^j toward ∞, or distances to a finite λ₀ shrinking by 1/ratio."""
        if count < 1 or ratio <= 1.0:
            raise ValueError(f"Geometric approach needs count >= 1 and ratio > 1, got {count}, {ratio}")
        lam0 = index_set.accumulation
        if index_set.at_infinity:
            first = start if start is not None else max(index_set.lambda_min, 1.0)
            grid = tuple(first * ratio ** j for j in range(count))
            return cls(grid, index_set, f"geometric λ = {first}·{ratio}^j, j < {count}")
        first = start if start is not None else (
            index_set.lambda_min if index_set.lambda_min < lam0 else min(index_set.lambda_max, lam0 + 1.0)
        )
        gap = first - lam0
        if gap == 0.0:
            raise ValueError(f"Cannot approach λ₀={lam0} from start {first}")
        grid = tuple(lam0 + gap * ratio ** -j for j in range(count))
        return cls(grid, index_set, f"λ = {lam0} + ({gap})·{ratio}^-j, j < {count}")

    @classmethod
    def explicit(cls, index_set: IndexSet, grid: Sequence[float]) -> "LambdaApproach":
        return cls(tuple(float(v) for v in grid), index_set, "explicit grid")


def _flagged(results: Sequence[QuadResult]) -> bool:
    return any(not r.converged for r in results)


def _report(condition: Condition, verdict: Verdict, measurements, margin: float, notes: str,
            witness: Optional[List[float]] = None) -> ConditionReport:
    glyph = {Verdict.PASS: "✅", Verdict.FAIL: "❌", Verdict.INCONCLUSIVE: "⚠️"}[verdict]
    print(f"{glyph} Condition ({condition.value.lower()}): {verdict.value}. {notes}")
    return ConditionReport(
        condition=condition,
        verdict=verdict,
        measurements=[[float(v) for v in row] for row in measurements],
        margin=float(margin),
        notes=notes,
        witness=witness,
    )


def kernel_mass(k: KernelFamily, lam: float, tol: float = DEFAULT_TOL) -> QuadResult:
    """∬|K_λ| over the effective support."""
    return integrate_rect(k.absolute(lam), k.effective_support(lam), tol, breaks=k.breaks(lam))


def shifted_integral(k: KernelFamily, lam: float, x: float, y: float, tol: float = DEFAULT_TOL) -> QuadResult:
    """∬K_λ(t - x, s - y) over the shifted effective support."""
    region = k.effective_support(lam).shifted(x, y)
    return integrate_rect(k.at(lam, x, y), region, tol, breaks=k.breaks(lam, x, y))


def tail_mass(k: KernelFamily, lam: float, gamma: float, tol: float = DEFAULT_TOL) -> QuadResult:
    """∬ of |K_λ| outside [-γ, γ]², cut at the effective support."""
    inner = Rect.square(0.0, 0.0, gamma)
    outer = k.effective_support(lam).hull(inner)
    return integrate_complement(k.absolute(lam), inner, outer, tol, breaks=k.breaks(lam))


def axis_values(k: KernelFamily, lam: float, gamma: float) -> Tuple[float, float]:
    """(|K_λ(γ, 0)|, |K_λ(0, γ)|)."""
    along_t = abs(float(k(lam, np.float64(gamma), np.float64(0.0))))
    along_s = abs(float(k(lam, np.float64(0.0), np.float64(gamma))))
    return along_t, along_s


def _tail_slope(lambdas: Sequence[float], values: Sequence[float], window: int = TREND_WINDOW) -> float:
    xs = np.log(np.asarray(lambdas[-window:], dtype=float))
    ys = np.log(np.maximum(np.asarray(values[-window:], dtype=float), np.finfo(float).tiny))
    if len(xs) < 2:
        return 0.0
    return float(linregress(xs, ys).slope)


def check_a(k: KernelFamily, approach: LambdaApproach, tol: float = DEFAULT_TOL,
            tol_rel: float = TOL_REL_MASS) -> ConditionReport:
    """Condition (a): ∬|K_λ| <= M along the grid."""
    def mass_or_error(lam: float):
        try:
            return kernel_mass(k, lam, tol)
        except ArithmeticError as e:
            return e

    lambdas = list(approach.grid)
    results = ordered_map(mass_or_error, lambdas)
    for lam, r in zip(lambdas, results):
        if isinstance(r, ArithmeticError):
            return _report(Condition.A, Verdict.INCONCLUSIVE, [], 0.0, f"Quadrature failed at λ={lam}: {r}")
    masses = [r.value for r in results]
    measurements = list(zip(lambdas, masses))
    for lam, r in zip(lambdas, results):
        if not r.converged:
            return _report(Condition.A, Verdict.INCONCLUSIVE, measurements, 0.0,
                           f"Mass integral did not converge at λ={lam} (error estimate {r.error_estimate:.3g})")

    if k.l1_bound_claim is not None:
        bound = k.l1_bound_claim * (1.0 + tol_rel)
        worst = int(np.argmax(masses))
        margin = bound - masses[worst]
        if margin < 0:
            return _report(Condition.A, Verdict.FAIL, measurements, margin,
                           f"Mass {masses[worst]:.12g} at λ={lambdas[worst]} exceeds M={k.l1_bound_claim}",
                           witness=[lambdas[worst], masses[worst]])
        return _report(Condition.A, Verdict.PASS, measurements, margin,
                       f"max mass {masses[worst]:.12g} <= M={k.l1_bound_claim}")

    # No claimed M: bounded iff the masses stop growing on the log-log tail
    slope = _tail_slope(lambdas, masses)
    inferred = max(masses)
    if slope > GROWTH_SLOPE_TOL:
        return _report(Condition.A, Verdict.FAIL, measurements, GROWTH_SLOPE_TOL - slope,
                       f"Masses grow like λ^{slope:.3f}; no finite M",
                       witness=[lambdas[-TREND_WINDOW], masses[-TREND_WINDOW], lambdas[-1], masses[-1], slope])
    return _report(Condition.A, Verdict.PASS, measurements, GROWTH_SLOPE_TOL - slope,
                   f"inferred M={inferred:.12g} (tail slope {slope:.3g})")


def check_b(k: KernelFamily, approach: LambdaApproach,
            probes: Sequence[Tuple[float, float]] = ((0.0, 0.0),),
            divergence_ratio: float = DIVERGENCE_RATIO) -> ConditionReport:
    """Condition (b): |K_λ(t₀, s₀)| → ∞, per probe."""
    measurements = []
    notes = []
    witness = None
    margin = math.inf
    for t0, s0 in probes:
        values = [abs(float(k(lam, np.float64(t0), np.float64(s0)))) for lam in approach.grid]
        measurements += [[t0, s0, lam, v] for lam, v in zip(approach.grid, values)]
        probe_margin = values[-1] - divergence_ratio * values[0]
        diverges = tail_non_decreasing(values) and values[-1] > 0.0 and probe_margin > 0.0
        notes.append(f"({t0}, {s0}): {'Pass' if diverges else 'Fail'}")
        margin = min(margin, probe_margin)
        if not diverges and witness is None:
            witness = [t0, s0, approach.grid[0], values[0], approach.grid[-1], values[-1]]
    verdict = Verdict.PASS if witness is None else Verdict.FAIL
    text = f"probes {'; '.join(notes)} (threshold: last > {divergence_ratio:g} x first)"
    return _report(Condition.B, verdict, measurements, margin, text, witness)


def default_c_path(center: Tuple[float, float], approach: LambdaApproach) -> List[Tuple[float, float, float]]:
    """x_j = x₀ + 0.1·2^-j, y_j = y₀ + 0.1·2^-j alongside the λ grid."""
    x0, y0 = center
    return [(x0 + 0.1 * 2.0 ** -j, y0 + 0.1 * 2.0 ** -j, lam) for j, lam in enumerate(approach.grid)]


def check_c(k: KernelFamily, center: Tuple[float, float], path: Sequence[Tuple[float, float, float]],
            tol: float = DEFAULT_TOL, tol_cond: float = TOL_COND) -> ConditionReport:
    """Condition (c): |∬K_λ(t - x, s - y) - 1| → 0 along the path."""
    results = ordered_map(lambda p: shifted_integral(k, p[2], p[0], p[1], tol), path)
    deviations = [abs(r.value - 1.0) for r in results]
    measurements = [[x, y, lam, d] for (x, y, lam), d in zip(path, deviations)]
    margin = tol_cond - deviations[-1]
    if tends_to_zero(deviations, tol_cond, floor=tol_cond * NEGLIGIBLE_FRACTION):
        if _flagged(results):
            return _report(Condition.C, Verdict.INCONCLUSIVE, measurements, margin,
                           "Deviations look small but a mass integral hit the refinement limit")
        return _report(Condition.C, Verdict.PASS, measurements, margin,
                       f"final deviation {deviations[-1]:.3g} < {tol_cond:g}")
    x, y, lam = path[-1]
    return _report(Condition.C, Verdict.FAIL, measurements, margin,
                   f"deviation {deviations[-1]:.6g} does not tend to 0 (centre {center})",
                   witness=[x, y, lam, deviations[-1]])


def check_d(k: KernelFamily, approach: LambdaApproach, gammas: Sequence[float] = DEFAULT_GAMMAS,
            tol_cond: float = TOL_COND) -> ConditionReport:
    """Condition (d): |K_λ(γ, 0)| and |K_λ(0, γ)| → 0 for each γ."""
    if not gammas:
        raise ValueError("check_d needs at least one γ")
    measurements = []
    witness = None
    margin = math.inf
    for gamma in gammas:
        pairs = [axis_values(k, lam, gamma) for lam in approach.grid]
        measurements += [[gamma, lam, a, b] for lam, (a, b) in zip(approach.grid, pairs)]
        worst = [max(a, b) for a, b in pairs]
        margin = min(margin, tol_cond - worst[-1])
        if witness is None and not tends_to_zero(worst, tol_cond, floor=tol_cond * NEGLIGIBLE_FRACTION):
            witness = [gamma, approach.grid[-1], *pairs[-1]]
    if witness is not None:
        return _report(Condition.D, Verdict.FAIL, measurements, margin,
                       f"|K_λ| at γ={witness[0]} stays at {max(witness[2], witness[3]):.6g}", witness)
    return _report(Condition.D, Verdict.PASS, measurements, margin, f"γ = {list(gammas)}")


def check_e(k: KernelFamily, approach: LambdaApproach, gammas: Sequence[float] = DEFAULT_GAMMAS,
            tol: float = DEFAULT_TOL, tol_cond: float = TOL_COND) -> ConditionReport:
    """Condition (e): mass of |K_λ| outside ⟨-γ, γ⟩² → 0 for each γ."""
    if not gammas:
        raise ValueError("check_e needs at least one γ")
    jobs = [(gamma, lam) for gamma in gammas for lam in approach.grid]
    results = ordered_map(lambda job: tail_mass(k, job[1], job[0], tol), jobs)
    measurements = [[gamma, lam, r.value] for (gamma, lam), r in zip(jobs, results)]
    witness = None
    margin = math.inf
    n = len(approach.grid)
    for i, gamma in enumerate(gammas):
        tails = [r.value for r in results[i * n:(i + 1) * n]]
        margin = min(margin, tol_cond - tails[-1])
        if witness is None and not tends_to_zero(tails, tol_cond, floor=tol_cond * NEGLIGIBLE_FRACTION):
            witness = [gamma, approach.grid[-1], tails[-1]]
    if witness is not None:
        return _report(Condition.E, Verdict.FAIL, measurements, margin,
                       f"tail mass outside γ={witness[0]} stays at {witness[2]:.6g}", witness)
    if _flagged(results):
        return _report(Condition.E, Verdict.INCONCLUSIVE, measurements, margin,
                       "Tail integrals hit the refinement limit")
    return _report(Condition.E, Verdict.PASS, measurements, margin, f"γ = {list(gammas)}")


def four_point_variation(g: Callable, r: Rect) -> float:
    """|g(a,c) - g(a,d) - g(b,c) + g(b,d)|, the total variation of a bimonotone g on r."""
    corner = lambda t, s: float(g(np.float64(t), np.float64(s)))
    return abs(corner(r.a, r.c) - corner(r.a, r.d) - corner(r.b, r.c) + corner(r.b, r.d))


def cross_differences(values: np.ndarray) -> np.ndarray:
    """Cell cross-differences g(t',s') - g(t',s) - g(t,s') + g(t,s) of a lattice G[i, j] = g(t_i, s_j)."""
    return values[1:, 1:] - values[1:, :-1] - values[:-1, 1:] + values[:-1, :-1]


def partition_variation(g: Callable, r: Rect, n: int) -> float:
    """Σ |cell cross-differences| over the n×n uniform partition of r."""
    if n < 1:
        raise ValueError(f"Partition needs n >= 1, got {n}")
    t, s = np.meshgrid(np.linspace(r.a, r.b, n + 1), np.linspace(r.c, r.d, n + 1), indexing="ij")
    lattice = np.broadcast_to(np.asarray(g(t, s), dtype=float), t.shape)
    return math.fsum(np.abs(cross_differences(lattice)).ravel().tolist())


def _symmetric_lattice(radius: float, grid_n: int) -> np.ndarray:
    half = grid_n // 2
    return radius * np.arange(-half, half + 1) / (half + 1)


def _monotonicity_violation(k: KernelFamily, lam: float, grid_n: int) -> Tuple[float, List[float]]:
    """Largest sampled violation on the lattice and its witness [λ, t1, s1, t2, s2, violation]."""
    d1, d2 = k.monotonicity_radii
    ts = _symmetric_lattice(d1, grid_n)
    ss = _symmetric_lattice(d2, grid_n)
    t, s = np.meshgrid(ts, ss, indexing="ij")
    lattice = np.abs(np.broadcast_to(np.asarray(k(lam, t, s), dtype=float), t.shape))
    half = grid_n // 2
    # -1 on the negative side (|K| must not decrease toward 0), +1 on the positive side
    sign_t = np.where(np.arange(len(ts) - 1) < half, -1.0, 1.0)
    sign_s = np.where(np.arange(len(ss) - 1) < half, -1.0, 1.0)

    along_t = sign_t[:, None] * np.diff(lattice, axis=0)
    along_s = sign_s[None, :] * np.diff(lattice, axis=1)
    crossing = -(sign_t[:, None] * sign_s[None, :]) * cross_differences(lattice)

    candidates = []
    i, j = np.unravel_index(np.argmax(along_t), along_t.shape)
    candidates.append((along_t[i, j], [ts[i], ss[j], ts[i + 1], ss[j]]))
    i, j = np.unravel_index(np.argmax(along_s), along_s.shape)
    candidates.append((along_s[i, j], [ts[i], ss[j], ts[i], ss[j + 1]]))
    i, j = np.unravel_index(np.argmax(crossing), crossing.shape)
    candidates.append((crossing[i, j], [ts[i], ss[j], ts[i + 1], ss[j + 1]]))
    violation, corners = max(candidates, key=lambda c: c[0])
    return float(violation), [lam, *map(float, corners), float(violation)]


def check_f(k: KernelFamily, lambda_samples: Sequence[float] = CHECK_F_LAMBDAS, grid_n: int = CHECK_F_GRID,
            slack: float = MONOTONE_SLACK) -> ConditionReport:
    """
    Condition (f): |K_λ| non-strictly increasing toward 0 along each axis on every sign quadrant
    of (-δ₁, δ₁)×(-δ₂, δ₂), and bimonotone with cross-difference sign sign(t)·sign(s).
    """
    if k.monotonicity_radii is None:
        return _report(Condition.F, Verdict.INCONCLUSIVE, [], 0.0, "Kernel declares no monotonicity radii (δ₁, δ₂)")
    if grid_n < 8:
        raise ValueError(f"check_f needs grid_n >= 8, got {grid_n}")
    measurements = []
    worst_violation, worst_witness = -math.inf, None
    for lam in lambda_samples:
        k.require(lam)
        violation, witness = _monotonicity_violation(k, lam, grid_n)
        measurements.append([lam, violation])
        if violation > worst_violation:
            worst_violation, worst_witness = violation, witness
    margin = -max(worst_violation, 0.0)
    if worst_violation > slack:
        return _report(Condition.F, Verdict.FAIL, measurements, margin,
                       f"monotonicity broken at λ={worst_witness[0]} between "
                       f"({worst_witness[1]:.6g}, {worst_witness[2]:.6g}) and ({worst_witness[3]:.6g}, {worst_witness[4]:.6g})",
                       worst_witness)
    return _report(Condition.F, Verdict.PASS, measurements, margin,
                   f"radii {k.monotonicity_radii}, λ in {list(lambda_samples)}, {grid_n}x{grid_n} lattice")


def validate_class_a(
    k: KernelFamily,
    approach: LambdaApproach,
    *,
    probes: Sequence[Tuple[float, float]] = ((0.0, 0.0),),
    gammas: Sequence[float] = DEFAULT_GAMMAS,
    center: Tuple[float, float] = (0.0, 0.0),
    lambda_samples: Sequence[float] = CHECK_F_LAMBDAS,
    grid_n: int = CHECK_F_GRID,
    tol: float = DEFAULT_TOL,
    tol_cond: float = TOL_COND,
) -> List[ConditionReport]:
    """Reports for conditions A-F, in that order."""
    print(f"Validating class A membership of '{k.name}' on {len(approach.grid)} λ values...")
    return [
        check_a(k, approach, tol),
        check_b(k, approach, probes),
        check_c(k, center, default_c_path(center, approach), tol, tol_cond),
        check_d(k, approach, gammas, tol_cond),
        check_e(k, approach, gammas, tol, tol_cond),
        check_f(k, lambda_samples, grid_n),
    ]


def overall_verdict(verdicts: Iterable[Verdict]) -> Verdict:
    """Fail beats Inconclusive beats Pass."""
    verdicts = set(verdicts)
    if Verdict.FAIL in verdicts:
        return Verdict.FAIL
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS
