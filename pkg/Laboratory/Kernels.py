# Laboratory/Kernels.py
"""Kernel families K_λ(t, s) and the built-in catalog (box, gauss, signed_asym)."""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.special import erfcinv

from CONFIGURATION import MAX_EFFECTIVE_RADIUS, RING_LATTICE, RING_TOL, TAIL_EPSILON
from Laboratory.Expressions import Expression, parse_expression
from Laboratory.Quadrature import Breaks, Integrand, Rect, integrate_complement

KernelFn = Callable[[float, np.ndarray, np.ndarray], np.ndarray]
SupportMap = Callable[[float], Optional[Rect]]

KERNEL_VARIABLES = ("lambda", "t", "s")


@dataclass(frozen=True)
class IndexSet:
    """Λ ⊂ [0, ∞) with accumulation point λ₀ (math.inf stands for λ₀ = ∞)."""
    lambda_min: float
    lambda_max: float = math.inf
    accumulation: float = math.inf

    def __post_init__(self):
        if self.lambda_min < 0:
            raise ValueError(f"Index set must be non-negative, got lambda_min={self.lambda_min}")
        if self.lambda_min > self.lambda_max:
            raise ValueError(f"lambda_min {self.lambda_min} exceeds lambda_max {self.lambda_max}")
        if math.isinf(self.accumulation):
            if not math.isinf(self.lambda_max):
                raise ValueError("λ₀ = ∞ requires an unbounded index set")
        elif not self.lambda_min <= self.accumulation <= self.lambda_max:
            raise ValueError(
                f"λ₀={self.accumulation} is outside the closure of [{self.lambda_min}, {self.lambda_max}]"
            )

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.accumulation)

    def contains(self, lam: float) -> bool:
        return self.lambda_min <= lam <= self.lambda_max


@dataclass(frozen=True)
class SymmetryFlags:
    """Claims about the family; validators test them, algorithms never rely on them."""
    even_t: bool = False
    even_s: bool = False
    nonnegative: bool = False


def _unbounded(lam: float) -> Optional[Rect]:
    return None


@dataclass(frozen=True)
class KernelFamily:
    name: str
    evaluate: KernelFn
    index_set: IndexSet
    support_hint: SupportMap = _unbounded
    l1_bound_claim: Optional[float] = None
    monotonicity_radii: Optional[Tuple[float, float]] = None
    symmetry_flags: SymmetryFlags = field(default_factory=SymmetryFlags)
    # (λ, ε) -> R with tail mass of |K_λ| outside [-R, R]^2 below ε
    tail_radius: Optional[Callable[[float, float], float]] = None
    expression: Optional[str] = None

    def require(self, lam: float) -> None:
        if not self.index_set.contains(lam):
            raise ValueError(
                f"λ={lam} is outside the index set [{self.index_set.lambda_min}, {self.index_set.lambda_max}] of '{self.name}'"
            )

    def __call__(self, lam: float, t, s) -> np.ndarray:
        return self.evaluate(lam, t, s)

    def at(self, lam: float, dt: float = 0.0, ds: float = 0.0) -> Integrand:
        """(t, s) -> K_λ(t - dt, s - ds)."""
        return lambda t, s: self.evaluate(lam, np.asarray(t) - dt, np.asarray(s) - ds)

    def absolute(self, lam: float, dt: float = 0.0, ds: float = 0.0) -> Integrand:
        kernel = self.at(lam, dt, ds)
        return lambda t, s: np.abs(kernel(t, s))

    def peak(self, lam: float) -> float:
        """|K_λ(0, 0)|."""
        return abs(float(self.evaluate(lam, np.float64(0.0), np.float64(0.0))))

    def effective_support(self, lam: float, eps_tail: float = TAIL_EPSILON) -> Rect:
        """support_hint when known, else [-R, R]^2 with tail mass of |K_λ| below eps_tail."""
        hint = self.support_hint(lam)
        if hint is not None:
            return hint
        if self.tail_radius is not None:
            radius = self.tail_radius(lam, eps_tail)
        else:
            radius = estimate_tail_radius(self, lam, eps_tail)
        return Rect(-radius, radius, -radius, radius)

    def breaks(self, lam: float, dt: float = 0.0, ds: float = 0.0) -> Breaks:
        """Known discontinuity/kink lines of K_λ(t - dt, s - ds): the axes and the support edges."""
        t_lines, s_lines = [dt], [ds]
        hint = self.support_hint(lam)
        if hint is not None:
            t_lines += [hint.a + dt, hint.b + dt]
            s_lines += [hint.c + ds, hint.d + ds]
        return t_lines, s_lines


@lru_cache(maxsize=256)
def estimate_tail_radius(kernel: KernelFamily, lam: float, eps_tail: float) -> float:
    """
    Smallest R in 1, 2, 4, ... with less than eps_tail of |K_λ| between [-R, R]^2 and
    [-MAX_EFFECTIVE_RADIUS, MAX_EFFECTIVE_RADIUS]^2.

    Every doubling ring out to the cap is integrated, so mass beyond an empty ring still counts.
    Rings are seeded with a lattice of spacing R/4; features much narrower than that can go unseen.
    """
    t_axes, s_axes = kernel.breaks(lam)
    radii: list[float] = []
    masses: list[float] = []
    radius = 1.0
    while radius < MAX_EFFECTIVE_RADIUS:
        outer = min(2.0 * radius, MAX_EFFECTIVE_RADIUS)
        lattice = np.linspace(-2.0 * radius, 2.0 * radius, RING_LATTICE + 1).tolist()
        ring = integrate_complement(
            kernel.absolute(lam),
            Rect(-radius, radius, -radius, radius),
            Rect(-outer, outer, -outer, outer),
            tol=RING_TOL,
            tol_abs_floor=eps_tail * 1e-3,
            breaks=(list(t_axes) + lattice, list(s_axes) + lattice),
        )
        radii.append(radius)
        masses.append(ring.value)
        radius *= 2.0
    for i, radius in enumerate(radii):
        if math.fsum(masses[i:]) < eps_tail:
            return radius
    print(f"⚠️ Effective support of '{kernel.name}' at λ={lam} capped at R={MAX_EFFECTIVE_RADIUS}.")
    return MAX_EFFECTIVE_RADIUS


def _gauss(lam, t, s):
    return (lam / math.pi) * np.exp(-lam * (np.square(t) + np.square(s)))


def _gauss_radius(lam: float, eps_tail: float) -> float:
    # 1 - erf(√λ R)^2 <= 2 erfc(√λ R) = eps_tail / 2
    return float(erfcinv(eps_tail / 4.0)) / math.sqrt(lam)


def box_kernel() -> KernelFamily:
    """K_λ = λ² on the closed square [0, 1/λ]², 0 elsewhere; Λ = [1, ∞), λ₀ = ∞."""

    def evaluate(lam, t, s):
        side = 1.0 / lam
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        inside = (t >= 0.0) & (t <= side) & (s >= 0.0) & (s <= side)
        return np.where(inside, lam * lam, 0.0)

    return KernelFamily(
        name="box",
        evaluate=evaluate,
        index_set=IndexSet(1.0),
        support_hint=lambda lam: Rect(0.0, 1.0 / lam, 0.0, 1.0 / lam),
        l1_bound_claim=1.0,
        monotonicity_radii=(1.0, 1.0),
        symmetry_flags=SymmetryFlags(even_t=False, even_s=False, nonnegative=True),
        expression="lambda^2 * ind(0<=t<=1/lambda) * ind(0<=s<=1/lambda)",
    )


def gauss_weierstrass_kernel() -> KernelFamily:
    """W_λ = (λ/π) exp(-λ(t² + s²)); unit mass, unbounded support."""
    return KernelFamily(
        name="gauss",
        evaluate=_gauss,
        index_set=IndexSet(1.0),
        l1_bound_claim=1.0,
        monotonicity_radii=(1.0, 1.0),
        symmetry_flags=SymmetryFlags(even_t=True, even_s=True, nonnegative=True),
        tail_radius=_gauss_radius,
        expression="(lambda/pi)*exp(-lambda*(t^2+s^2))",
    )


def signed_asymmetric_kernel() -> KernelFamily:
    """S_λ = 2 W_λ(t, s) - W_{λ/2}(t - 1/λ, s): signed, not even, unit mass, ‖S_λ‖₁ <= 3."""

    def evaluate(lam, t, s):
        t = np.asarray(t, dtype=float)
        return 2.0 * _gauss(lam, t, s) - _gauss(lam / 2.0, t - 1.0 / lam, s)

    def radius(lam: float, eps_tail: float) -> float:
        return max(_gauss_radius(lam, eps_tail / 4.0), 1.0 / lam + _gauss_radius(lam / 2.0, eps_tail / 4.0))

    return KernelFamily(
        name="signed_asym",
        evaluate=evaluate,
        index_set=IndexSet(1.0),
        l1_bound_claim=3.0,
        monotonicity_radii=(1.0, 1.0),
        symmetry_flags=SymmetryFlags(even_t=False, even_s=True, nonnegative=False),
        tail_radius=radius,
        expression="2*(lambda/pi)*exp(-lambda*(t^2+s^2)) - (lambda/(2*pi))*exp(-(lambda/2)*((t-1/lambda)^2+s^2))",
    )


def support_from_expressions(a: str, b: str, c: str, d: str) -> SupportMap:
    """Rectangle-valued support map whose four bounds are expressions in λ."""
    bounds = [parse_expression(text, ("lambda",)) for text in (a, b, c, d)]

    def support(lam: float) -> Rect:
        return Rect(*(bound.scalar(**{"lambda": lam}) for bound in bounds))

    return support


def kernel_from_expression(
    expr: str,
    index_set: IndexSet,
    support: Optional[SupportMap] = None,
    *,
    name: str = "expression",
    l1_bound_claim: Optional[float] = None,
    monotonicity_radii: Optional[Tuple[float, float]] = None,
    symmetry_flags: Optional[SymmetryFlags] = None,
) -> KernelFamily:
    """
    Kernel family interpreting an expression over λ, t, s.

    Raises:
        ExpressionSyntaxError: expr does not parse (carries the position).
    Evaluating may raise ExpressionEvaluationError carrying (λ, t, s) on division by zero.
    """
    parsed: Expression = parse_expression(expr, KERNEL_VARIABLES)

    def evaluate(lam, t, s):
        return parsed.evaluate({"lambda": lam, "t": t, "s": s})

    return KernelFamily(
        name=name,
        evaluate=evaluate,
        index_set=index_set,
        support_hint=support if support is not None else _unbounded,
        l1_bound_claim=l1_bound_claim,
        monotonicity_radii=monotonicity_radii,
        symmetry_flags=symmetry_flags or SymmetryFlags(),
        expression=expr,
    )


KERNEL_CATALOG: Dict[str, Callable[[], KernelFamily]] = {
    "box": box_kernel,
    "gauss": gauss_weierstrass_kernel,
    "signed_asym": signed_asymmetric_kernel,
}


def catalog_kernel(name: str) -> KernelFamily:
    if name not in KERNEL_CATALOG:
        raise ValueError(f"Unknown kernel '{name}'. Available: {', '.join(sorted(KERNEL_CATALOG))}")
    return KERNEL_CATALOG[name]()
