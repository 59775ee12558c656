# Laboratory/Operator.py
"""
The operator L_λ(f; x, y) = ∬_D f(t, s) K_λ(t - x, s - y) ds dt on a bounded rectangle D
or on the full plane, the zero extension g of f, and the L1 bound checks ‖L_λ f‖₁ <= M‖f‖₁.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from CONFIGURATION import (
    NORM_GRID,
    NORM_INNER_TOL,
    OPERATOR_TOL,
)
from Initialization import ordered_map
from Laboratory.Expressions import parse_expression
from Laboratory.Kernels import KernelFamily
from Laboratory.Quadrature import Breaks, Integrand, Rect, integrate_rect

ClosedForm = Callable[[str, float, float, float], Optional[float]]

UNIT_SQUARE = Rect(0.0, 1.0, 0.0, 1.0)
CENTERED_SQUARE = Rect(-1.0, 1.0, -1.0, 1.0)


@dataclass(frozen=True)
class DomainSpec:
    """Bounded(rect) when rect is set, FullPlane otherwise."""
    rect: Optional[Rect] = None

    def __post_init__(self):
        if self.rect is not None and (self.rect.width <= 0 or self.rect.height <= 0):
            raise ValueError(f"Bounded domain must have positive side lengths, got {self.rect}")

    @classmethod
    def bounded(cls, rect: Rect) -> "DomainSpec":
        return cls(rect)

    @classmethod
    def full_plane(cls) -> "DomainSpec":
        return cls(None)

    @property
    def is_bounded(self) -> bool:
        return self.rect is not None


@dataclass(frozen=True)
class KnownPoint:
    x0: float
    y0: float
    value: float
    is_mu_lebesgue: bool


@dataclass(frozen=True)
class SampleFunction:
    name: str
    evaluate: Integrand
    domain: DomainSpec
    known_points: Tuple[KnownPoint, ...] = ()
    closed_form_convolution: Optional[ClosedForm] = None
    breaks: Breaks = ((), ())
    # Full plane only: |f| carries less than 1e-12 outside this rectangle
    effective_support: Optional[Rect] = None
    expression: Optional[str] = None

    def __post_init__(self):
        if not self.domain.is_bounded and self.effective_support is None:
            raise ValueError(f"Full-plane function '{self.name}' needs an effective support rectangle")

    def integration_region(self) -> Rect:
        return self.domain.rect if self.domain.is_bounded else self.effective_support

    def value_at(self, x0: float, y0: float) -> float:
        """f(x0, y0), with known_points overriding the representative value."""
        for point in self.known_points:
            if point.x0 == x0 and point.y0 == y0:
                return point.value
        return float(self.evaluate(np.float64(x0), np.float64(y0)))

    def contains(self, t: float, s: float) -> bool:
        return bool(self.domain.rect.contains(t, s)) if self.domain.is_bounded else True


def _merge_breaks(*groups: Breaks) -> Breaks:
    t_lines: List[float] = []
    s_lines: List[float] = []
    for t_part, s_part in groups:
        t_lines.extend(t_part)
        s_lines.extend(s_part)
    return sorted(set(t_lines)), sorted(set(s_lines))


def zero_extend(f: SampleFunction) -> Integrand:
    """g = f on D and 0 on ℝ² \\ D; the edge flags of D decide boundary points."""
    if not f.domain.is_bounded:
        raise ValueError(f"zero_extend needs a bounded domain, '{f.name}' lives on the full plane")
    rect = f.domain.rect

    def g(t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        inside = rect.contains(t, s)
        out = np.zeros(t.shape)
        if inside.any():
            out[inside] = np.broadcast_to(np.asarray(f.evaluate(t[inside], s[inside]), dtype=float), out[inside].shape)
        return out

    return g


def apply(
    k: KernelFamily,
    f: SampleFunction,
    lam: float,
    x: float,
    y: float,
    tol: float = OPERATOR_TOL,
    *,
    clip_to_support: bool = True,
) -> float:
    """
    L_λ(f; x, y).

    With clip_to_support the integral runs over D ∩ (effective support of K_λ shifted to (x, y));
    otherwise over all of D with the kernel's support edges as breakpoints. Both give the
    same value; an empty intersection returns exactly 0.
    """
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    k.require(lam)
    region = f.integration_region()
    kernel_region = k.effective_support(lam).shifted(x, y)

    def integrand(t, s):
        return f.evaluate(t, s) * k.evaluate(lam, t - x, s - y)

    breaks = _merge_breaks(f.breaks, k.breaks(lam, x, y))
    if clip_to_support or not f.domain.is_bounded:
        clipped = region.intersect(kernel_region)
        if clipped is None:
            return 0.0
        region = clipped
    return integrate_rect(integrand, region, tol, breaks=breaks).value


def l1_norm(f: SampleFunction, tol: float = OPERATOR_TOL) -> float:
    """‖f‖₁ over the domain (or the effective support on the full plane)."""
    result = integrate_rect(lambda t, s: np.abs(f.evaluate(t, s)), f.integration_region(), tol, breaks=f.breaks)
    if not math.isfinite(result.value):
        raise ValueError(f"|{f.name}| is not integrable on its domain")
    return result.value


def l1_norm_of_image(
    k: KernelFamily,
    f: SampleFunction,
    lam: float,
    tol: float = NORM_INNER_TOL,
    *,
    grid: int = NORM_GRID,
) -> float:
    """∬_D |L_λ(f; x, y)| dy dx on a fixed grid×grid Gauss-Legendre outer rule, apply inside."""
    if not f.domain.is_bounded:
        raise ValueError("l1_norm_of_image is defined for bounded domains")
    k.require(lam)
    rect = f.domain.rect
    nodes, weights = np.polynomial.legendre.leggauss(grid)
    half_x, half_y = 0.5 * rect.width, 0.5 * rect.height
    xs = 0.5 * (rect.a + rect.b) + half_x * nodes
    ys = 0.5 * (rect.c + rect.d) + half_y * nodes
    points = [(i, j) for i in range(grid) for j in range(grid)]

    values = ordered_map(lambda p: apply(k, f, lam, float(xs[p[0]]), float(ys[p[1]]), tol), points)
    terms = [weights[i] * weights[j] * abs(v) for (i, j), v in zip(points, values)]
    return half_x * half_y * math.fsum(terms)


@dataclass(frozen=True)
class NormEstimate:
    bound: Optional[float]
    ratio_max: float
    rows: Tuple[Tuple[str, float, float, float], ...]  # (function, ‖L f‖₁, ‖f‖₁, ratio)

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.ratio_max <= self.bound


def operator_norm_estimate(
    k: KernelFamily,
    functions: Sequence[SampleFunction],
    lam: float,
    tol: float = NORM_INNER_TOL,
    *,
    grid: int = NORM_GRID,
) -> NormEstimate:
    """Lower estimate of ‖L_λ‖ on L1(D): the largest ratio ‖L_λ f‖₁ / ‖f‖₁ over the functions."""
    rows = []
    for f in functions:
        f_norm = l1_norm(f)
        if f_norm == 0.0:
            continue
        image_norm = l1_norm_of_image(k, f, lam, tol, grid=grid)
        rows.append((f.name, image_norm, f_norm, image_norm / f_norm))
    if not rows:
        raise ValueError("operator_norm_estimate needs at least one function with ‖f‖₁ > 0")
    return NormEstimate(k.l1_bound_claim, max(row[3] for row in rows), tuple(rows))


def linear_combination(alpha: float, f: SampleFunction, beta: float, h: SampleFunction) -> SampleFunction:
    """α f + β h on the common domain."""
    if f.domain != h.domain:
        raise ValueError(f"'{f.name}' and '{h.name}' live on different domains")
    return SampleFunction(
        name=f"{alpha}*{f.name}+{beta}*{h.name}",
        evaluate=lambda t, s: alpha * np.asarray(f.evaluate(t, s)) + beta * np.asarray(h.evaluate(t, s)),
        domain=f.domain,
        breaks=_merge_breaks(f.breaks, h.breaks),
        effective_support=f.effective_support,
    )


# --- Sample function catalog ---

def _box_inside(rect: Rect, lam: float, x: float, y: float) -> bool:
    side = 1.0 / lam
    return rect.a <= x and x + side <= rect.b and rect.c <= y and y + side <= rect.d


def _box_closed_form(rect: Rect, formula: Callable[[float, float, float], float]) -> ClosedForm:
    def closed_form(kernel_name: str, lam: float, x: float, y: float) -> Optional[float]:
        if kernel_name != "box" or not _box_inside(rect, lam, x, y):
            return None
        return formula(lam, x, y)
    return closed_form


def constant_function(value: float = 5.0, rect: Rect = UNIT_SQUARE) -> SampleFunction:
    return SampleFunction(
        name="constant",
        evaluate=lambda t, s: np.full(np.broadcast(t, s).shape, float(value)),
        domain=DomainSpec.bounded(rect),
        closed_form_convolution=_box_closed_form(rect, lambda lam, x, y: float(value)),
        expression=repr(float(value)),
    )


def linear_t_function(rect: Rect = UNIT_SQUARE) -> SampleFunction:
    return SampleFunction(
        name="linear_t",
        evaluate=lambda t, s: np.asarray(t, dtype=float) + 0.0 * np.asarray(s),
        domain=DomainSpec.bounded(rect),
        closed_form_convolution=_box_closed_form(rect, lambda lam, x, y: x + 0.5 / lam),
        expression="t",
    )


def product_ts_function(rect: Rect = UNIT_SQUARE) -> SampleFunction:
    return SampleFunction(
        name="product_ts",
        evaluate=lambda t, s: np.asarray(t, dtype=float) * np.asarray(s, dtype=float),
        domain=DomainSpec.bounded(rect),
        closed_form_convolution=_box_closed_form(rect, lambda lam, x, y: (x + 0.5 / lam) * (y + 0.5 / lam)),
        expression="t*s",
    )


def quadratic_function(rect: Rect = UNIT_SQUARE) -> SampleFunction:
    def second_moment(u: float, lam: float) -> float:
        return u * u + u / lam + 1.0 / (3.0 * lam * lam)

    return SampleFunction(
        name="quadratic",
        evaluate=lambda t, s: np.square(t) + np.square(s),
        domain=DomainSpec.bounded(rect),
        closed_form_convolution=_box_closed_form(rect, lambda lam, x, y: second_moment(x, lam) + second_moment(y, lam)),
        expression="t^2+s^2",
    )


def sin_product_function(rect: Rect = UNIT_SQUARE) -> SampleFunction:
    return SampleFunction(
        name="sin_product",
        evaluate=lambda t, s: np.sin(np.pi * np.asarray(t)) * np.sin(np.pi * np.asarray(s)),
        domain=DomainSpec.bounded(rect),
        expression="sin(pi*t)*sin(pi*s)",
    )


def indicator_function(support: Rect = Rect(0.0, 0.5, 0.0, 0.5), rect: Rect = UNIT_SQUARE) -> SampleFunction:
    """Indicator of a sub-rectangle; its edges are published as breakpoints."""
    return SampleFunction(
        name="indicator",
        evaluate=lambda t, s: np.where(support.contains(t, s), 1.0, 0.0),
        domain=DomainSpec.bounded(rect),
        breaks=((support.a, support.b), (support.c, support.d)),
    )


def quadrant_indicator_function(rect: Rect = CENTERED_SQUARE) -> SampleFunction:
    """1 on {t > 0, s > 0}; at its corner (0, 0) the value is 0 and the point is not a Lebesgue point."""
    return SampleFunction(
        name="quadrant",
        evaluate=lambda t, s: np.where((np.asarray(t) > 0) & (np.asarray(s) > 0), 1.0, 0.0),
        domain=DomainSpec.bounded(rect),
        known_points=(KnownPoint(0.0, 0.0, 0.0, False),),
        breaks=((0.0,), (0.0,)),
        expression="ind(t>0 & s>0)",
    )


def sqrt_abs_t_function(rect: Rect = CENTERED_SQUARE) -> SampleFunction:
    return SampleFunction(
        name="sqrt_abs_t",
        evaluate=lambda t, s: np.sqrt(np.abs(t)) + 0.0 * np.asarray(s),
        domain=DomainSpec.bounded(rect),
        known_points=(KnownPoint(0.0, 0.0, 0.0, True),),
        breaks=((0.0,), ()),
        expression="sqrt(abs(t))",
    )


def gaussian_bump_function(radius: float = 6.0) -> SampleFunction:
    """exp(-(t² + s²)) on the full plane; mass outside [-6, 6]² is below 1e-15."""
    return SampleFunction(
        name="gaussian_bump",
        evaluate=lambda t, s: np.exp(-(np.square(t) + np.square(s))),
        domain=DomainSpec.full_plane(),
        effective_support=Rect(-radius, radius, -radius, radius),
        expression="exp(-(t^2+s^2))",
    )


def function_from_expression(
    expr: str,
    domain: DomainSpec,
    *,
    name: str = "expression",
    breaks: Breaks = ((), ()),
    effective_support: Optional[Rect] = None,
    known_points: Tuple[KnownPoint, ...] = (),
) -> SampleFunction:
    """Sample function from an expression in t, s; |f| must integrate to a finite value."""
    parsed = parse_expression(expr, ("t", "s"))
    f = SampleFunction(
        name=name,
        evaluate=lambda t, s: parsed.evaluate({"t": t, "s": s}),
        domain=domain,
        known_points=known_points,
        breaks=breaks,
        effective_support=effective_support,
        expression=expr,
    )
    l1_norm(f, tol=1e-8)
    return f


FUNCTION_CATALOG: Dict[str, Callable[[], SampleFunction]] = {
    "constant": constant_function,
    "linear_t": linear_t_function,
    "product_ts": product_ts_function,
    "quadratic": quadratic_function,
    "sin_product": sin_product_function,
    "indicator": indicator_function,
    "quadrant": quadrant_indicator_function,
    "sqrt_abs_t": sqrt_abs_t_function,
    "gaussian_bump": gaussian_bump_function,
}


def catalog_function(name: str, **params) -> SampleFunction:
    if name not in FUNCTION_CATALOG:
        raise ValueError(f"Unknown function '{name}'. Available: {', '.join(sorted(FUNCTION_CATALOG))}")
    return FUNCTION_CATALOG[name](**params)
