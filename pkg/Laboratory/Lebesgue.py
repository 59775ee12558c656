# Laboratory/Lebesgue.py
"""
μ-generalized Lebesgue points.

A MuPair carries densities ρ₁, ρ₂ and their integrals μ₁(h) = ∫₀ʰ ρ₁, μ₂(k) = ∫₀ᵏ ρ₂.
The quotient integrates |f(t + x₀, s + y₀) - f(x₀, y₀)| over the upper-right quadrant
[0, h]×[0, k] only and divides by μ₁(h)μ₂(k); (x₀, y₀) is a μ-generalized Lebesgue point
when the quotient tends to 0 as (h, k) → (0, 0).
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from CONFIGURATION import (
    DEFAULT_DELTA0,
    H_GRID_POINTS,
    H_GRID_RATIO,
    LEBESGUE_QUAD_TOL,
    MU_PROBES,
    TOL_LEB,
)
from Initialization import ordered_map
from Laboratory.Expressions import parse_expression
from Laboratory.Limits import geometric_grid, tends_to_zero
from Laboratory.Operator import SampleFunction
from Laboratory.Quadrature import Rect, integrate_interval, integrate_rect

Density = Callable[[np.ndarray], np.ndarray]
MuFn = Callable[[float], float]

MU_CONSISTENCY_TOL = 1e-10
DENSITY_TOL = 1e-13


class MuDefinitionError(ValueError):
    """A density whose integral is not strictly positive on (0, δ₀), or which is negative."""


class LebesgueDomainError(ValueError):
    """The quadrant [x₀, x₀ + h]×[y₀, y₀ + k] leaves the function's domain."""


@dataclass(frozen=True)
class MuPair:
    rho1: Density
    rho2: Density
    mu1: MuFn
    mu2: MuFn
    delta0: float = DEFAULT_DELTA0
    description: str = ""

    def __post_init__(self):
        if not self.delta0 > 0:
            raise MuDefinitionError(f"δ₀ must be > 0, got {self.delta0}")

    def scaled(self, c1: float, c2: float = 1.0) -> "MuPair":
        """(c1·ρ₁, c2·ρ₂) with matching μ's."""
        if c1 <= 0 or c2 <= 0:
            raise MuDefinitionError(f"Scale factors must be > 0, got {c1}, {c2}")
        rho1, rho2, mu1, mu2 = self.rho1, self.rho2, self.mu1, self.mu2
        return MuPair(
            rho1=lambda t: c1 * np.asarray(rho1(t)),
            rho2=lambda s: c2 * np.asarray(rho2(s)),
            mu1=lambda h: c1 * mu1(h),
            mu2=lambda k: c2 * mu2(k),
            delta0=self.delta0,
            description=f"{c1}·ρ₁, {c2}·ρ₂ of {self.description}",
        )


def identity_mu(delta0: float = DEFAULT_DELTA0) -> MuPair:
    """ρ₁ = ρ₂ = 1, μ₁(h) = h, μ₂(k) = k."""
    ones = lambda u: np.ones_like(np.asarray(u, dtype=float))
    return MuPair(ones, ones, float, float, delta0, "identity")


def _probes(delta0: float, count: int = MU_PROBES) -> List[float]:
    return [delta0 * i / (count + 1) for i in range(1, count + 1)]


def _integral_of(rho: Density) -> MuFn:
    def mu(h: float) -> float:
        if h == 0.0:
            return 0.0
        return integrate_interval(rho, 0.0, h, DENSITY_TOL, tol_abs_floor=1e-16).value
    return mu


def mu_from_density(
    rho1: Density,
    rho2: Density,
    delta0: float = DEFAULT_DELTA0,
    *,
    mu1: Optional[MuFn] = None,
    mu2: Optional[MuFn] = None,
    description: str = "density",
) -> MuPair:
    """
    MuPair whose μ's integrate the densities numerically (or use supplied closed forms).

    Raises:
        MuDefinitionError: a density is negative, or a μ is not > 0, at one of the probes
            δ₀·i/33; or a supplied closed form disagrees with the integral beyond 1e-10.
    """
    pair = MuPair(rho1, rho2, mu1 or _integral_of(rho1), mu2 or _integral_of(rho2), delta0, description)
    probes = np.asarray(_probes(delta0))
    for label, rho, mu, closed in (("ρ₁", rho1, pair.mu1, mu1), ("ρ₂", rho2, pair.mu2, mu2)):
        density = np.broadcast_to(np.asarray(rho(probes), dtype=float), probes.shape)
        if np.any(density < 0):
            h = float(probes[np.argmax(density < 0)])
            print(f"❌ Rejected μ: {label}({h:.6g}) < 0")
            raise MuDefinitionError(f"{label} is negative at {h:.6g}")
        for h in probes:
            value = mu(float(h))
            if not value > 0:
                print(f"❌ Rejected μ: integral of {label} is {value} at h={h:.6g}")
                raise MuDefinitionError(f"μ from {label} must be > 0 on (0, δ₀), got {value} at h={h:.6g}")
            if closed is not None:
                numeric = _integral_of(rho)(float(h))
                if abs(numeric - value) > MU_CONSISTENCY_TOL:
                    raise MuDefinitionError(
                        f"Closed-form μ for {label} disagrees with ∫ρ at h={h:.6g}: {value} vs {numeric}"
                    )
    return pair


def mu_from_expressions(rho1: str, rho2: str, delta0: float = DEFAULT_DELTA0) -> MuPair:
    """Densities written as expressions in t (ρ₁) and s (ρ₂)."""
    first = parse_expression(rho1, ("t",))
    second = parse_expression(rho2, ("s",))
    return mu_from_density(
        lambda t: first.evaluate({"t": t}),
        lambda s: second.evaluate({"s": s}),
        delta0,
        description=f"ρ₁(t) = {rho1}, ρ₂(s) = {rho2}",
    )


def _quadrants(x0: float, y0: float, h: float, k: float, symmetric: bool) -> List[Rect]:
    if not symmetric:
        return [Rect(x0, x0 + h, y0, y0 + k)]
    return [Rect(x0, x0 + h, y0, y0 + k), Rect(x0 - h, x0, y0, y0 + k),
            Rect(x0 - h, x0, y0 - k, y0), Rect(x0, x0 + h, y0 - k, y0)]


def lebesgue_quotient(
    f: SampleFunction,
    mp: MuPair,
    x0: float,
    y0: float,
    h: float,
    k: float,
    *,
    tol: float = LEBESGUE_QUAD_TOL,
    symmetric_quadrants: bool = False,
) -> float:
    """
    (1 / (μ₁(h)μ₂(k))) ∬_[0,h]×[0,k] |f(t + x₀, s + y₀) - f(x₀, y₀)| ds dt.

    symmetric_quadrants averages the four sign quadrants instead (exploratory variant).

    Raises:
        ValueError: h or k outside (0, δ₀).
        LebesgueDomainError: a quadrant leaves the domain of f.
    """
    if not (0 < h < mp.delta0 and 0 < k < mp.delta0):
        raise ValueError(f"Need 0 < h, k < δ₀={mp.delta0}, got h={h}, k={k}")
    quadrants = _quadrants(x0, y0, h, k, symmetric_quadrants)
    if f.domain.is_bounded:
        for quadrant in quadrants:
            if not f.domain.rect.covers(quadrant):
                raise LebesgueDomainError(f"Quadrant {quadrant} around ({x0}, {y0}) leaves the domain {f.domain.rect}")
    center = f.value_at(x0, y0)
    integrand = lambda t, s: np.abs(np.asarray(f.evaluate(t, s), dtype=float) - center)
    total = sum(integrate_rect(integrand, q, tol, breaks=f.breaks).value for q in quadrants)
    return total / (len(quadrants) * mp.mu1(h) * mp.mu2(k))


@dataclass
class LebesgueVerdict:
    is_point: bool
    inconclusive: bool = False
    # path label -> [(h, k, quotient), ...]
    traces: Dict[str, List[Tuple[float, float, float]]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def trace(self) -> List[Tuple[float, float, float]]:
        """All (h, k, quotient) rows, paths in order diagonal, (h, h²), (h², h)."""
        return [row for rows in self.traces.values() for row in rows]


def default_h_grid(delta0: float, count: int = H_GRID_POINTS, ratio: float = H_GRID_RATIO) -> List[float]:
    return geometric_grid(delta0 / 2.0, ratio, count)


def verify_lebesgue_point(
    f: SampleFunction,
    mp: MuPair,
    x0: float,
    y0: float,
    h_grid: Optional[Sequence[float]] = None,
    *,
    tol_leb: float = TOL_LEB,
    tol: float = LEBESGUE_QUAD_TOL,
    symmetric_quadrants: bool = False,
) -> LebesgueVerdict:
    """
    Quotient traces along (h, h), (h, h²) and (h², h); a Lebesgue point iff every trace
    ends below tol_leb with a non-increasing tail. A quadrant leaving the domain makes the
    verdict inconclusive.
    """
    grid = list(h_grid) if h_grid is not None else default_h_grid(mp.delta0)
    if not all(0 < h < mp.delta0 for h in grid):
        raise ValueError(f"h grid must lie in (0, δ₀={mp.delta0})")
    paths = {
        "diagonal": [(h, h) for h in grid],
        "h_h2": [(h, h * h) for h in grid],
        "h2_h": [(h * h, h) for h in grid],
    }
    verdict = LebesgueVerdict(is_point=True)
    if f.domain.is_bounded and mp.delta0 >= min(f.domain.rect.width, f.domain.rect.height):
        verdict.notes.append(f"δ₀={mp.delta0} is not below the side lengths of the domain")

    for label, pairs in paths.items():
        try:
            quotients = ordered_map(
                lambda hk: lebesgue_quotient(f, mp, x0, y0, hk[0], hk[1], tol=tol,
                                             symmetric_quadrants=symmetric_quadrants),
                pairs,
            )
        except LebesgueDomainError as e:
            print(f"⚠️ Lebesgue check at ({x0}, {y0}) is inconclusive: {e}")
            return LebesgueVerdict(is_point=False, inconclusive=True, traces=verdict.traces,
                                   notes=verdict.notes + [str(e)])
        verdict.traces[label] = [(h, k, q) for (h, k), q in zip(pairs, quotients)]
        if not tends_to_zero(quotients, tol_leb):
            verdict.is_point = False
            verdict.notes.append(f"{label}: quotient ends at {quotients[-1]:.6g}")

    glyph = "✅" if verdict.is_point else "❌"
    print(f"{glyph} ({x0}, {y0}) {'is' if verdict.is_point else 'is not'} a μ-generalized Lebesgue point of '{f.name}'")
    return verdict
