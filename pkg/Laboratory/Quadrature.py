# Laboratory/Quadrature.py
"""
Deterministic adaptive integration over rectangles and rectangle complements.

Each cell is integrated with a tensor Gauss-Legendre rule (order GAUSS_ORDER) and with a
lower-order tensor rule (ESTIMATE_ORDER); their difference is the cell's error estimate.
Refinement is quadtree splitting, largest estimated error first, done in batches so one
numpy call evaluates every new cell of a round. All sums use math.fsum, so the value does
not depend on the order in which cells are stored.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from CONFIGURATION import (
    DEFAULT_TOL,
    ESTIMATE_ORDER,
    GAUSS_ORDER,
    MAX_CELLS,
    MAX_DEPTH,
    TOL_ABS_FLOOR,
)

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]
Breaks = Tuple[Sequence[float], Sequence[float]]


class QuadratureError(ArithmeticError):
    """Non-finite integrand value; ``point`` is the offending (t, s)."""

    def __init__(self, message: str, point: Tuple[float, float]):
        super().__init__(f"{message} at (t={point[0]!r}, s={point[1]!r})")
        self.point = point


@dataclass(frozen=True)
class EdgeFlags:
    """Inclusion of each edge of ⟨a,b⟩×⟨c,d⟩. Integrals never depend on them."""
    left: bool = True
    right: bool = True
    bottom: bool = True
    top: bool = True


@dataclass(frozen=True)
class Rect:
    a: float
    b: float
    c: float
    d: float
    edge_flags: EdgeFlags = field(default_factory=EdgeFlags)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Rect bound {name} must be finite, got {getattr(self, name)}")
        if self.a > self.b or self.c > self.d:
            raise ValueError(f"Rect requires a <= b and c <= d, got [{self.a}, {self.b}]x[{self.c}, {self.d}]")

    @classmethod
    def square(cls, center_t: float, center_s: float, half: float) -> "Rect":
        return cls(center_t - half, center_t + half, center_s - half, center_s + half)

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def height(self) -> float:
        return self.d - self.c

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, t, s) -> np.ndarray:
        """Membership honouring edge_flags (closed, semi-closed or open sides)."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        flags = self.edge_flags
        in_t = (t >= self.a if flags.left else t > self.a) & (t <= self.b if flags.right else t < self.b)
        in_s = (s >= self.c if flags.bottom else s > self.c) & (s <= self.d if flags.top else s < self.d)
        return in_t & in_s

    def covers(self, other: "Rect", slack: float = 0.0) -> bool:
        return (self.a - slack <= other.a and other.b <= self.b + slack
                and self.c - slack <= other.c and other.d <= self.d + slack)

    def intersect(self, other: "Rect") -> Optional["Rect"]:
        """Overlap with positive area, or None."""
        a, b = max(self.a, other.a), min(self.b, other.b)
        c, d = max(self.c, other.c), min(self.d, other.d)
        if a >= b or c >= d:
            return None
        return Rect(a, b, c, d)

    def hull(self, other: "Rect") -> "Rect":
        return Rect(min(self.a, other.a), max(self.b, other.b), min(self.c, other.c), max(self.d, other.d))

    def shifted(self, dt: float, ds: float) -> "Rect":
        return Rect(self.a + dt, self.b + dt, self.c + ds, self.d + ds, self.edge_flags)

    def quadrants(self) -> Tuple["Rect", "Rect", "Rect", "Rect"]:
        mt, ms = 0.5 * (self.a + self.b), 0.5 * (self.c + self.d)
        return (Rect(self.a, mt, self.c, ms), Rect(mt, self.b, self.c, ms),
                Rect(self.a, mt, ms, self.d), Rect(mt, self.b, ms, self.d))


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int
    depth_exceeded: bool = False
    cell_limit_hit: bool = False

    @property
    def converged(self) -> bool:
        return not (self.depth_exceeded or self.cell_limit_hit)


@lru_cache(maxsize=None)
def _rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, np.outer(weights, weights)


def _sample(f: Integrand, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    values = np.asarray(f(t, s), dtype=float)
    if values.shape != t.shape:
        values = np.broadcast_to(values, t.shape)
    finite = np.isfinite(values)
    if not finite.all():
        index = tuple(np.argwhere(~finite)[0])
        raise QuadratureError(f"Integrand returned {values[index]}", (float(t[index]), float(s[index])))
    return values


def _integrate_cells(f: Integrand, cells: np.ndarray, order: int, estimate_order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor-rule values and |high - low| error estimates for a batch of cells (m, 4)."""
    hi_nodes, hi_weights = _rule(order)
    lo_nodes, lo_weights = _rule(estimate_order)
    half_t = 0.5 * (cells[:, 1] - cells[:, 0])
    half_s = 0.5 * (cells[:, 3] - cells[:, 2])
    mid_t = 0.5 * (cells[:, 1] + cells[:, 0])
    mid_s = 0.5 * (cells[:, 3] + cells[:, 2])

    def grid(nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = mid_t[:, None, None] + half_t[:, None, None] * nodes[None, :, None]
        s = mid_s[:, None, None] + half_s[:, None, None] * nodes[None, None, :]
        t, s = np.broadcast_arrays(t, s)
        return t.reshape(len(cells), -1), s.reshape(len(cells), -1)

    # One integrand call covers both rules
    t_hi, s_hi = grid(hi_nodes)
    t_lo, s_lo = grid(lo_nodes)
    values = _sample(f, np.concatenate([t_hi, t_lo], axis=1), np.concatenate([s_hi, s_lo], axis=1))
    n_hi = order * order
    jacobian = half_t * half_s
    high = jacobian * (values[:, :n_hi] @ hi_weights.ravel())
    low = jacobian * (values[:, n_hi:] @ lo_weights.ravel())
    return high, np.abs(high - low)


def _initial_cells(r: Rect, breaks: Optional[Breaks]) -> np.ndarray:
    t_cuts, s_cuts = [r.a, r.b], [r.c, r.d]
    if breaks is not None:
        t_cuts += [float(v) for v in breaks[0] if r.a < v < r.b]
        s_cuts += [float(v) for v in breaks[1] if r.c < v < r.d]
    t_cuts = sorted(set(t_cuts))
    s_cuts = sorted(set(s_cuts))
    return np.array([[t0, t1, s0, s1]
                     for t0, t1 in zip(t_cuts, t_cuts[1:])
                     for s0, s1 in zip(s_cuts, s_cuts[1:])], dtype=float)


def _split(cells: np.ndarray) -> np.ndarray:
    mt = 0.5 * (cells[:, 0] + cells[:, 1])
    ms = 0.5 * (cells[:, 2] + cells[:, 3])
    a, b, c, d = cells.T
    children = np.stack([
        np.stack([a, mt, c, ms], axis=1),
        np.stack([mt, b, c, ms], axis=1),
        np.stack([a, mt, ms, d], axis=1),
        np.stack([mt, b, ms, d], axis=1),
    ], axis=1)
    return children.reshape(-1, 4)


def integrate_rect(
    f: Integrand,
    r: Rect,
    tol: float = DEFAULT_TOL,
    *,
    breaks: Optional[Breaks] = None,
    tol_abs_floor: float = TOL_ABS_FLOOR,
    max_depth: int = MAX_DEPTH,
    max_cells: int = MAX_CELLS,
    order: int = GAUSS_ORDER,
    estimate_order: int = ESTIMATE_ORDER,
) -> QuadResult:
    """
    Adaptive integral of f(t, s) over r.

    f receives numpy arrays of nodes and must return values of the same shape (or a scalar).
    Refinement stops once error_estimate <= max(tol*|value|, tol_abs_floor). breaks are known
    discontinuity lines (t values, s values) used to seed the initial partition.
    Exceeding max_depth or max_cells returns the current estimate with a flag set.

    Raises:
        ValueError: tol <= 0.
        QuadratureError: f produced NaN or inf.
    """
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if r.area == 0.0:
        return QuadResult(0.0, 0.0, 0)

    per_cell = order * order + estimate_order * estimate_order
    cells = _initial_cells(r, breaks)
    depth = np.zeros(len(cells), dtype=int)
    values, errors = _integrate_cells(f, cells, order, estimate_order)
    evaluations = len(cells) * per_cell
    frozen_values: list[float] = []
    frozen_errors: list[float] = []
    depth_exceeded = cell_limit_hit = False

    while True:
        active_error = math.fsum(errors)
        total_value = math.fsum(values) + math.fsum(frozen_values)
        total_error = active_error + math.fsum(frozen_errors)
        target = max(tol * abs(total_value), tol_abs_floor)
        if total_error <= target:
            break
        if len(cells) == 0 or (frozen_errors and active_error <= 0.5 * target):
            break

        # Largest error first: split the shortest prefix that leaves at most target/2 behind
        ranked = np.lexsort((np.arange(len(errors)), -errors))
        remaining = total_error - np.cumsum(errors[ranked])
        count = int(np.searchsorted(-remaining, -0.5 * target)) + 1
        chosen = ranked[:min(count, len(ranked))]

        too_deep = chosen[depth[chosen] >= max_depth]
        if len(too_deep):
            depth_exceeded = True
            frozen_values.extend(values[too_deep].tolist())
            frozen_errors.extend(errors[too_deep].tolist())
        to_split = chosen[depth[chosen] < max_depth]

        keep = np.ones(len(cells), dtype=bool)
        keep[chosen] = False
        if len(to_split) == 0:
            cells, values, errors, depth = cells[keep], values[keep], errors[keep], depth[keep]
            continue
        if len(cells) + 3 * len(to_split) > max_cells:
            cell_limit_hit = True
            break

        children = _split(cells[to_split])
        child_values, child_errors = _integrate_cells(f, children, order, estimate_order)
        evaluations += len(children) * per_cell
        cells = np.concatenate([cells[keep], children])
        values = np.concatenate([values[keep], child_values])
        errors = np.concatenate([errors[keep], child_errors])
        depth = np.concatenate([depth[keep], np.repeat(depth[to_split] + 1, 4)])

    value = math.fsum(values.tolist() + frozen_values)
    error = math.fsum(errors.tolist() + frozen_errors)
    return QuadResult(value, error, evaluations, depth_exceeded, cell_limit_hit)


def frame_rects(inner: Rect, outer: Rect) -> list[Rect]:
    """outer minus inner as at most four non-overlapping frame rectangles."""
    frames = [
        Rect(outer.a, outer.b, outer.c, inner.c),  # bottom
        Rect(outer.a, outer.b, inner.d, outer.d),  # top
        Rect(outer.a, inner.a, inner.c, inner.d),  # left
        Rect(inner.b, outer.b, inner.c, inner.d),  # right
    ]
    return [frame for frame in frames if frame.area > 0.0]


def integrate_complement(
    f: Integrand,
    inner: Rect,
    effective_outer: Rect,
    tol: float = DEFAULT_TOL,
    *,
    breaks: Optional[Breaks] = None,
    **options,
) -> QuadResult:
    """Integral over effective_outer minus inner, summed over its frame rectangles."""
    if not effective_outer.covers(inner):
        raise ValueError(f"inner {inner} must lie inside effective_outer {effective_outer}")
    parts = [integrate_rect(f, frame, tol, breaks=breaks, **options) for frame in frame_rects(inner, effective_outer)]
    return QuadResult(
        value=math.fsum(p.value for p in parts),
        error_estimate=math.fsum(p.error_estimate for p in parts),
        evaluations=sum(p.evaluations for p in parts),
        depth_exceeded=any(p.depth_exceeded for p in parts),
        cell_limit_hit=any(p.cell_limit_hit for p in parts),
    )


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    breaks: Sequence[float] = (),
    **options,
) -> QuadResult:
    """1D integral of f over [a, b], run on the unit strip [a, b]x[0, 1] of the 2D engine."""
    if a > b:
        raise ValueError(f"integrate_interval requires a <= b, got [{a}, {b}]")
    return integrate_rect(lambda t, s: f(t), Rect(a, b, 0.0, 1.0), tol, breaks=(breaks, ()), **options)
