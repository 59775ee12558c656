# Laboratory/Limits.py
"""
Finite-grid stand-ins for limits. "x_j -> 0" becomes: final value below a tolerance and a
non-increasing tail window. Every verdict module uses these same proxies.
"""

from typing import List, Sequence

from CONFIGURATION import MONOTONE_SLACK, TREND_WINDOW

BOUNDED_GROWTH_FACTOR = 10.0


def geometric_grid(start: float, ratio: float, count: int) -> List[float]:
    if count < 1:
        raise ValueError(f"Grid needs at least one point, got count={count}")
    if start <= 0 or ratio <= 0 or ratio == 1:
        raise ValueError(f"Geometric grid needs start > 0 and ratio > 0, ratio != 1 (got {start}, {ratio})")
    return [start * ratio ** j for j in range(count)]


def tail_non_increasing(values: Sequence[float], window: int = TREND_WINDOW, slack: float = MONOTONE_SLACK) -> bool:
    tail = list(values)[-window:]
    return all(later <= earlier + slack for earlier, later in zip(tail, tail[1:]))


def tail_non_decreasing(values: Sequence[float], window: int = TREND_WINDOW, slack: float = MONOTONE_SLACK) -> bool:
    tail = list(values)[-window:]
    return all(later >= earlier - slack for earlier, later in zip(tail, tail[1:]))


def tends_to_zero(
    values: Sequence[float],
    tol: float,
    window: int = TREND_WINDOW,
    slack: float = MONOTONE_SLACK,
    floor: float = 0.0,
) -> bool:
    """
    Final |value| below tol and the last `window` values non-increasing.
    Magnitudes at or below floor are read as exact zeros.
    """
    if not values:
        return False
    magnitudes = [abs(v) if abs(v) > floor else 0.0 for v in values]
    return magnitudes[-1] < tol and tail_non_increasing(magnitudes, window, slack)


def is_bounded(values: Sequence[float], window: int = TREND_WINDOW, growth_factor: float = BOUNDED_GROWTH_FACTOR) -> bool:
    """
    Boundedness along a finite path: either the tail no longer grows, or it stays within
    growth_factor of everything seen before it.
    """
    magnitudes = [abs(v) for v in values]
    if tail_non_increasing(magnitudes, window):
        return True
    earlier = magnitudes[:-window]
    if not earlier:
        return False
    return max(magnitudes[-window:]) <= growth_factor * max(earlier)
