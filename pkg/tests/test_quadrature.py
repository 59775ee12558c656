# tests/test_quadrature.py
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from Laboratory.Kernels import box_kernel, gauss_weierstrass_kernel
from Laboratory.Quadrature import (
    EdgeFlags,
    QuadratureError,
    Rect,
    frame_rects,
    integrate_complement,
    integrate_interval,
    integrate_rect,
)

UNIT = Rect(0.0, 1.0, 0.0, 1.0)

smooth_coefficients = st.tuples(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3), st.floats(0, 2),
)


def smooth(coefficients):
    a, b, c, d = coefficients
    return lambda t, s: np.exp(a * t + b * s) * (1.0 + 0.5 * np.cos(c * t * s)) + d


def test_constant_area():
    result = integrate_rect(lambda t, s: np.ones_like(t), UNIT, 1e-10)
    assert result.value == pytest.approx(1.0, abs=1e-10)
    assert result.converged


def test_separable_polynomial():
    assert integrate_rect(lambda t, s: t * s, UNIT, 1e-10).value == pytest.approx(0.25, abs=1e-10)


def test_box_kernel_mass_with_breaks():
    box = box_kernel()
    result = integrate_rect(box.at(10.0), Rect(-1, 1, -1, 1), 1e-10, breaks=box.breaks(10.0))
    assert result.value == pytest.approx(1.0, abs=1e-8)


def test_box_kernel_complement():
    box = box_kernel()
    inner = Rect.square(0.0, 0.0, 0.05)
    outer = Rect(-1, 1, -1, 1)
    assert integrate_complement(box.at(10.0), inner, outer, breaks=box.breaks(10.0)).value == pytest.approx(0.75, abs=1e-10)
    assert integrate_complement(box.at(100.0), inner, outer, breaks=box.breaks(100.0)).value == pytest.approx(0.0, abs=1e-12)


def test_gauss_tail_matches_error_function():
    gauss = gauss_weierstrass_kernel()
    lam, gamma = 50.0, 0.5
    inner = Rect.square(0.0, 0.0, gamma)
    outer = gauss.effective_support(lam).hull(inner)
    value = integrate_complement(gauss.absolute(lam), inner, outer, 1e-10).value
    expected = 1.0 - erf(math.sqrt(lam) * gamma) ** 2
    assert value == pytest.approx(expected, rel=0.1)


@given(smooth_coefficients)
@settings(max_examples=20, deadline=None)
def test_additivity_over_quadrants(coefficients):
    f = smooth(coefficients)
    whole = integrate_rect(f, UNIT, 1e-12).value
    parts = math.fsum(integrate_rect(f, q, 1e-12).value for q in UNIT.quadrants())
    assert whole == pytest.approx(parts, abs=1e-10)


@given(smooth_coefficients, st.lists(st.floats(0.05, 0.5), min_size=3, max_size=3))
@settings(max_examples=20, deadline=None)
def test_mass_grows_with_the_rectangle(coefficients, growth):
    f = smooth(coefficients)
    rect = Rect(0.4, 0.6, 0.4, 0.6)
    previous = integrate_rect(f, rect, 1e-12).value
    for g in growth:
        rect = Rect(rect.a - g, rect.b + g, rect.c - g, rect.d + g)
        value = integrate_rect(f, rect, 1e-12).value
        assert value >= previous - 1e-12
        previous = value


@given(smooth_coefficients)
@settings(max_examples=20, deadline=None)
def test_complement_equals_difference(coefficients):
    f = smooth(coefficients)
    inner = Rect(-0.3, 0.2, -0.1, 0.4)
    outer = Rect(-1, 1, -1, 1)
    complement = integrate_complement(f, inner, outer, 1e-12).value
    difference = integrate_rect(f, outer, 1e-12).value - integrate_rect(f, inner, 1e-12).value
    assert complement == pytest.approx(difference, abs=1e-9)


def test_frames_tile_the_difference():
    inner = Rect(-0.3, 0.2, -0.1, 0.4)
    outer = Rect(-1, 1, -1, 1)
    frames = frame_rects(inner, outer)
    assert len(frames) == 4
    assert math.fsum(f.area for f in frames) == pytest.approx(outer.area - inner.area)


def test_complement_requires_nesting():
    with pytest.raises(ValueError):
        integrate_complement(lambda t, s: t, Rect(-2, 0, 0, 1), UNIT)


def test_deterministic_including_evaluation_count():
    f = lambda t, s: np.sqrt(np.abs(t - 0.3)) * np.exp(s)
    first = integrate_rect(f, UNIT, 1e-9)
    second = integrate_rect(f, UNIT, 1e-9)
    assert first == second


def test_nan_is_a_hard_error_with_point():
    with pytest.raises(QuadratureError) as info:
        integrate_rect(lambda t, s: np.where(t > 0.5, np.nan, 1.0), UNIT)
    assert info.value.point[0] > 0.5


def test_depth_limit_flags_instead_of_raising():
    f = lambda t, s: np.where(t + s > 0.7071, 1.0, 0.0)
    result = integrate_rect(f, UNIT, 1e-14, max_depth=3)
    assert result.depth_exceeded
    assert not result.converged
    assert result.value == pytest.approx(1.0 - 0.5 * 0.7071 ** 2, abs=0.1)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        integrate_rect(lambda t, s: t, UNIT, 0.0)
    with pytest.raises(ValueError):
        Rect(1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Rect(0.0, math.inf, 0.0, 1.0)


def test_degenerate_rectangle_is_zero():
    assert integrate_rect(lambda t, s: t, Rect(0.5, 0.5, 0.0, 1.0)).value == 0.0


def test_edge_flags_decide_membership_only():
    closed = Rect(0.0, 1.0, 0.0, 1.0)
    half_open = Rect(0.0, 1.0, 0.0, 1.0, EdgeFlags(right=False, top=False))
    assert bool(closed.contains(1.0, 1.0))
    assert not bool(half_open.contains(1.0, 1.0))
    f = lambda t, s: t + s
    assert integrate_rect(f, closed).value == integrate_rect(f, half_open).value


def test_interval_rule():
    assert integrate_interval(np.cos, 0.0, 1.0, 1e-12).value == pytest.approx(math.sin(1.0), abs=1e-12)
    step = lambda t: np.where(t < 0.3, 2.0, 0.0)
    assert integrate_interval(step, 0.0, 1.0, breaks=(0.3,)).value == pytest.approx(0.6, abs=1e-12)
