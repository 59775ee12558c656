# tests/test_lebesgue.py
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from Laboratory.Lebesgue import (
    LebesgueDomainError,
    MuDefinitionError,
    MuPair,
    default_h_grid,
    identity_mu,
    lebesgue_quotient,
    mu_from_density,
    mu_from_expressions,
    verify_lebesgue_point,
)
from Laboratory.Operator import (
    constant_function,
    linear_t_function,
    product_ts_function,
    quadrant_indicator_function,
    quadratic_function,
    sin_product_function,
    sqrt_abs_t_function,
)


def test_identity_mu():
    mp = identity_mu()
    assert mp.delta0 == 0.5
    assert mp.mu1(0.3) == 0.3
    assert mp.mu2(0.125) == 0.125
    assert np.all(mp.rho1(np.array([0.1, 0.2])) == 1.0)


def test_mu_from_density_integrates():
    mp = mu_from_density(lambda t: 2.0 * np.asarray(t), lambda s: np.ones_like(np.asarray(s, dtype=float)))
    assert mp.mu1(0.5) == pytest.approx(0.25, abs=1e-12)
    assert mp.mu2(0.2) == pytest.approx(0.2, abs=1e-12)


def test_mu_from_density_cosine():
    mp = mu_from_density(np.cos, np.cos, 1.0)
    assert mp.mu1(1.0) == pytest.approx(math.sin(1.0), abs=1e-10)


def test_zero_density_rejected():
    zero = lambda u: 0.0 * np.asarray(u, dtype=float)
    with pytest.raises(MuDefinitionError):
        mu_from_density(zero, zero)


def test_negative_density_rejected():
    with pytest.raises(MuDefinitionError, match="negative"):
        mu_from_density(lambda t: np.asarray(t) - 0.25, lambda s: np.ones_like(np.asarray(s, dtype=float)))


def test_closed_form_must_match_integral():
    rho = lambda t: 2.0 * np.asarray(t)
    mu_from_density(rho, rho, mu1=lambda h: h * h, mu2=lambda k: k * k)
    with pytest.raises(MuDefinitionError, match="disagrees"):
        mu_from_density(rho, rho, mu1=lambda h: h * h + 1e-6)


def test_mu_pair_contract():
    with pytest.raises(MuDefinitionError):
        identity_mu(0.0)
    with pytest.raises(MuDefinitionError):
        identity_mu().scaled(-1.0)


def test_mu_from_expressions():
    mp = mu_from_expressions("2*t", "1", 0.5)
    assert mp.mu1(0.3) == pytest.approx(0.09, abs=1e-12)
    assert mp.mu2(0.3) == pytest.approx(0.3, abs=1e-12)


def test_quotient_examples():
    mp = identity_mu()
    assert lebesgue_quotient(linear_t_function(), mp, 0.2, 0.2, 0.1, 0.1) == pytest.approx(0.05, abs=1e-9)
    assert lebesgue_quotient(constant_function(5.0), mp, 0.2, 0.2, 0.1, 0.1) == pytest.approx(0.0, abs=1e-12)
    assert lebesgue_quotient(quadrant_indicator_function(), mp, 0.0, 0.0, 0.1, 0.01) == pytest.approx(1.0, abs=1e-12)


def test_quotient_with_weighted_density():
    mp = mu_from_expressions("2*t", "1", 0.5)
    # ∬|t - 0.2| over [0,0.1]² is 5e-4, μ₁(0.1)μ₂(0.1) = 0.01·0.1
    assert lebesgue_quotient(linear_t_function(), mp, 0.2, 0.2, 0.1, 0.1) == pytest.approx(0.5, rel=1e-8)


def test_symmetric_quadrants_average():
    value = lebesgue_quotient(quadrant_indicator_function(), identity_mu(), 0.0, 0.0, 0.1, 0.1,
                              symmetric_quadrants=True)
    assert value == pytest.approx(0.25, abs=1e-12)


def test_quotient_rejects_h_outside_delta0():
    with pytest.raises(ValueError):
        lebesgue_quotient(linear_t_function(), identity_mu(), 0.2, 0.2, 0.6, 0.1)
    with pytest.raises(ValueError):
        lebesgue_quotient(linear_t_function(), identity_mu(), 0.2, 0.2, 0.1, 0.0)


def test_quotient_outside_domain():
    with pytest.raises(LebesgueDomainError):
        lebesgue_quotient(linear_t_function(), identity_mu(), 0.9, 0.9, 0.2, 0.2)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_quotient_scales_with_mu(c1, c2):
    f = sin_product_function()
    mp = identity_mu()
    base = lebesgue_quotient(f, mp, 0.3, 0.4, 0.1, 0.05)
    scaled = lebesgue_quotient(f, mp.scaled(c1, c2), 0.3, 0.4, 0.1, 0.05)
    assert scaled * c1 * c2 == pytest.approx(base, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.4), st.floats(0.01, 0.4))
def test_quotient_bounded_by_oscillation(h, k):
    # f = t: the quotient is the mean of t - x₀ over [0, h], bounded by h
    value = lebesgue_quotient(linear_t_function(), identity_mu(), 0.2, 0.2, h, k)
    assert value == pytest.approx(h / 2.0, rel=1e-9)
    assert value <= h + 1e-12


def test_default_h_grid():
    grid = default_h_grid(0.5)
    assert len(grid) == 18
    assert grid[0] == 0.25
    assert grid[1] == 0.125
    assert all(0 < h < 0.5 for h in grid)


@pytest.mark.parametrize("factory", [
    constant_function, linear_t_function, product_ts_function, quadratic_function, sin_product_function,
])
def test_continuous_functions_have_lebesgue_points(factory):
    verdict = verify_lebesgue_point(factory(), identity_mu(), 0.5, 0.5)
    assert verdict.is_point
    assert not verdict.inconclusive
    assert list(verdict.traces) == ["diagonal", "h_h2", "h2_h"]
    assert len(verdict.trace) == 3 * 18


def test_quadrant_corner_is_not_a_lebesgue_point():
    verdict = verify_lebesgue_point(quadrant_indicator_function(), identity_mu(), 0.0, 0.0)
    assert not verdict.is_point
    assert not verdict.inconclusive
    assert all(q == pytest.approx(1.0, abs=1e-12) for _, _, q in verdict.trace)
    assert verdict.notes


def test_sqrt_cusp_is_a_lebesgue_point():
    verdict = verify_lebesgue_point(sqrt_abs_t_function(), identity_mu(), 0.0, 0.0, tol=1e-5)
    assert verdict.is_point
    # diagonal quotient is (2/3)√h
    h, _, q = verdict.traces["diagonal"][-1]
    assert q == pytest.approx(2.0 / 3.0 * math.sqrt(h), rel=1e-3)


def test_larger_tol_leb_never_loses_a_verdict():
    grid = [0.2, 0.1, 0.05, 0.025]
    verdicts = [verify_lebesgue_point(sqrt_abs_t_function(), identity_mu(), 0.0, 0.0, grid,
                                      tol_leb=tol_leb, tol=1e-5).is_point
                for tol_leb in (0.01, 0.05, 0.1, 0.2, 0.5)]
    assert verdicts == sorted(verdicts)
    assert not verdicts[0]
    assert verdicts[-1]


def test_quadrant_leaving_the_domain_is_inconclusive():
    verdict = verify_lebesgue_point(linear_t_function(), identity_mu(), 0.9, 0.9)
    assert not verdict.is_point
    assert verdict.inconclusive
    assert verdict.notes


def test_h_grid_outside_delta0_is_rejected():
    with pytest.raises(ValueError):
        verify_lebesgue_point(linear_t_function(), identity_mu(), 0.5, 0.5, [0.7, 0.1])


def test_delta0_wider_than_domain_is_noted():
    verdict = verify_lebesgue_point(linear_t_function(), MuPair(*_ones(), delta0=1.5), 0.1, 0.1,
                                    [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125])
    assert any("side lengths" in note for note in verdict.notes)


def _ones():
    ones = lambda u: np.ones_like(np.asarray(u, dtype=float))
    return ones, ones, float, float
