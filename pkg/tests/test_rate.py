# tests/test_rate.py
import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from Laboratory.ClassA import Verdict
from Laboratory.Kernels import box_kernel, gauss_weierstrass_kernel
from Laboratory.Lebesgue import identity_mu
from Laboratory.Limits import geometric_grid
from Laboratory.Operator import linear_t_function, quadrant_indicator_function
from Laboratory.Rate import (
    ApproachPath,
    ExponentFit,
    check_rate_conditions,
    compare_with_stated_rate,
    delta_functional,
    delta_scaling_sweep,
    fit_exponent,
    hypothesis_41,
    hypothesis_42,
    little_o,
    radius_note,
    run_convergence,
)
from Laboratory.Reporting import rate_rows

X0 = Y0 = 0.5
LAMBDAS = geometric_grid(4.0, 2.0, 10)


def _overlap(a0, a1, b0, b1):
    return max(0.0, min(a1, b1) - max(a0, b0))


def test_delta_box_examples():
    box, mp = box_kernel(), identity_mu()
    assert delta_functional(box, mp, X0, Y0, 0.01, X0 - 0.01, Y0 - 0.01, 20.0) == pytest.approx(0.16, abs=1e-10)
    assert delta_functional(box, mp, X0, Y0, 0.25, X0, Y0, 20.0) == pytest.approx(1.0, abs=1e-10)
    assert delta_functional(box, mp, X0, Y0, 0.25, X0 + 0.225, Y0 + 0.225, 20.0) == pytest.approx(0.25, abs=1e-10)


def test_delta_is_the_first_hypothesis_functional():
    assert hypothesis_41 is delta_functional


def test_delta_without_overlap_is_zero():
    assert delta_functional(box_kernel(), identity_mu(), X0, Y0, 0.01, X0 + 0.2, Y0, 20.0) == 0.0


def test_delta_rejects_bad_delta():
    with pytest.raises(ValueError):
        delta_functional(box_kernel(), identity_mu(), X0, Y0, 0.5, X0, Y0, 20.0)
    with pytest.raises(ValueError):
        delta_functional(box_kernel(), identity_mu(), X0, Y0, 0.0, X0, Y0, 20.0)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(1.0, 100.0),
    st.floats(0.001, 0.49),
    st.floats(-0.6, 0.6),
    st.floats(-0.6, 0.6),
)
def test_delta_box_matches_rectangle_overlap(lam, delta, dx, dy):
    x, y = X0 + dx, Y0 + dy
    expected = lam * lam * (_overlap(X0 - delta, X0 + delta, x, x + 1.0 / lam)
                            * _overlap(Y0 - delta, Y0 + delta, y, y + 1.0 / lam))
    value = delta_functional(box_kernel(), identity_mu(), X0, Y0, delta, x, y, lam)
    assert value == pytest.approx(expected, abs=1e-9)


def test_delta_grows_with_delta():
    gauss, mp = gauss_weierstrass_kernel(), identity_mu()
    values = [delta_functional(gauss, mp, X0, Y0, d, X0 + 0.01, Y0, 500.0) for d in (0.02, 0.05, 0.1, 0.2, 0.4)]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-6)


def test_hypothesis_42_examples():
    box, mp = box_kernel(), identity_mu()
    assert hypothesis_42(box, mp, X0, Y0, X0 + 0.1, Y0 - 0.2, 10.0) == pytest.approx((10.0, 20.0))
    gauss = gauss_weierstrass_kernel()
    a, b = hypothesis_42(gauss, mp, X0, Y0, X0 + 0.1, Y0, 10.0)
    assert a == pytest.approx(10.0 / math.pi * 0.1)
    assert b == 0.0
    with pytest.raises(ValueError):
        hypothesis_42(box, mp, X0, Y0, X0 + 0.5, Y0, 10.0)


def test_hypothesis_42_scales_with_mu():
    box, mp = box_kernel(), identity_mu()
    a, b = hypothesis_42(box, mp, X0, Y0, X0 + 0.1, Y0 + 0.3, 8.0)
    sa, sb = hypothesis_42(box, mp.scaled(2.0, 3.0), X0, Y0, X0 + 0.1, Y0 + 0.3, 8.0)
    assert sa == pytest.approx(2.0 * a)
    assert sb == pytest.approx(3.0 * b)


def test_little_o_examples():
    js = range(1, 21)
    assert little_o([1.0 / j ** 2 for j in js], [1.0 / j for j in js]).holds
    assert not little_o([1.0 / j for j in js], [1.0 / j for j in js]).holds

    js = range(1, 61)
    verdict = little_o([math.exp(-j) for j in js], [j ** -10.0 for j in js], noise_floor=0.0)
    assert verdict.holds
    assert verdict.ratios[-1] < 1e-8


def test_little_o_tail_slope():
    js = range(1, 21)
    verdict = little_o([1.0 / j ** 2 for j in js], [1.0 / j for j in js])
    assert verdict.tail_slope == pytest.approx(-1.0, abs=1e-9)


def test_little_o_needs_a_monotone_tail():
    den = [1.0] * 10
    num = [0.05 if j % 2 else 0.01 for j in range(10)]
    verdict = little_o(num, den)
    assert verdict.ratios[-1] < 0.1
    assert not verdict.holds


def test_little_o_reads_noise_as_zero():
    verdict = little_o([1e-14] * 8, [1e-6] * 8)
    assert verdict.holds
    assert verdict.ratios == [0.0] * 8


def test_little_o_contract():
    with pytest.raises(ValueError, match="length"):
        little_o([1.0] * 6, [1.0] * 7)
    with pytest.raises(ValueError, match="at least"):
        little_o([1.0] * 5, [1.0] * 5)
    with pytest.raises(ValueError, match="zero"):
        little_o([1.0] * 6, [1.0, 1.0, 0.0, 1.0, 1.0, 1.0])


def test_fit_exponent_exact():
    lambdas = [2.0, 4.0, 8.0, 16.0, 32.0]
    fit = fit_exponent(lambdas, [3.0 * lam ** -2.5 for lam in lambdas])
    assert fit.exponent == pytest.approx(2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.stderr == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(-3.0, 3.0))
def test_fit_exponent_ignores_constant_factors(scale, exponent):
    lambdas = geometric_grid(2.0, 2.0, 8)
    base = fit_exponent(lambdas, [lam ** -exponent for lam in lambdas])
    scaled = fit_exponent(lambdas, [scale * lam ** -exponent for lam in lambdas])
    assert scaled.exponent == pytest.approx(base.exponent, abs=1e-9)


def test_fit_exponent_contract():
    with pytest.raises(ValueError):
        fit_exponent([1.0, 2.0, 3.0], [1.0, 0.5, 0.3])
    with pytest.raises(ValueError):
        fit_exponent([1.0, 2.0, 3.0, 4.0], [1.0, 0.5, 0.0, 0.1])


def test_compare_with_stated_rate():
    agree = compare_with_stated_rate(ExponentFit(exponent=2.0, stderr=0.0, intercept=0.0), 1.0)
    assert agree.measured_matches_brute_force and agree.stated_matches_brute_force

    split = compare_with_stated_rate(ExponentFit(exponent=1.0, stderr=0.0, intercept=0.0), 0.5)
    assert split.brute_force_exponent == 1.0
    assert split.stated_exponent == 1.5
    assert split.measured_matches_brute_force
    assert not split.stated_matches_brute_force


def _coupled_path(alpha, x_shift=True):
    return ApproachPath.coupled(
        (X0, Y0, math.inf),
        LAMBDAS,
        lambda lam: lam ** -(1.0 + alpha),
        (lambda lam, d: X0 - d) if x_shift else (lambda lam, d: X0),
        (lambda lam, d: Y0 - d) if x_shift else (lambda lam, d: Y0),
        f"delta = lambda^-(1+{alpha})",
    )


def test_approach_path_contract():
    with pytest.raises(ValueError):
        ApproachPath((), (X0, Y0, math.inf))
    with pytest.raises(ValueError, match="toward"):
        ApproachPath(((X0, Y0, 4.0), (X0, Y0, 2.0)), (X0, Y0, math.inf))
    with pytest.raises(ValueError, match="away"):
        ApproachPath(((X0, Y0, 2.0), (X0 + 0.1, Y0, 4.0)), (X0, Y0, math.inf))
    with pytest.raises(ValueError):
        ApproachPath(((X0, Y0, 2.0),), (X0, Y0, math.inf), deltas=(0.1, 0.2))


def test_rate_conditions_box_alpha_one():
    path = _coupled_path(1.0)
    report = check_rate_conditions(box_kernel(), identity_mu(), linear_t_function(), path, alpha=1.0)
    assert report.conditions == {"i": Verdict.PASS, "ii": Verdict.PASS, "iii": Verdict.PASS, "iv": Verdict.PASS}
    for lam, value in zip(LAMBDAS, report.delta_values):
        assert value == pytest.approx(4.0 / lam ** 2, rel=1e-7)
    assert report.fitted_exponent.exponent == pytest.approx(2.0, abs=0.05)
    assert report.comparison.measured_matches_brute_force
    # |L_λ f - f| ~ 1/(2λ) is not o(Δ) when Δ ~ λ^-2
    assert not report.little_o_verdict
    assert report.hypothesis_42_bounded is not None


def test_rate_conditions_on_the_target_line():
    path = _coupled_path(1.0, x_shift=False)
    report = check_rate_conditions(box_kernel(), identity_mu(), linear_t_function(), path)
    for lam, value in zip(LAMBDAS, report.delta_values):
        assert value == pytest.approx(lam ** -2, rel=1e-7)
    assert report.hypothesis_42 == [[0.0] * len(LAMBDAS), [0.0] * len(LAMBDAS)]
    assert report.conditions["i"] == Verdict.PASS


def test_fixed_delta_gauss_fails_condition_i():
    path = ApproachPath.coupled((X0, Y0, math.inf), LAMBDAS, lambda lam: 0.25,
                                lambda lam, d: X0, lambda lam, d: Y0, "fixed delta")
    report = check_rate_conditions(gauss_weierstrass_kernel(), identity_mu(), linear_t_function(), path)
    assert report.conditions["i"] == Verdict.FAIL
    assert report.delta_values[-1] == pytest.approx(1.0, abs=1e-6)


def test_injected_delta_is_used_verbatim():
    path = _coupled_path(1.0)
    report = check_rate_conditions(box_kernel(), identity_mu(), linear_t_function(), path,
                                   delta_override=lambda lam, d, x, y: 1.0 / lam)
    assert report.delta_values == [1.0 / lam for lam in LAMBDAS]
    assert "Δ injected by override" in report.notes
    assert report.fitted_exponent.exponent == pytest.approx(1.0, abs=1e-12)


def test_rate_conditions_need_deltas():
    path = ApproachPath(tuple((X0, Y0, lam) for lam in LAMBDAS), (X0, Y0, math.inf))
    with pytest.raises(ValueError, match="δ rule"):
        check_rate_conditions(box_kernel(), identity_mu(), linear_t_function(), path)
    with pytest.raises(ValueError, match="outside"):
        check_rate_conditions(box_kernel(), identity_mu(), linear_t_function(), path, lambda lam: 0.75)


def test_convergence_box_linear():
    path = ApproachPath(tuple((X0, Y0, lam) for lam in LAMBDAS), (X0, Y0, math.inf))
    report = run_convergence(box_kernel(), linear_t_function(), identity_mu(), path)
    for lam, error in zip(LAMBDAS, report.errors):
        assert error == pytest.approx(1.0 / (2.0 * lam), abs=1e-7)
    assert report.lebesgue_point
    assert report.converged
    assert report.final_error == report.errors[-1]


def test_convergence_fails_at_the_quadrant_corner():
    path = ApproachPath(tuple((0.0, 0.0, lam) for lam in LAMBDAS), (0.0, 0.0, math.inf))
    report = run_convergence(box_kernel(), quadrant_indicator_function(), identity_mu(), path)
    assert not report.lebesgue_point
    assert not report.converged
    assert report.reference_value == 0.0
    assert report.errors[-1] == pytest.approx(1.0, abs=1e-10)
    assert report.notes


def test_delta_scaling_sweep():
    rows = delta_scaling_sweep(box_kernel(), identity_mu(), X0, Y0, LAMBDAS, [0.5, 1.0, 2.0, 0.0])
    for row in rows[:3]:
        assert row.fit.exponent == pytest.approx(2.0 * row.alpha, abs=1e-4)
    assert rows[1].tends_to_zero
    assert rows[2].tends_to_zero
    flat = rows[3]
    assert all(v == pytest.approx(1.0, abs=1e-10) for v in flat.delta_values)
    assert not flat.tends_to_zero


def test_undefined_hypothesis_42_becomes_a_note():
    # first point sits 0.3 from x₀, beyond δ₀ = 0.25
    path = ApproachPath.coupled((X0, Y0, math.inf), LAMBDAS, lambda lam: lam ** -2.0,
                                lambda lam, d: X0 - 1.2 / lam, lambda lam, d: Y0, "x far at the start")
    report = check_rate_conditions(box_kernel(), identity_mu(0.25), linear_t_function(), path)
    assert report.hypothesis_42 == [[], []]
    assert report.hypothesis_42_bounded is None
    assert any(n.startswith("hypothesis_42 undefined at path index 0") for n in report.notes)
    assert set(report.conditions) == {"i", "ii", "iii", "iv"}
    rows = rate_rows(report)
    assert rows[0][7] is None and rows[0][8] is None


def test_delta0_beyond_the_monotonicity_radii_is_noted():
    narrow = replace(box_kernel(), monotonicity_radii=(0.2, 0.3))
    assert radius_note(box_kernel(), identity_mu(0.5)) is None
    note = radius_note(narrow, identity_mu(0.5))
    assert note == "δ₀=0.5 exceeds min(δ₁, δ₂)=0.2 of 'box'"
    assert radius_note(narrow, identity_mu(0.2)) is None

    path = ApproachPath(tuple((X0, Y0, lam) for lam in LAMBDAS), (X0, Y0, math.inf))
    assert note in run_convergence(narrow, linear_t_function(), identity_mu(0.5), path).notes
    rate = check_rate_conditions(narrow, identity_mu(0.5), linear_t_function(), _coupled_path(1.0))
    assert note in rate.notes
