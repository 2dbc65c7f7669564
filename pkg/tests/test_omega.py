import numpy as np
import pytest

from dpsqkd.keyrate import binary_entropy
from dpsqkd.omega import (
    ChainViolation,
    ConvexityError,
    UnvalidatedPhotonNumber,
    check_convexity,
    crossover_lambda,
    default_lambda_grid,
    omega,
    omega_closed_form,
    omega_curve,
    omega_eigenpair,
    omega_values,
    phase_error_bound,
    region_boundary,
    single_photon_support,
    support_function_h,
    verify_chain,
)
from dpsqkd.operators import Pattern


def test_vacuum_sector_is_a_line():
    for lam in [0.0, 0.4, 3.0, 12.0]:
        assert omega(9, 0, lam)[0] == pytest.approx((1 - lam) / 2, abs=1e-12)


def test_single_photon_value_at_two():
    assert omega(5, 1, 2.0)[0] == pytest.approx((7 - 8 + np.sqrt(33)) / 8, abs=1e-11)


def test_single_photon_closes_at_six():
    assert abs(omega(9, 1, 6.0)[0]) < 1e-11
    assert abs(omega(9, 1, 9.0)[0]) < 1e-11


def test_argument_checks():
    with pytest.raises(UnvalidatedPhotonNumber):
        omega(9, 4, 1.0)
    with pytest.raises(ValueError, match="block too short"):
        omega(2, 1, 1.0)
    with pytest.raises(ValueError):
        omega(5, 1, -0.1)


def test_best_effort_beyond_three_photons():
    value, pattern = omega(7, 4, 1.0, best_effort=True)
    assert omega(7, 3, 1.0)[0] - 1e-10 <= value <= 1 + 1e-10
    assert pattern.n == 7


def test_curve_is_convex_and_non_increasing(curves):
    for n in (4, 9):
        for nu in (1, 2, 3):
            c = curves(n, nu)
            assert np.all(np.diff(c.value) <= 1e-10)
            check_convexity(c.lam, c.value, 1e-10)


def test_convexity_violation_is_reported():
    with pytest.raises(ConvexityError):
        check_convexity(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0]))


def test_grid_must_be_sorted():
    with pytest.raises(ValueError):
        omega_curve(5, 1, [1.0, 0.5])


def test_vacuum_curve_subgradients():
    c = omega_curve(5, 0, np.linspace(0, 3, 31))
    assert np.allclose(c.subgradients(), -0.5)
    e_plus, e_minus = c.e_tilde()
    assert np.allclose(e_plus, 0.5) and np.allclose(e_minus, 0.5)


def test_crossover_is_unique_and_refined(curves):
    c = curves(9, 2)
    assert len(c.crossovers()) == 1
    lam0 = crossover_lambda(c)
    gap = omega_values(9, 2, [lam0 - 1e-6, lam0 + 1e-6])
    assert gap.plus[0] > gap.minus[0] and gap.plus[1] < gap.minus[1]


def test_crossover_regression(curves):
    # first verified run of the bisection-refined crossover
    assert crossover_lambda(curves(4, 2)) == pytest.approx(9.1541034, abs=1e-6)
    assert crossover_lambda(curves(7, 2)) == pytest.approx(11.0168810, abs=1e-6)
    assert crossover_lambda(curves(9, 2)) == pytest.approx(11.3507975, abs=1e-6)


def test_vacuum_region_is_a_point():
    b = region_boundary(omega_curve(9, 0, np.linspace(0, 12, 121)))
    assert np.allclose(b.e, 0.5) and np.allclose(b.e_ph, 0.5)
    s = support_function_h(omega_curve(9, 0, np.linspace(0, 12, 121)))
    for g in [0.0, 1.0, 5.0]:
        assert s(g) == pytest.approx(1 - g / 2, abs=1e-12)


def test_single_photon_region(curves):
    b = curves(9, 1).boundary
    inside = b.e <= 5 / 34
    assert np.allclose(b.e_ph[inside], 6 * b.e[inside], atol=1e-8)
    assert np.any(np.isclose(b.e, 5 / 34, atol=1e-9))


def test_two_photon_region_has_straight_segment_of_slope_lambda0(curves):
    c = curves(9, 2)
    lam0 = crossover_lambda(c)
    b = c.boundary
    seg = np.flatnonzero(np.isclose(b.lam_left, lam0) | np.isclose(b.lam_right, lam0))
    assert seg.size == 2
    slope = np.diff(b.e_ph[seg]) / np.diff(b.e[seg])
    assert slope[0] == pytest.approx(lam0, rel=1e-9)


def test_regions_tighten_with_block_length(curves):
    es = np.linspace(0.0, 0.2, 41)
    b4, b7, b9 = (curves(n, 2).boundary for n in (4, 7, 9))
    assert np.all(b9(es) <= b7(es) + 1e-12)
    assert np.all(b7(es) <= b4(es) + 1e-12)


def test_single_photon_support_matches_closed_form(curves):
    s = curves(9, 1).support
    for et in [0.01, 0.05, 1 / 12]:
        gamma = 6 * np.log2((1 - 6 * et) / (6 * et))
        expected = binary_entropy(6 * et) - gamma * et
        assert s(gamma) == pytest.approx(expected, abs=1e-6)
        assert single_photon_support(gamma) == pytest.approx(expected, abs=1e-12)
    assert s(1e6) == pytest.approx(0.0, abs=1e-6)


def test_support_function_is_convex_with_floor(curves):
    s = curves(9, 2).support
    g = np.linspace(0, 40, 401)
    v = s(g)
    assert np.all(np.diff(v, 2) >= -1e-12)
    assert np.all(v >= -g / 2 - 1e-12)


def test_phase_error_bound_single_photon():
    for e in [0.0, 0.02, 0.1, 5 / 34]:
        assert phase_error_bound(9, 1, e) == pytest.approx(min(6 * e, 1.0), abs=1e-8)


def test_chain_on_fine_grid():
    report = verify_chain(9, 3, np.arange(0, 12.0001, 0.01))
    assert report.ok and report.min_margin >= -1e-10
    assert report.margins.shape == (1201, 4)


def test_chain_single_photon_reduces_to_closed_forms():
    lam = np.linspace(0, 12, 241)
    report = verify_chain(5, 1, lam)
    assert np.allclose(report.margins[:, 0], omega_closed_form(1, lam) - (1 - lam) / 2, atol=1e-10)


def test_chain_at_zero():
    assert omega(9, 1, 0.0)[0] == pytest.approx(1.0, abs=1e-10)
    assert omega(9, 2, 0.0)[0] == pytest.approx(1.0, abs=1e-10)


def test_chain_violation_is_structured():
    good = [omega_curve(5, nu, np.linspace(0, 2, 5)) for nu in range(3)]
    swapped = [good[0], good[2], good[1]]
    with pytest.raises(ChainViolation) as info:
        verify_chain(5, 2, np.linspace(0, 2, 5), curves=swapped, strict=True)
    lam, nu, margin = info.value.violations[0]
    assert nu == 2 and margin < 0


def test_eigenpair_pads_short_runs():
    ep = omega_eigenpair(9, 3, 0.0)
    assert ep.pattern.weight == 4
    ep = omega_eigenpair(9, 2, 1.0)
    assert ep.branch == "+" and ep.pattern == Pattern.from_string("111000000")
    assert np.allclose(ep.amplitudes[3:], 0.0)


def test_default_grid_layout():
    g = default_lambda_grid()
    assert g[0] == 0 and np.isclose(g[2400], 12.0) and g[-1] == pytest.approx(1e4)
    assert np.all(np.diff(g) > 0)


def test_all_achievable_flag():
    assert omega_curve(4, 3, np.linspace(0, 12, 121)).all_achievable
    assert not omega_curve(9, 3, np.linspace(0, 12, 121)).all_achievable
