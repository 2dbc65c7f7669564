import numpy as np
import pytest

from dpsqkd.asymptotics import (
    d2_single,
    d2_two,
    d32_two,
    e_max_single,
    e_max_two,
    e_min_two,
    solve_d2_two,
    solve_e_max_two,
    solve_e_min_two,
)
from dpsqkd.keyrate import binary_entropy


def test_d2_single_at_zero_error():
    for n in (4, 9):
        assert d2_single(n, 0.0) == pytest.approx((n - 1) ** 2 / (2 * n**2), rel=1e-9)


def test_single_threshold():
    e = e_max_single()
    assert abs(1 - binary_entropy(6 * e) - binary_entropy(e)) < 1e-9
    assert d2_single(9, e) == pytest.approx(0.0, abs=1e-9)
    f = [1 - binary_entropy(6 * x) - binary_entropy(x) for x in np.linspace(0, 1 / 12, 200)]
    assert np.all(np.diff(f) < 0)


def test_two_photon_coefficient_dominates(curves):
    c = curves(9, 2)
    for e in np.linspace(0, 0.037, 12):
        assert d2_two(9, e, c) >= d2_single(9, e) - 1e-12
    assert d2_two(9, 0.04, c) == 0.0


def test_coefficients_non_increasing(curves):
    c = curves(9, 2)
    es = np.linspace(0, 0.04, 21)
    for f in (lambda e: d2_single(9, e), lambda e: d2_two(9, e, c), lambda e: d32_two(9, e, c)):
        v = np.array([f(e) for e in es])
        assert np.all(np.diff(v) <= 1e-9)


def test_d32_vanishes_beyond_two_photon_threshold(curves):
    for n in (4, 9):
        c = curves(n, 2)
        em = e_max_two(n, c)
        assert d32_two(n, em * 1.01, c) == 0.0
        assert d32_two(n, em * 0.9, c) > 0
        assert d32_two(n, 0.0, c) > 0


def test_two_photon_threshold_tangency(curves):
    c = curves(9, 2)
    t = solve_e_max_two(9, c)
    s = c.support
    residual = 1 - binary_entropy(t.value) - t.gamma * t.value - s(t.gamma)
    assert abs(residual) < 1e-6
    assert e_max_two(9, c) > e_max_two(4, curves(4, 2))


def test_optimal_amplitudes_match_quoted_constants(curves):
    c = curves(9, 2)
    assert solve_d2_two(9, 0.01, c).amplitude == pytest.approx(0.0987, abs=5e-4)


def test_e_min_absent_for_short_blocks(curves):
    for n in (4, 9):
        t = solve_e_min_two(n, curves(n, 2))
        assert t.value == 0.0 and not t.found


def test_e_min_for_twelve_slots(curves):
    c = curves(12, 2)
    t = solve_e_min_two(12, c)
    assert 0 < t.value < e_max_single()
    s = c.support
    from dpsqkd.omega import single_photon_support

    g = t.gamma
    A = 1 - binary_entropy(t.value) - g * t.value - single_photon_support(g)
    # residual of the y* = 0 condition, evaluated on the piecewise-linear support
    assert abs(A - 2 * (s(g) - single_photon_support(g))) < 1e-3
    assert e_min_two(12, c) == t.value
