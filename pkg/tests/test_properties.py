"""Randomised invariants, 1000 derandomised examples each."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dpsqkd.keyrate import allocate, detection_rate, key_rate
from dpsqkd.operators import build_pi
from dpsqkd.omega import omega_values

CASES = settings(
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)

lams = st.floats(0.0, 50.0, allow_nan=False)


@CASES
@given(n=st.integers(3, 60))
def test_pi_is_psd_with_one_dimensional_kernel(n):
    m = build_pi(n).to_dense()
    w, v = np.linalg.eigh(m)
    assert w[0] > -1e-12
    assert abs(w[0]) < 1e-12 < w[1]
    c = np.ones(n)
    c[0] = c[-1] = 1 / np.sqrt(2)
    assert np.linalg.norm(m @ c) < 1e-12


@CASES
@given(n=st.integers(3, 9), nu=st.integers(0, 3), a=lams, b=lams, t=st.floats(0.0, 1.0))
def test_omega_convex_and_non_increasing(n, nu, a, b, t):
    lo, hi = min(a, b), max(a, b)
    mid = lo + t * (hi - lo)
    v = omega_values(n, nu, [lo, mid, hi]).value
    assert v[0] >= v[1] - 1e-10 and v[1] >= v[2] - 1e-10
    assert v[1] <= (1 - t) * v[0] + t * v[2] + 1e-10


@CASES
@given(n=st.integers(3, 9), lam=lams)
def test_chain(n, lam):
    v = [omega_values(n, nu, [lam]).value[0] for nu in range(4)]
    assert v[0] <= v[1] + 1e-10 <= v[2] + 2e-10 <= v[3] + 3e-10 <= 1 + 4e-10


@CASES
@given(
    n=st.integers(3, 12),
    mean=st.floats(1e-6, 2.0),
    eta=st.floats(1e-5, 1.0),
    nubar=st.integers(0, 5),
)
def test_allocation_mass(n, mean, eta, nubar):
    Q = detection_rate(n, eta, mean / n)
    alloc = allocate(n, mean / n, Q, nubar)
    assert abs(alloc.total - 1) < 1e-12
    assert min(alloc.q) >= 0 and alloc.tail >= 0


@CASES
@given(
    n=st.sampled_from([4, 9]),
    e=st.floats(0.0, 0.06),
    eta=st.floats(1e-4, 1.0),
    mean=st.floats(1e-4, 1.0),
)
def test_truncation_monotonicity(curves, n, e, eta, mean):
    cs = {2: curves(n, 2), 3: curves(n, 3)}
    g1, g2, g3 = (key_rate(n, e, eta, mean / n, nb, cs).G for nb in (1, 2, 3))
    assert g1 <= g2 + 1e-15
    assert g2 <= g3 + 1e-15
