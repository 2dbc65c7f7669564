"""Leading low-transmission coefficients of the key rate and the error thresholds they imply.

As ``eta -> 0`` the key rate behaves like ``D2 eta^2`` when the mean
photon number scales with ``eta``, and like ``D32 eta^1.5`` when only
two-photon events carry the key and the mean scales with ``sqrt(eta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .keyrate import binary_entropy
from .omega import OmegaCurve, SupportFunction, binary_entropy_array, single_photon_support
from .search import bisect_root, golden_section_min

E_TOL = 1e-8
GAMMA_TOL = 1e-8
GAMMA_SCAN = np.geomspace(1e-4, 1e6, 2001)
Y_SCAN = np.linspace(0.0, 1.0, 2001)


@dataclass(frozen=True)
class AsymptoticCoefficient:
    """A low-transmission coefficient with the optimiser state that produced it.

    ``y`` is the single-photon share of detections (``D2`` kinds), ``z`` the
    analogous share for ``D32``; ``gamma`` is the support-function slope.
    ``amplitude`` is the optimal per-pulse coefficient: ``alpha2 = amplitude * eta``
    for the ``D2`` kinds and ``alpha2 = amplitude * sqrt(eta)`` for ``D32``.
    """

    kind: str
    n: int
    e: float
    value: float
    y: float | None = None
    z: float | None = None
    gamma: float | None = None
    amplitude: float | None = None
    fallback: bool = False


def _support(curve2) -> SupportFunction:
    return curve2.support if isinstance(curve2, OmegaCurve) else curve2


def _capped_h(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0.5, 1.0, binary_entropy_array(np.minimum(x, 0.5)))


def _argmax_scan(f, grid: np.ndarray, tol: float) -> tuple[float, float]:
    """Maximise ``f`` by a vectorised scan and golden refinement around the best node."""
    vals = f(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    x, neg = golden_section_min(lambda t: -float(f(np.array([t]))[0]), lo, hi, tol)
    if -neg >= vals[i]:
        return x, -neg
    return float(grid[i]), float(vals[i])


def solve_d2_single(n: int, e: float) -> AsymptoticCoefficient:
    """``D2`` using single-photon events only."""
    if n < 3 or not 0 <= e < 0.5:
        raise ValueError("need n >= 3 and 0 <= e < 1/2")
    he = binary_entropy(e)

    def f(y):
        y = np.asarray(y, dtype=float)
        ys = np.where(y > 0, y, 1.0)
        inner = np.where(y > 0, y - y * _capped_h(6 * e / ys), 0.0)
        return (1 - y) * (inner - he)

    y, best = _argmax_scan(f, Y_SCAN, 1e-10)
    best = best if best > 0 else 0.0
    scale = 2 * (n - 1) ** 2 / n**2
    amp = 2 * (n - 1) * (1 - y) / n**2 if best > 0 else 0.0
    return AsymptoticCoefficient("D2_single", n, e, scale * best, y=y, amplitude=amp)


def d2_single(n: int, e: float) -> float:
    return solve_d2_single(n, e).value


def _two_photon_terms(e: float, s2: SupportFunction):
    he = binary_entropy(e)

    def parts(g):
        g = np.asarray(g, dtype=float)
        w1 = single_photon_support(g)
        w2 = s2(g)
        A = 1 - he - g * e - w1
        return A, w1, w2

    return parts


def solve_d2_two(n: int, e: float, curve2) -> AsymptoticCoefficient:
    """``D2`` including two-photon events; falls back to single-photon when no gamma is feasible."""
    if n < 3 or not 0 <= e < 0.5:
        raise ValueError("need n >= 3 and 0 <= e < 1/2")
    parts = _two_photon_terms(e, _support(curve2))

    def ystar(g):
        A, w1, w2 = parts(g)
        d = 2 * (w2 - w1)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(d > 0, 1 - A / d, -np.inf)
        return y, A

    def f(g):
        y, A = ystar(g)
        ok = (y >= 0) & (y <= 1) & (A > 0)
        return np.where(ok, (1 - y) * A, -np.inf)

    vals = f(GAMMA_SCAN)
    if not np.isfinite(vals).any():
        single = solve_d2_single(n, e)
        return AsymptoticCoefficient(
            "D2_two", n, e, single.value, y=single.y, amplitude=single.amplitude, fallback=True
        )
    g, best = _argmax_scan(f, GAMMA_SCAN, GAMMA_TOL)
    y = float(ystar(np.array([g]))[0][0])
    scale = (n - 1) ** 2 / n**2
    return AsymptoticCoefficient(
        "D2_two", n, e, scale * best, y=y, gamma=g, amplitude=2 * (n - 1) * (1 - y) / n**2
    )


def d2_two(n: int, e: float, curve2) -> float:
    return solve_d2_two(n, e, curve2).value


def solve_d32_two(n: int, e: float, curve2) -> AsymptoticCoefficient:
    """``D_{3/2}``: key from two-photon events alone with ``alpha2 ~ sqrt(eta)``."""
    if n < 3 or not 0 <= e < 0.5:
        raise ValueError("need n >= 3 and 0 <= e < 1/2")
    parts = _two_photon_terms(e, _support(curve2))

    def zstar(g):
        A, w1, w2 = parts(g)
        A2 = A + w1 - w2
        return 1 - A2 / (3 * (1 - w2)), A2

    def f(g):
        z, A2 = zstar(g)
        ok = (A2 > 0) & (z >= 0) & (z <= 1)
        return np.where(ok, np.sqrt(np.clip(1 - z, 0, None)) * A2, -np.inf)

    vals = f(GAMMA_SCAN)
    if not np.isfinite(vals).any() or vals.max() <= 0:
        return AsymptoticCoefficient("D32_two", n, e, 0.0, amplitude=0.0)
    g, best = _argmax_scan(f, GAMMA_SCAN, GAMMA_TOL)
    z = float(zstar(np.array([g]))[0][0])
    scale = (2 * math.sqrt(6) / 3) * ((n - 1) / n) ** 1.5
    amp = math.sqrt(6 * (n - 1) * (1 - z) / n**3)
    return AsymptoticCoefficient("D32_two", n, e, scale * best, z=z, gamma=g, amplitude=amp)


def d32_two(n: int, e: float, curve2) -> float:
    return solve_d32_two(n, e, curve2).value


def e_max_single(tol: float = 1e-10) -> float:
    """Largest error rate with a positive ``eta^2`` key from single photons: ``1 = h(6e) + h(e)``."""
    f = lambda e: 1 - float(binary_entropy_array(6 * e)) - float(binary_entropy_array(e))
    return bisect_root(f, 0.0, 1.0 / 12.0, tol)


@dataclass(frozen=True)
class Threshold:
    value: float
    gamma: float | None = None
    found: bool = True


def solve_e_max_two(n: int, curve2, tol: float = E_TOL) -> Threshold:
    """Largest error rate at which two-photon events alone still yield key.

    The tangency of ``1 - h(e) = gamma e + Omega_h(gamma)`` with the support
    function is equivalent to ``1 - h(e)`` meeting the concave envelope of
    the entropy region, which is located by bisection in ``e``.
    """
    s2 = _support(curve2)
    f = lambda e: 1 - float(binary_entropy_array(e)) - float(s2.entropy_bound(e))
    if f(0.0) <= 0:
        return Threshold(0.0, None, False)
    if f(0.5) > 0:
        return Threshold(0.0, None, False)
    e = bisect_root(f, 0.0, 0.5, tol)
    return Threshold(e, s2.tangent_slope(e))


def e_max_two(n: int, curve2) -> float:
    return solve_e_max_two(n, curve2).value


def _y_zero_gap(e: float, s2: SupportFunction) -> tuple[float, float]:
    """At the two-photon-optimal gamma for ``e``: ``A(gamma) - 2(Omega_h2 - Omega_h1)`` and gamma."""
    g = s2.tangent_slope(e)
    A = 1 - binary_entropy(e) - g * e - single_photon_support(g)
    return A - 2 * (s2(g) - single_photon_support(g)), g


def solve_e_min_two(n: int, curve2, tol: float = E_TOL) -> Threshold:
    """Error rate below which the optimal single-photon share ``y*`` would go negative.

    Below it the ``eta^2`` optimum is pushed to all-two-photon operation.
    Returns 0 with ``found=False`` when no such error rate exists.
    """
    s2 = _support(curve2)
    hi = min(e_max_single(), solve_e_max_two(n, curve2).value or e_max_single())
    grid = np.linspace(1e-6, hi, 400)
    gaps = np.array([_y_zero_gap(e, s2)[0] for e in grid])
    pos = np.flatnonzero(gaps > 0)
    if pos.size == 0:
        return Threshold(0.0, None, False)
    k = int(pos[-1])
    if k == grid.size - 1:
        return Threshold(float(grid[-1]), _y_zero_gap(float(grid[-1]), s2)[1])
    e = bisect_root(lambda x: _y_zero_gap(x, s2)[0], grid[k], grid[k + 1], tol)
    return Threshold(float(e), _y_zero_gap(e, s2)[1])


def e_min_two(n: int, curve2) -> float:
    return solve_e_min_two(n, curve2).value
