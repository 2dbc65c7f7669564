"""Photon-number allocation, phase-entropy bounds and asymptotic key rates.

The key rate per block is ``G = Q [1 - h(e) - h_ph]`` where ``h_ph``
bounds the phase-error entropy averaged over the photon-number sectors
Eve can feed into the detected events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np
from scipy.stats import poisson

from .omega import (
    OmegaCurve,
    SupportFunction,
    binary_entropy_array,
    single_photon_support,
    support_function_h,
)
from .search import golden_section_min

GAMMA_GRID = np.concatenate([[0.0], np.geomspace(1e-3, 1e6, 160)])
GAMMA_TOL = 1e-8
MEAN_CAP = 1.0  # photons per block
MEAN_FLOOR = 1e-10
ALLOCATION_TOL = 1e-12


def binary_entropy(x):
    """``-x log2 x - (1 - x) log2 (1 - x)``, exactly 0 at both endpoints."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError(f"binary entropy needs 0 <= x <= 1, got {x!r}")
    out = binary_entropy_array(arr)
    return out if out.ndim else float(out)


def binary_entropy_derivative(x: float) -> float:
    return math.log2((1.0 - x) / x)


def detection_rate(n: int, eta: float, alpha2: float) -> float:
    """Probability per block of one photon in slots 1..n-1 and nothing elsewhere."""
    if n < 3:
        raise ValueError("block too short")
    if not 0 <= eta <= 1 or alpha2 < 0:
        raise ValueError("need 0 <= eta <= 1 and alpha2 >= 0")
    x = eta * alpha2
    return (n - 1) * x * math.exp(-(n + 1) * x)


@dataclass(frozen=True)
class PhotonAllocation:
    """Worst-case split of the detected events over emitted photon numbers.

    Eve assigns detections to the largest photon numbers first: every
    block with more than ``nu_min`` photons is detected and the remainder
    comes from ``nu_min``-photon blocks.
    """

    n: int
    mean: float
    Q: float
    nu_min: int
    nubar: int
    q: tuple  # q[nu] for nu = 0..nubar
    tail: float  # mass on nu > nubar

    def __getitem__(self, nu: int) -> float:
        return self.q[nu] if nu <= self.nubar else 0.0

    @property
    def total(self) -> float:
        return math.fsum(self.q) + self.tail


def allocate(n: int, alpha2: float, Q: float, nubar: int = 3) -> PhotonAllocation:
    """Allocation of ``Q`` over the Poisson photon numbers of mean ``n * alpha2``."""
    if not 0 < Q <= 1:
        raise ValueError(f"detection rate must lie in (0, 1], got {Q!r}")
    if nubar < 0:
        raise ValueError("truncation must be non-negative")
    mean = n * alpha2
    sf = lambda k: float(poisson.sf(k, mean)) if k >= 0 else 1.0  # P(nu > k)
    nu_min = 0
    # relative slack so that Q = 1 - sum(p) computed another way lands on the boundary case
    while sf(nu_min) >= Q * (1.0 - ALLOCATION_TOL):
        nu_min += 1
    q = []
    for nu in range(nubar + 1):
        if nu < nu_min:
            q.append(0.0)
        elif nu == nu_min:
            q.append(1.0 - sf(nu_min) / Q)
        else:
            q.append(float(poisson.pmf(nu, mean)) / Q)
    if nubar >= nu_min:
        tail = sf(nubar) / Q
    else:
        tail = 1.0
    return PhotonAllocation(n, mean, Q, nu_min, nubar, tuple(q), tail)


class KeyRatePoint(NamedTuple):
    n: int
    e: float
    eta: float
    alpha2: float
    nubar: int
    Q: float
    h_ph: float
    G: float


def _minimise_over_gamma(objective) -> float:
    """Minimum over gamma >= 0 of a convex objective (vectorised scan, then golden section)."""
    vals = objective(GAMMA_GRID)
    i = int(np.argmin(vals))
    lo = GAMMA_GRID[max(i - 1, 0)]
    hi = GAMMA_GRID[min(i + 1, GAMMA_GRID.size - 1)]
    _, v = golden_section_min(lambda g: float(objective(np.array([g]))[0]), lo, hi, GAMMA_TOL * max(1.0, hi))
    return float(min(v, vals[i]))


def _single_only(e: float, q1: float) -> float:
    if q1 <= 0:
        return 0.0
    if 12 * e > q1:
        return q1
    return q1 * float(binary_entropy_array(6 * e / q1))


def _support(curves: Mapping[int, OmegaCurve | SupportFunction], nu: int) -> SupportFunction:
    try:
        c = curves[nu]
    except KeyError:
        raise KeyError(f"missing Omega curve for nu={nu}") from None
    return c.support if isinstance(c, OmegaCurve) else c


def merged_curve(c2: OmegaCurve, c3: OmegaCurve, r2: float, r3: float) -> OmegaCurve:
    """``r2 Omega^(2) + r3 Omega^(3)`` on the union of both grids.

    Linear interpolation of a convex curve overestimates it, so points
    inserted from the other grid keep the merged bound valid.
    """
    lam = np.union1d(c2.lam, c3.lam)
    value = r2 * np.interp(lam, c2.lam, c2.value) + r3 * np.interp(lam, c3.lam, c3.value)
    blank = ("",) * lam.size
    return OmegaCurve(n=c2.n, nu=23, lam=lam, value=value, patterns=blank, branches=blank, minus=value, plus=value)


def h_ph_bound(
    n: int,
    e: float,
    alloc: PhotonAllocation,
    nubar: int,
    curves: Mapping[int, OmegaCurve | SupportFunction] | None = None,
) -> float:
    """Upper bound on the phase-error entropy per detected event.

    Sectors beyond ``nubar`` (and the vacuum) contribute entropy 1.  The
    single-photon sector uses its exact support function; sectors 2 and 3
    use the sampled support functions from ``curves``.  For ``nubar = 3``
    the two- and three-photon curves are merged with their relative weights
    and the result is never allowed to exceed the ``nubar = 2`` bound.
    """
    if not 0 <= e <= 0.5:
        raise ValueError("bit error rate must lie in [0, 1/2]")
    if nubar > alloc.nubar:
        raise ValueError("allocation was truncated below the requested nubar")
    curves = curves or {}
    q0, q1 = alloc[0], alloc[1]
    q2, q3 = alloc[2], alloc[3]
    fixed = q0 + alloc.tail + sum(alloc[k] for k in range(nubar + 1, alloc.nubar + 1))
    if nubar <= 1:
        if nubar == 0:
            return min(1.0, fixed + q1)
        return min(1.0, fixed + _single_only(e, q1))

    above2 = fixed + (q3 if nubar == 3 else 0.0)
    s2 = _support(curves, 2)
    if q2 > 0:
        obj2 = lambda g: g * e + q1 * single_photon_support(g) + q2 * s2(g)
        bound2 = above2 + _minimise_over_gamma(obj2)
    else:
        bound2 = above2 + _single_only(e, q1)
    if nubar == 2 or q3 <= 0:
        return min(1.0, bound2)

    s3 = _support(curves, 3)
    if isinstance(curves[2], OmegaCurve) and isinstance(curves[3], OmegaCurve):
        q23 = q2 + q3
        s23 = support_function_h(merged_curve(curves[2], curves[3], q2 / q23, q3 / q23))
        obj3 = lambda g: g * e + q1 * single_photon_support(g) + q23 * s23(g)
    else:
        # without raw curves fall back to the separate (looser) sum of supports
        obj3 = lambda g: g * e + q1 * single_photon_support(g) + q2 * s2(g) + q3 * s3(g)
    bound3 = fixed + _minimise_over_gamma(obj3)
    return min(1.0, bound2, bound3)


def key_rate(
    n: int,
    e: float,
    eta: float,
    alpha2: float,
    nubar: int,
    curves: Mapping[int, OmegaCurve | SupportFunction] | None = None,
) -> KeyRatePoint:
    """Asymptotic key rate per block for mean photon number ``alpha2`` per pulse."""
    if not 0 <= e <= 0.5:
        raise ValueError("bit error rate must lie in [0, 1/2]")
    Q = detection_rate(n, eta, alpha2)
    if Q <= 0:
        return KeyRatePoint(n, e, eta, alpha2, nubar, 0.0, 1.0, 0.0)
    alloc = allocate(n, alpha2, Q, max(nubar, 1))
    h_ph = h_ph_bound(n, e, alloc, nubar, curves)
    G = max(0.0, Q * (1.0 - float(binary_entropy_array(e)) - h_ph))
    return KeyRatePoint(n, e, eta, alpha2, nubar, Q, h_ph, G)


class OptimizedRate(NamedTuple):
    alpha2: float
    point: KeyRatePoint
    positive: bool


def optimize_mean_photon(
    n: int,
    e: float,
    eta: float,
    nubar: int,
    curves: Mapping[int, OmegaCurve | SupportFunction] | None = None,
    *,
    mean_cap: float = MEAN_CAP,
    tol: float = 1e-6,
) -> OptimizedRate:
    """Maximise G over the per-pulse mean photon number with ``n * alpha2 <= mean_cap``.

    Scans ``log(n alpha2)`` on a grid and refines by golden section around
    the best node.  When G vanishes everywhere the cap is returned with
    ``positive=False``.
    """
    rate = lambda t: key_rate(n, e, eta, math.exp(t) / n, nubar, curves).G
    ts = np.linspace(math.log(MEAN_FLOOR), math.log(mean_cap), 81)
    vals = np.array([rate(t) for t in ts])
    i = int(np.argmax(vals))
    if vals[i] <= 0:
        alpha2 = mean_cap / n
        return OptimizedRate(alpha2, key_rate(n, e, eta, alpha2, nubar, curves), False)
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    t, neg = golden_section_min(lambda t: -rate(t), lo, hi, tol)
    if -neg < vals[i]:
        t = ts[i]
    alpha2 = math.exp(t) / n
    return OptimizedRate(alpha2, key_rate(n, e, eta, alpha2, nubar, curves), True)
