"""Worst-case phase-error intercepts Omega^(nu)(lambda) and the regions they bound.

For a state emitted with ``nu`` photons, every attack satisfies

    e_ph <= lambda * e + Omega(lambda)        for all lambda >= 0,

where ``Omega(lambda)`` is the largest eigenvalue over two candidate
families of small tri-diagonal matrices (see :mod:`dpsqkd.operators`).
This module evaluates Omega on grids, turns the family of supporting
lines into the (e, e_ph) boundary, and builds the support function of
the entropy region (e, h(e_ph)) used by the key-rate bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    PiecewiseLinear,
    TridiagonalSymmetric,
    max_eigenpair_tridiag,
    max_eigenvalues_tridiag,
    upper_concave_envelope,
)
from .operators import (
    Pattern,
    Run,
    minus_family_arrays,
    minus_patterns,
    plus_family_arrays,
    plus_runs,
    restricted_operator,
    shifted_operator,
)
from .search import bisect_root, golden_section_min

VALIDATED_MAX_NU = 3
CONVEXITY_TOL = 1e-9
CROSSOVER_TOL = 1e-8
TIE_TOL = 10 * DEFAULT_TOL
ENTROPY_SAMPLES = 4000

# batch size cap (matrices x rows) for one vectorised bisection call
_CHUNK_ELEMENTS = 2_000_000


class UnvalidatedPhotonNumber(ValueError):
    """Raised for nu > 3 unless best-effort evaluation is requested."""


class ConvexityError(ArithmeticError):
    """A sampled Omega curve is not convex; this signals a solver bug."""


class ChainViolation(AssertionError):
    """Omega^(0) <= Omega^(1) <= ... <= 1 failed somewhere on the grid."""

    def __init__(self, violations):
        self.violations = violations
        head = ", ".join(f"(lambda={l:g}, nu={nu}, margin={m:.3e})" for l, nu, m in violations[:5])
        super().__init__(f"{len(violations)} chain violation(s): {head}")


def default_lambda_grid(
    stop: float = 12.0, step: float = 0.005, tail_stop: float = 1e4, tail_points: int = 400
) -> np.ndarray:
    """Uniform grid on ``[0, stop]`` followed by a geometric tail up to ``tail_stop``.

    The tail resolves the low-error end of the nu >= 2 boundaries, where
    the tangent slope grows like ``e ** -0.5``.
    """
    points = int(round(stop / step)) + 1
    head = np.linspace(0.0, stop, points)
    if tail_points <= 1 or tail_stop <= stop:
        return head
    return np.concatenate([head, np.geomspace(stop, tail_stop, tail_points)[1:]])


def _check_args(n: int, nu: int, best_effort: bool) -> None:
    if n < 3:
        raise ValueError("block too short")
    if nu < 0:
        raise ValueError("photon number must be non-negative")
    if nu > VALIDATED_MAX_NU and not best_effort:
        raise UnvalidatedPhotonNumber(
            f"unvalidated photon number {nu}; pass best_effort=True to enumerate all patterns"
        )


def _batched_max(ph: np.ndarray, pi_off: np.ndarray, lams: np.ndarray, tol: float) -> np.ndarray:
    """Largest eigenvalue of ``diag(ph_c) - lam * Pi_c`` for every lambda and candidate.

    ``ph`` is ``(C, m)``; ``pi_off`` is ``(m - 1,)`` or ``(C, m - 1)``.
    Returns ``(L, C)``.
    """
    C, m = ph.shape
    out = np.empty((lams.size, C))
    if C == 0:
        return out
    off = np.broadcast_to(pi_off, (C, m - 1))
    chunk = max(1, _CHUNK_ELEMENTS // max(C * m, 1))
    for s in range(0, lams.size, chunk):
        lam = lams[s : s + chunk, None, None]
        diag = ph[None, :, :] - 0.5 * lam
        offd = -lam * off[None, :, :]
        out[s : s + chunk] = max_eigenvalues_tridiag(diag, offd, tol)
    return out


@dataclass(frozen=True)
class _Family:
    """All candidates for one (n, nu) in tie-break order."""

    n: int
    nu: int
    labels: list  # (Pattern, branch, Run | None)

    @classmethod
    def build(cls, n: int, nu: int) -> "_Family":
        labels = [(p, "-", None) for p in minus_patterns(n, nu)]
        labels += [(r.pattern, "+", r) for r in plus_runs(n, nu)]
        return cls(n, nu, labels)

    def values(self, lams: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
        """``(L, C)`` eigenvalues in label order and a boolean mask of minus-branch columns."""
        n, nu = self.n, self.nu
        blocks = []
        ph, off = minus_family_arrays(n, nu)
        blocks.append(_batched_max(ph, off, lams, tol))
        col_runs = []
        for length in range(1, min(nu, n - 1) + 2):
            runs, ph, off = plus_family_arrays(n, nu, length)
            if runs:
                blocks.append(_batched_max(ph, off, lams, tol))
                col_runs.extend(runs)
        vals = np.concatenate(blocks, axis=1)
        # reorder plus columns into label order (runs sorted by pattern across lengths)
        n_minus = len(self.labels) - len(col_runs)
        pos = {(r.start, r.length): i for i, r in enumerate(col_runs)}
        perm = list(range(n_minus)) + [
            n_minus + pos[(r.start, r.length)] for _, _, r in self.labels[n_minus:]
        ]
        vals = vals[:, perm]
        is_minus = np.array([b == "-" for _, b, _ in self.labels])
        return vals, is_minus


def _pick(vals: np.ndarray, labels: list, tie_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Max over columns and the index of the preferred near-maximal label.

    Mirror-image patterns tie exactly; the lexicographically largest one
    (ones packed to the left, e.g. ``1110..0``) is reported, and the
    full-register branch wins when both branches give the same pattern.
    """
    best = vals.max(axis=1)
    order = sorted(
        range(len(labels)), key=lambda i: (labels[i][0], labels[i][1] == "-"), reverse=True
    )
    ranked = vals[:, order]
    hit = ranked >= best[:, None] - tie_tol
    idx = np.asarray(order)[np.argmax(hit, axis=1)]
    return best, idx


class OmegaPoint(NamedTuple):
    value: float
    pattern: Pattern
    branch: str  # "-" (weight nu-1, full register) or "+" (consecutive run)
    run: Run | None


def omega_point(
    n: int, nu: int, lam: float, *, best_effort: bool = False, tol: float = DEFAULT_TOL
) -> OmegaPoint:
    """Omega^(nu)(lam) with the achieving candidate."""
    _check_args(n, nu, best_effort)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    fam = _Family.build(n, nu)
    vals, _ = fam.values(np.array([float(lam)]), tol)
    best, idx = _pick(vals, fam.labels, TIE_TOL)
    pattern, branch, run = fam.labels[int(idx[0])]
    return OmegaPoint(float(best[0]), pattern, branch, run)


def omega(
    n: int, nu: int, lam: float, *, best_effort: bool = False, tol: float = DEFAULT_TOL
) -> tuple[float, Pattern]:
    """Largest eigenvalue of the restricted operator ``P(e_ph - lam e)P`` and its pattern.

    >>> round(omega(9, 0, 0.4)[0], 12)
    0.3
    """
    p = omega_point(n, nu, lam, best_effort=best_effort, tol=tol)
    return p.value, p.pattern


def omega_closed_form(nu: int, lam):
    """Analytic Omega for nu = 0 and nu = 1 (independent of the block length)."""
    lam = np.asarray(lam, dtype=float)
    if nu == 0:
        return (1.0 - lam) / 2.0
    if nu == 1:
        return np.where(lam < 6.0, (7.0 - 4.0 * lam + np.sqrt(1.0 + 8.0 * lam**2)) / 8.0, 0.0)
    raise ValueError("closed forms exist only for nu = 0, 1")


def _pad_to_weight(run: Run, weight: int) -> Pattern:
    """Add isolated ones at distance >= 2 from the run until the pattern has ``weight`` ones.

    The run's restricted block does not see bits that far away, so the
    padded pattern has the same block and lies in the photon-number sector.
    """
    bits = list(run.pattern.bits)
    blocked = set(range(run.start - 1, run.start + run.length + 1))
    need = weight - run.length
    for i in range(run.n - 1, -1, -1):
        if need == 0:
            break
        if i in blocked or bits[i]:
            continue
        bits[i] = True
        blocked.update((i - 1, i, i + 1))
        need -= 1
    if need:
        raise ValueError(f"cannot pad run {run} to weight {weight} in {run.n} slots")
    return Pattern(tuple(bits))


class OmegaEigenpair(NamedTuple):
    value: float
    pattern: Pattern  # Alice pattern a* of the optimal attack state
    branch: str
    amplitudes: np.ndarray  # c_i over all n slots, unit norm


def omega_eigenpair(
    n: int, nu: int, lam: float, *, best_effort: bool = False, tol: float = DEFAULT_TOL
) -> OmegaEigenpair:
    """Omega with an eigenvector from which the saturating attack state is rebuilt.

    For the run branch the amplitudes vanish outside the run, and the
    returned pattern is the run padded (far from the run) to weight
    ``nu + 1`` when the run itself is shorter.
    """
    p = omega_point(n, nu, lam, best_effort=best_effort, tol=tol)
    if p.branch == "-":
        value, vec = max_eigenpair_tridiag(shifted_operator(p.pattern, lam), tol)
        return OmegaEigenpair(value, p.pattern, "-", vec)
    run = p.run
    value, vec = max_eigenpair_tridiag(restricted_operator(run, lam), tol)
    amps = np.zeros(n)
    amps[run.slots] = vec
    pattern = run.pattern if run.length == nu + 1 else _pad_to_weight(run, nu + 1)
    return OmegaEigenpair(value, pattern, "+", amps)


@dataclass(frozen=True)
class OmegaCurve:
    """Omega^(nu) sampled on a sorted lambda grid, with the argmax candidate per sample."""

    n: int
    nu: int
    lam: np.ndarray
    value: np.ndarray
    patterns: tuple
    branches: tuple
    minus: np.ndarray = field(repr=False)  # Omega_- (or -inf when the family is empty)
    plus: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.lam.size

    def secant_slopes(self) -> np.ndarray:
        return np.diff(self.value) / np.diff(self.lam)

    def e_tilde(self) -> tuple[np.ndarray, np.ndarray]:
        """One-sided subgradient magnitudes ``(e_plus, e_minus)`` per grid point.

        ``e_plus`` uses the right secant and ``e_minus`` the left one; at the
        grid ends the missing side copies the available one.
        """
        s = -self.secant_slopes()
        if s.size == 0:
            z = np.zeros(1)
            return z, z
        e_plus = np.append(s, s[-1])
        e_minus = np.insert(s, 0, s[0])
        return e_plus, e_minus

    def subgradients(self) -> np.ndarray:
        """Symmetric-secant slope estimate of dOmega/dlambda per grid point."""
        e_plus, e_minus = self.e_tilde()
        return -0.5 * (e_plus + e_minus)

    def crossovers(self) -> list[int]:
        """Grid indices ``k`` with Omega_+ > Omega_- at ``k`` and <= at ``k + 1``."""
        d = self.plus - self.minus
        ok = np.isfinite(d)
        return [k for k in range(d.size - 1) if ok[k] and ok[k + 1] and d[k] > 0 >= d[k + 1]]

    def phase_error_bound(self, e):
        """``min_lambda (lambda e + Omega(lambda))`` over the grid, capped at 1."""
        e = np.asarray(e, dtype=float)
        vals = (self.lam[None, :] * np.atleast_1d(e)[:, None] + self.value[None, :]).min(axis=1)
        out = np.minimum(vals, 1.0)
        return out.reshape(e.shape) if e.ndim else float(out[0])

    @property
    def all_achievable(self) -> bool:
        """True when Omega is identically 1, i.e. the bound carries no information."""
        return bool(np.all(np.abs(self.value - 1.0) < CONVEXITY_TOL))

    @cached_property
    def boundary(self) -> "RegionBoundary":
        return region_boundary(self)

    @cached_property
    def support(self) -> "SupportFunction":
        return support_function_h(self)


def omega_values(
    n: int,
    nu: int,
    lams,
    *,
    best_effort: bool = False,
    tol: float = DEFAULT_TOL,
) -> OmegaCurve:
    """Evaluate Omega on an arbitrary array of lambdas (no ordering or convexity checks)."""
    _check_args(n, nu, best_effort)
    lams = np.asarray(lams, dtype=float).reshape(-1)
    if np.any(lams < 0):
        raise ValueError("lambda must be non-negative")
    fam = _Family.build(n, nu)
    vals, is_minus = fam.values(lams, tol)
    best, idx = _pick(vals, fam.labels, TIE_TOL)
    minus = vals[:, is_minus].max(axis=1) if is_minus.any() else np.full(lams.size, -np.inf)
    plus = vals[:, ~is_minus].max(axis=1)
    return OmegaCurve(
        n=n,
        nu=nu,
        lam=lams,
        value=best,
        patterns=tuple(fam.labels[i][0] for i in idx),
        branches=tuple(fam.labels[i][1] for i in idx),
        minus=minus,
        plus=plus,
    )


def check_convexity(lam: np.ndarray, value: np.ndarray, tol: float = CONVEXITY_TOL) -> None:
    if lam.size < 3:
        return
    l0, l1, l2 = lam[:-2], lam[1:-1], lam[2:]
    w = (l1 - l0) / (l2 - l0)
    chord = (1 - w) * value[:-2] + w * value[2:]
    excess = value[1:-1] - chord
    k = int(np.argmax(excess))
    if excess[k] > tol:
        raise ConvexityError(
            f"Omega is not convex at lambda={l1[k]!r}: exceeds chord by {excess[k]:.3e}"
        )


def find_crossover(n: int, nu: int, lo: float, hi: float, tol: float = CROSSOVER_TOL) -> float:
    """Lambda in ``[lo, hi]`` where Omega_+ - Omega_- changes sign, by bisection."""

    def gap(lam: float) -> float:
        c = omega_values(n, nu, [lam], best_effort=True)
        return float(c.plus[0] - c.minus[0])

    return bisect_root(gap, lo, hi, tol)


def omega_curve(
    n: int,
    nu: int,
    lam_grid=None,
    *,
    refine: bool = True,
    best_effort: bool = False,
    tol: float = DEFAULT_TOL,
) -> OmegaCurve:
    """Sample Omega^(nu) on a sorted grid (default :func:`default_lambda_grid`).

    With ``refine`` the Omega_-/Omega_+ crossover points are located by
    bisection and inserted into the grid, so the straight part of the
    boundary is represented exactly.

    Raises:
        ConvexityError: if the samples violate convexity by more than 1e-9.
    """
    lams = default_lambda_grid() if lam_grid is None else np.asarray(lam_grid, dtype=float)
    lams = lams.reshape(-1)
    if lams.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(np.diff(lams) < 0) or lams[0] < 0:
        raise ValueError("lambda grid must be sorted and non-negative")
    lams = np.unique(lams)
    curve = omega_values(n, nu, lams, best_effort=best_effort, tol=tol)
    if refine:
        extra = [
            find_crossover(n, nu, lams[k], lams[k + 1]) for k in curve.crossovers()
        ]
        extra = [x for x in extra if not np.any(np.abs(lams - x) < CROSSOVER_TOL)]
        if extra:
            lams = np.union1d(lams, extra)
            curve = omega_values(n, nu, lams, best_effort=best_effort, tol=tol)
    check_convexity(curve.lam, curve.value)
    return curve


def crossover_lambda(curve: OmegaCurve) -> float | None:
    """First lambda at which Omega_- takes over from Omega_+ (a refined grid point)."""
    ks = curve.crossovers()
    if not ks:
        return None
    k = ks[0]
    gap = np.abs(curve.plus[k : k + 2] - curve.minus[k : k + 2])
    return float(curve.lam[k + int(np.argmin(gap))])


@dataclass(frozen=True)
class RegionBoundary:
    """Vertices of the upper boundary ``e_ph <= E(e)`` of the achievable region.

    ``lam_left``/``lam_right`` are the slopes of the supporting lines meeting
    at each vertex (equal for the end points).
    """

    n: int
    nu: int
    e: np.ndarray
    e_ph: np.ndarray
    lam_left: np.ndarray
    lam_right: np.ndarray
    all_achievable: bool = False

    def __call__(self, e):
        """Piecewise-linear boundary value at ``e`` (flat beyond the last vertex)."""
        return np.interp(e, self.e, self.e_ph)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.e.tolist(), self.e_ph.tolist()))


def region_boundary(curve: OmegaCurve) -> RegionBoundary:
    """Boundary polygon cut out by the sampled supporting lines ``e_ph = lam e + Omega(lam)``.

    Adjacent grid lines meet at ``e = -(secant slope)``; those vertices,
    plus the ``e = 0`` end of the steepest line, trace the boundary.
    Vertices with negative ``e_ph`` are infeasible and dropped, and
    ``e_ph`` is clamped to ``[0, 1]``.
    """
    lam, om = curve.lam, curve.value
    if lam.size == 1:
        e = np.array([0.0])
        eph = np.array([om[0]])
        left = right = lam.copy()
    else:
        e = -np.diff(om) / np.diff(lam)
        eph = om[1:] + lam[1:] * e
        left, right = lam[1:], lam[:-1]
        if e[-1] > 0:
            e = np.append(e, 0.0)
            eph = np.append(eph, om[-1])
            left = np.append(left, lam[-1])
            right = np.append(right, lam[-1])
    order = np.argsort(e, kind="stable")
    e, eph, left, right = e[order], eph[order], left[order], right[order]
    keep = (eph >= -CONVEXITY_TOL) & (e >= -CONVEXITY_TOL)
    e, eph, left, right = e[keep], eph[keep], left[keep], right[keep]
    e = np.clip(e, 0.0, None)
    eph = np.clip(eph, 0.0, 1.0)
    # merge vertices at numerically equal e; the lowest line wins there
    if e.size > 1:
        new = np.ones(e.size, dtype=bool)
        new[1:] = np.diff(e) > 1e-13
        starts = np.flatnonzero(new)
        ends = np.append(starts[1:], e.size) - 1
        e, eph = e[starts], np.minimum.reduceat(eph, starts)
        left, right = left[starts], right[ends]
    return RegionBoundary(curve.n, curve.nu, e, eph, left, right, curve.all_achievable)


def binary_entropy_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    return np.where(inside, -xs * np.log2(xs) - (1 - xs) * np.log2(1 - xs), 0.0)


def capped_entropy(e_ph) -> np.ndarray:
    """``h(e_ph)`` for ``e_ph <= 1/2`` and 1 above (the largest entropy any rate allows)."""
    e_ph = np.asarray(e_ph, dtype=float)
    return np.where(e_ph <= 0.5, binary_entropy_array(np.minimum(e_ph, 0.5)), 1.0)


@dataclass(frozen=True)
class SupportFunction:
    """``Omega_h(gamma) = sup_e [H(e) - gamma e]`` stored through the concave envelope of H."""

    n: int
    nu: int
    envelope: PiecewiseLinear

    def __call__(self, gamma):
        return self.envelope.support(gamma)

    def entropy_bound(self, e):
        """Concave envelope of ``H`` at ``e``, i.e. ``min_{gamma >= 0} [gamma e + Omega_h(gamma)]``."""
        return np.interp(e, self.envelope.x, self.envelope.y)

    def tangent_slope(self, e: float) -> float:
        """Slope of the envelope segment containing ``e`` (a subgradient of the envelope there)."""
        x, s = self.envelope.x, self.envelope.slopes
        if s.size == 0:
            return 0.0
        k = int(np.clip(np.searchsorted(x, e, side="right") - 1, 0, s.size - 1))
        return float(max(s[k], 0.0))

    def domain_max(self) -> float:
        return float(self.envelope.x[-1])


def _entropy_samples(boundary: RegionBoundary, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Points (e, e_ph) on the boundary polygon, dense where h is most curved."""
    e, eph = boundary.e, boundary.e_ph
    pts_e = [e[eph <= 0.5]]
    pts_E = [eph[eph <= 0.5]]
    lo, hi = float(eph[0]), float(min(eph[-1], 0.5))
    if e.size > 1 and hi > lo:
        # eph(e) is non-decreasing; drop flat stretches so it can be inverted
        rise = np.ones(e.size, dtype=bool)
        rise[1:] = np.diff(eph) > 0
        t = np.linspace(0.0, 1.0, count)
        E_s = lo + (hi - lo) * np.sin(0.5 * np.pi * t) ** 2
        # sin^2 clusters samples near the origin, where h'' ~ 1/e_ph
        pts_e.append(np.interp(E_s, eph[rise], e[rise]))
        pts_E.append(E_s)
    return np.concatenate(pts_e), np.concatenate(pts_E)


def support_function_h(curve: OmegaCurve, samples: int = ENTROPY_SAMPLES) -> SupportFunction:
    """Support function of the entropy region ``{(e, h) : h <= H(e)}``.

    ``H(e) = h(E(e))`` while the phase-error bound ``E(e) <= 1/2`` and 1
    beyond.  H is sampled along the boundary polygon and replaced by its
    upper concave envelope; the chord error is below 1e-7 for the default
    sample count.
    """
    b = curve.boundary
    if b.e.size == 0:
        raise ValueError(f"empty region for n={curve.n}, nu={curve.nu}")
    xs, Es = _entropy_samples(b, samples)
    over = b.e_ph > 0.5
    if over.any():
        # the first vertex past 1/2 only matters through H = 1
        xs = np.append(xs, b.e[np.argmax(over)])
        Es = np.append(Es, 1.0)
    env = upper_concave_envelope(np.column_stack([xs, capped_entropy(Es)]))
    return SupportFunction(curve.n, curve.nu, env)


def single_photon_support(gamma):
    """Exact ``Omega_h^(1)(gamma) = h(6 e~) - gamma e~`` with ``gamma = 6 h'(6 e~)``."""
    g = np.asarray(gamma, dtype=float)
    x = 1.0 / (1.0 + np.exp2(np.minimum(g, 6000.0) / 6.0))
    out = binary_entropy_array(x) - g * x / 6.0
    return out if out.ndim else float(out)


def phase_error_bound(n: int, nu: int, e: float, lam_max: float = 1e4, tol: float = 1e-10) -> float:
    """``min_{0 <= lam <= lam_max} [lam e + Omega(lam)]`` by golden section on exact Omega values."""
    if nu <= 1:
        f = lambda lam: lam * e + float(omega_closed_form(nu, lam))
    else:
        f = lambda lam: lam * e + omega(n, nu, lam)[0]
    grid = np.concatenate([[0.0], np.geomspace(1e-3, lam_max, 120)])
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    _, v = golden_section_min(f, lo, hi, tol)
    return float(min(v, vals[i], 1.0))


@dataclass(frozen=True)
class ChainReport:
    lam: np.ndarray
    margins: np.ndarray  # (L, nu_max + 1): Omega^(k+1) - Omega^(k) ..., last column 1 - Omega^(nu_max)
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())


def verify_chain(
    n: int,
    nu_max: int,
    lam_grid,
    *,
    tol: float = 1e-10,
    strict: bool = False,
    curves: Sequence[OmegaCurve] | None = None,
) -> ChainReport:
    """Check ``Omega^(0) <= Omega^(1) <= ... <= Omega^(nu_max) <= 1`` pointwise.

    Violations are listed as ``(lambda, nu, margin)`` where ``nu`` names the
    upper member of the failing pair (``nu_max + 1`` stands for the cap 1).
    With ``strict`` a :class:`ChainViolation` is raised instead.
    """
    if nu_max > VALIDATED_MAX_NU:
        raise UnvalidatedPhotonNumber(f"unvalidated photon number {nu_max}")
    lams = np.asarray(lam_grid, dtype=float).reshape(-1)
    if curves is None:
        curves = [omega_values(n, nu, lams) for nu in range(nu_max + 1)]
    vals = np.stack([c.value for c in curves], axis=1)
    margins = np.column_stack([np.diff(vals, axis=1), 1.0 - vals[:, -1]])
    bad = np.argwhere(margins < -tol)
    violations = [(float(lams[i]), int(j) + 1, float(margins[i, j])) for i, j in bad]
    report = ChainReport(lams, margins, violations)
    if strict and violations:
        raise ChainViolation(violations)
    return report
