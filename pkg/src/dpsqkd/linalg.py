"""Small symmetric eigen-solvers and piecewise-linear envelope utilities.

Everything here works on matrices of size at most a few dozen, so the
emphasis is on predictable accuracy rather than speed.  The tri-diagonal
solver is vectorised over leading batch axes because the phase-error
bounds need the largest eigenvalue of thousands of small matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solve_banded

DEFAULT_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SLOPE_TIE_TOL = 1e-12


class EigenError(ArithmeticError):
    """Raised when an eigen-solver cannot certify its result."""


@dataclass(frozen=True)
class TridiagonalSymmetric:
    """Real symmetric tri-diagonal matrix stored as its diagonal and first off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        e = np.asarray(self.offdiag, dtype=float).reshape(-1)
        if e.size != max(d.size - 1, 0):
            raise ValueError(
                f"off-diagonal has {e.size} entries, expected {max(d.size - 1, 0)}"
            )
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def gershgorin(self) -> tuple[float, float]:
        """Interval containing the whole spectrum."""
        lo, hi = gershgorin_bounds(self.diag, self.offdiag)
        return float(lo), float(hi)

    def norm(self) -> float:
        """Infinity norm (max absolute row sum)."""
        r = np.abs(self.diag).copy()
        a = np.abs(self.offdiag)
        r[:-1] += a
        r[1:] += a
        return float(r.max()) if r.size else 0.0


@dataclass(frozen=True)
class DenseSymmetric:
    """Dense real symmetric matrix; symmetry is enforced at construction."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("matrix is not symmetric")
        object.__setattr__(self, "entries", 0.5 * (a + a.T))

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def gershgorin_bounds(diag: np.ndarray, offdiag: np.ndarray):
    """Batched Gershgorin interval ``(lo, hi)`` for tri-diagonal matrices."""
    a = np.abs(offdiag)
    r = np.zeros_like(diag)
    r[..., :-1] += a
    r[..., 1:] += a
    return (diag - r).min(axis=-1), (diag + r).max(axis=-1)


def sturm_count(diag: np.ndarray, offdiag: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below ``x`` for each matrix in the batch.

    Uses the LDL^T pivot recurrence; exact-zero pivots are nudged to a tiny
    negative number, which is the usual safe choice.
    """
    n = diag.shape[-1]
    e2 = offdiag**2
    tiny = np.finfo(float).tiny ** 0.5
    q = diag[..., 0] - x
    count = (q < 0).astype(np.int64)
    for i in range(1, n):
        q = np.where(q == 0.0, -tiny, q)
        q = diag[..., i] - x - e2[..., i - 1] / q
        count += q < 0
    return count


def max_eigenvalues_tridiag(diag, offdiag, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Largest eigenvalue of every tri-diagonal matrix in a batch.

    ``diag`` has shape ``(..., n)`` and ``offdiag`` shape ``(..., n - 1)``.
    Bisection on the Sturm count, bracketed by Gershgorin discs, until the
    bracket is narrower than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    if diag.shape[-1] == 0:
        raise ValueError("empty input")
    if offdiag.shape != diag.shape[:-1] + (diag.shape[-1] - 1,):
        raise ValueError(f"shape mismatch: diag {diag.shape}, offdiag {offdiag.shape}")
    n = diag.shape[-1]
    if n == 1:
        return diag[..., 0].copy()
    lo, hi = gershgorin_bounds(diag, offdiag)
    lo = lo - tol
    hi = hi + tol
    width = float(np.max(hi - lo))
    steps = max(1, int(np.ceil(np.log2(width / tol))) + 1)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        all_below = sturm_count(diag, offdiag, mid) >= n
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
        if float(np.max(hi - lo)) <= tol:
            break
    return 0.5 * (lo + hi)


def max_eigenvalue_tridiag(m: TridiagonalSymmetric, tol: float = DEFAULT_TOL) -> float:
    """Largest eigenvalue of ``m`` to within ``tol``."""
    if m.n == 0:
        raise ValueError("empty input")
    return float(max_eigenvalues_tridiag(m.diag, m.offdiag, tol))


def max_eigenpair_tridiag(
    m: TridiagonalSymmetric, tol: float = DEFAULT_TOL
) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector of ``m``.

    The vector comes from inverse iteration with a shift placed just above
    the largest eigenvalue, so the shifted matrix is negative definite and
    never singular.  Its largest-magnitude component is made positive.

    Raises:
        EigenError: if the residual ``||Mv - lambda v||`` exceeds
            ``10 * tol * max(||M||, 1)``.
    """
    lam = max_eigenvalue_tridiag(m, tol)
    n = m.n
    if n == 1:
        return lam, np.ones(1)
    norm = max(m.norm(), 1.0)
    shift = lam + 10.0 * tol * norm
    bands = np.zeros((3, n))
    bands[0, 1:] = m.offdiag
    bands[1] = m.diag - shift
    bands[2, :-1] = m.offdiag
    v = np.ones(n) + np.linspace(0.0, 0.1, n)
    v /= np.linalg.norm(v)
    for _ in range(4):
        w = solve_banded((1, 1), bands, v)
        nrm = np.linalg.norm(w)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise EigenError(f"inverse iteration broke down at shift {shift!r}")
        v = w / nrm
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    rayleigh = float(v @ m.matvec(v))
    if abs(rayleigh - lam) <= tol:
        lam = rayleigh
    residual = float(np.linalg.norm(m.matvec(v) - lam * v))
    if residual > 10.0 * tol * norm:
        raise EigenError(
            f"eigenpair residual {residual:.3e} exceeds bound {10.0 * tol * norm:.3e} "
            f"(lambda={lam!r}, n={n}); bracketing is defective"
        )
    return lam, v


def jacobi_eigenvalues(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps continue until the Frobenius norm of the off-diagonal part drops
    below ``tol``; more than ``JACOBI_MAX_SWEEPS`` sweeps is an error.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        # summing the off-diagonal squares directly avoids cancellation
        off = np.sqrt(np.sum(a[offdiag] ** 2))
        if off < tol:
            return np.diag(a).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-300 * max(abs(diff), 1.0) or abs(diff) > 1e150 * abs(apq):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    raise EigenError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def max_eigenvalue_dense(m, tol: float = DEFAULT_TOL) -> float:
    """Largest eigenvalue of a dense symmetric matrix (cyclic Jacobi)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(m, DenseSymmetric):
        m = DenseSymmetric(m)
    if m.size == 0:
        raise ValueError("empty input")
    return float(jacobi_eigenvalues(m.entries, tol).max())


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear function through sorted breakpoints.

    ``concave`` records the shape the breakpoints were built to have
    (``True`` for an upper concave envelope, ``False`` for convex, ``None``
    when unknown); construction checks that the slopes agree with it.
    """

    x: np.ndarray
    y: np.ndarray
    concave: bool | None = None
    _slopes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.size == 0 or x.size != y.size:
            raise ValueError("need matching, non-empty x and y")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        slopes = np.diff(y) / np.diff(x)
        if self.concave is not None and slopes.size > 1:
            d = np.diff(slopes)
            tol = SLOPE_TIE_TOL * max(1.0, float(np.abs(slopes).max()))
            if self.concave and np.any(d > tol):
                raise ValueError("slopes are not non-increasing for a concave function")
            if not self.concave and np.any(d < -tol):
                raise ValueError("slopes are not non-decreasing for a convex function")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "_slopes", slopes)

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def slopes(self) -> np.ndarray:
        return self._slopes

    def __call__(self, t):
        return np.interp(t, self.x, self.y)

    def support(self, gamma):
        """``max_k (y_k - gamma * x_k)``, vectorised over ``gamma``."""
        g = np.asarray(gamma, dtype=float)
        if self.concave:
            # the maximiser sits where the slope sequence crosses gamma
            k = np.searchsorted(-self._slopes, -np.atleast_1d(g), side="left")
            out = self.y[k] - np.atleast_1d(g) * self.x[k]
        else:
            vals = self.y[None, :] - np.atleast_1d(g)[:, None] * self.x[None, :]
            out = vals.max(axis=1)
        return out.reshape(g.shape) if g.ndim else float(out[0])

    def support_argmax(self, gamma: float) -> int:
        """Index of the breakpoint attaining :meth:`support` (smallest x on ties)."""
        return int(np.argmax(self.y - gamma * self.x))


def upper_concave_envelope(points: Iterable[Sequence[float]]) -> PiecewiseLinear:
    """Least concave majorant of a finite point set on ``[min x, max x]``.

    Points sharing an x keep the largest y.  Collinear interior points
    (slope change within ``SLOPE_TIE_TOL``) are dropped, so applying the
    envelope to its own breakpoints returns the same breakpoints.
    """
    pts = np.asarray(list(points), dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("coordinates must be finite")
    order = np.lexsort((-pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = pts[1:, 0] != pts[:-1, 0]
    pts = pts[keep]

    hull: list[tuple[float, float]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            s_left = (y1 - y0) / (x1 - x0)
            s_right = (y - y1) / (x - x1)
            tol = SLOPE_TIE_TOL * max(1.0, abs(s_left), abs(s_right))
            if s_right >= s_left - tol:
                hull.pop()
            else:
                break
        hull.append((x, y))
    hx, hy = zip(*hull)
    return PiecewiseLinear(np.array(hx), np.array(hy), concave=True)
