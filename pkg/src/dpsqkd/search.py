"""One-dimensional search helpers: bracketing grid scans, golden section, bisection."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-8, max_iter: int = 200
) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    if b < a:
        a, b = b, a
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the endpoints of the final bracket may beat its midpoint on kinked objectives
    for cand, fcand in ((c, fc), (d, fd)):
        if fcand < fx:
            x, fx = cand, fcand
    return x, fx


def scan_then_golden(
    f: Callable[[float], float], grid: np.ndarray, tol: float = 1e-8
) -> tuple[float, float]:
    """Minimise ``f`` by a grid scan followed by golden section around the best node.

    Only assumes ``f`` is unimodal between the neighbours of the best grid
    node.  Ties on the grid resolve to the smallest abscissa.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    x, fx = golden_section_min(f, lo, hi, tol)
    if vals[i] < fx:
        return float(grid[i]), float(vals[i])
    return x, fx


def bisect_root(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200
) -> float:
    """Root of ``f`` on ``[lo, hi]`` by plain bisection; ``f(lo)`` and ``f(hi)`` must differ in sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"root not bracketed: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or hi - lo <= tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
