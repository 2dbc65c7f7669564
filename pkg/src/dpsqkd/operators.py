"""Bit-error operator, phase-error diagonals and the candidate matrices for Omega.

All matrices live on Bob's single-photon register, indexed by the slot
``i = 1..n`` (0-based in code).  The bit-error operator is tri-diagonal
and each phase-error operator is diagonal for a fixed Alice pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable

import numpy as np

from .linalg import TridiagonalSymmetric

MAX_BLOCK = 64

EDGE_COUPLING = 1.0 / (2.0 * np.sqrt(2.0))
BULK_COUPLING = 0.25


@dataclass(frozen=True, order=True)
class Pattern:
    """An n-bit sequence ``a_1 .. a_n`` of Alice's register.

    Ordering compares the bit strings lexicographically ("0..." before
    "1..."); among tied argmaxes the largest pattern is reported.
    """

    bits: tuple[bool, ...]

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        if not 1 <= len(bits) <= MAX_BLOCK:
            raise ValueError(f"pattern length must be in 1..{MAX_BLOCK}, got {len(bits)}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "Pattern":
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls(tuple(c == "1" for c in s))

    @classmethod
    def from_ones(cls, n: int, ones: Iterable[int]) -> "Pattern":
        """Pattern of length ``n`` with ones at the given 0-based positions."""
        bits = [False] * n
        for i in ones:
            bits[i] = True
        return cls(tuple(bits))

    @classmethod
    def run(cls, n: int, start: int, length: int) -> "Pattern":
        """Consecutive ones at 0-based positions ``start .. start + length - 1``."""
        if start < 0 or length < 1 or start + length > n:
            raise ValueError(f"run {start}+{length} does not fit in {n} bits")
        return cls.from_ones(n, range(start, start + length))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @property
    def word(self) -> int:
        """Integer with bit ``n - 1 - i`` set when ``a_{i+1} = 1`` (string read as binary)."""
        return int(str(self), 2)

    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=float)

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __or__(self, other: "Pattern") -> "Pattern":
        return Pattern(tuple(a or b for a, b in zip(self.bits, other.bits)))

    def covers(self, other: "Pattern") -> bool:
        """True when ``self >= other`` bitwise."""
        return all(a or not b for a, b in zip(self.bits, other.bits))


def kappa(n: int) -> np.ndarray:
    """Beam-splitter weights of Bob's register: 1 at both ends, 1/2 inside."""
    if n < 2:
        raise ValueError("block too short")
    k = np.full(n, 0.5)
    k[0] = k[-1] = 1.0
    return k


def _check_block(n: int) -> None:
    if n < 3:
        raise ValueError("block too short")
    if n > MAX_BLOCK:
        raise ValueError(f"block longer than {MAX_BLOCK}")


@lru_cache(maxsize=None)
def _pi_offdiag(n: int) -> np.ndarray:
    off = np.full(n - 1, -BULK_COUPLING)
    off[0] = off[-1] = -EDGE_COUPLING
    off.setflags(write=False)
    return off


def build_pi(n: int) -> TridiagonalSymmetric:
    """Bit-error operator on Bob's register (sum of the bit-1 POVM elements)."""
    _check_block(n)
    return TridiagonalSymmetric(np.full(n, 0.5), _pi_offdiag(n).copy())


def pi_ph_diagonal(bits: np.ndarray) -> np.ndarray:
    """Diagonal of the phase-error operator for a 0/1 array of shape ``(..., n)``."""
    a = np.asarray(bits, dtype=float)
    d = np.empty_like(a)
    d[..., 0] = 0.5 * a[..., 0] + 0.5 * a[..., 1]
    d[..., -1] = 0.5 * a[..., -2] + 0.5 * a[..., -1]
    d[..., 1:-1] = 0.25 * a[..., :-2] + 0.5 * a[..., 1:-1] + 0.25 * a[..., 2:]
    return d


def build_pi_ph(pattern: Pattern) -> np.ndarray:
    """Diagonal phase-error operator for Alice pattern ``pattern``."""
    _check_block(pattern.n)
    return pi_ph_diagonal(pattern.array())


def shifted_operator(pattern: Pattern, lam: float) -> TridiagonalSymmetric:
    """``Pi_ph(pattern) - lam * Pi`` on the full register."""
    n = pattern.n
    _check_block(n)
    return TridiagonalSymmetric(
        build_pi_ph(pattern) - 0.5 * lam, -lam * _pi_offdiag(n)
    )


def minus_patterns(n: int, nu: int) -> list[Pattern]:
    """Patterns of weight ``nu - 1`` in lexicographic string order."""
    _check_block(n)
    if nu < 1:
        return []
    pats = [Pattern.from_ones(n, ones) for ones in combinations(range(n), nu - 1)]
    return sorted(pats)


@dataclass(frozen=True)
class Run:
    """A consecutive block of ones ``start .. start + length - 1`` (0-based)."""

    n: int
    start: int
    length: int

    @property
    def pattern(self) -> Pattern:
        return Pattern.run(self.n, self.start, self.length)

    @property
    def slots(self) -> slice:
        return slice(self.start, self.start + self.length)


def plus_runs(n: int, nu: int) -> list[Run]:
    """Runs of length ``1 .. nu + 1`` that fit in ``n`` slots, in pattern string order."""
    _check_block(n)
    if nu < 0:
        raise ValueError("photon number must be non-negative")
    runs = [
        Run(n, start, k + 1)
        for k in range(min(nu, n - 1) + 1)
        for start in range(n - k)
    ]
    return sorted(runs, key=lambda r: r.pattern)


def restricted_operator(run: Run, lam: float) -> TridiagonalSymmetric:
    """``Pi_ph(run) - lam * Pi`` restricted to the run's own slots."""
    full = shifted_operator(run.pattern, lam)
    s = run.slots
    return TridiagonalSymmetric(full.diag[s], full.offdiag[s.start : s.stop - 1])


def candidates_minus(n: int, nu: int, lam: float) -> list[TridiagonalSymmetric]:
    """Full n-by-n candidates, one per pattern of weight ``nu - 1`` (see :func:`minus_patterns`)."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return [shifted_operator(p, lam) for p in minus_patterns(n, nu)]


def candidates_plus(n: int, nu: int, lam: float) -> list[TridiagonalSymmetric]:
    """Run-restricted candidates, one per entry of :func:`plus_runs`."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return [restricted_operator(r, lam) for r in plus_runs(n, nu)]


# Batched forms used by the fast Omega evaluation: the diagonal of every
# candidate is ``ph - lam/2`` and the off-diagonal is ``-lam * pi_off``.

def minus_family_arrays(n: int, nu: int) -> tuple[np.ndarray, np.ndarray]:
    """``(ph, pi_off)`` with shapes ``(C, n)`` and ``(n - 1,)`` for the minus family."""
    pats = minus_patterns(n, nu)
    if not pats:
        return np.zeros((0, n)), _pi_offdiag(n)
    ph = pi_ph_diagonal(np.array([p.array() for p in pats]))
    return ph, _pi_offdiag(n)


def plus_family_arrays(n: int, nu: int, length: int) -> tuple[list[Run], np.ndarray, np.ndarray]:
    """Runs of one ``length`` with their restricted ``ph`` ``(R, length)`` and ``pi_off`` ``(R, length - 1)``."""
    runs = [r for r in plus_runs(n, nu) if r.length == length]
    if not runs:
        return [], np.zeros((0, length)), np.zeros((0, length - 1))
    off = _pi_offdiag(n)
    ph = np.array([build_pi_ph(r.pattern)[r.slots] for r in runs])
    pi_off = np.array([off[r.start : r.start + length - 1] for r in runs]).reshape(len(runs), length - 1)
    return runs, ph, pi_off
