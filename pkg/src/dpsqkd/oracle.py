"""Brute-force error operators on the full register space, for cross-checking.

Everything here is assembled from the measurement operators themselves,
in the Z basis of Alice's n qubits times the slot basis of Bob's
single-photon register.  Nothing is taken from the tri-diagonal
reduction in :mod:`dpsqkd.operators`, so agreement between the two is a
meaningful test.

Basis index of ``|a>_A |i>_B`` is ``word(a) * n + i`` with ``i`` 0-based and
the first qubit as the most significant bit of ``word``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
import scipy.sparse as sp

from .operators import Pattern

MIN_BLOCK = 3
MAX_BLOCK = 8
DEFAULT_FOCK_MARGIN = 8
FOCK_TAIL_TOL = 1e-12

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_KET = np.eye(2)


def _check_n(n: int) -> None:
    if not MIN_BLOCK <= n <= MAX_BLOCK:
        raise ValueError(f"oracle supports {MIN_BLOCK} <= n <= {MAX_BLOCK}, got {n}")


def _slot_weights(n: int) -> np.ndarray:
    w = np.full(n, 0.5)
    w[0] = w[-1] = 1.0
    return w


def _proj(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v)


def _embed(op: np.ndarray, first: int, width: int, n: int) -> sp.csr_matrix:
    """Operator on qubits ``first .. first + width - 1`` of an n-qubit register."""
    left = sp.identity(2**first, format="csr")
    right = sp.identity(2 ** (n - first - width), format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def _bob_povm(n: int, j: int, s: int) -> np.ndarray:
    """``Pi_{j,s} = P(sqrt(k_j)|j> + (-1)^s sqrt(k_{j+1})|j+1>) / 2`` for 0-based ``j``."""
    k = _slot_weights(n)
    v = np.zeros(n)
    v[j] = math.sqrt(k[j])
    v[j + 1] = (-1) ** s * math.sqrt(k[j + 1])
    return 0.5 * _proj(v)


def _filter(n: int, j: int) -> np.ndarray:
    """``F_j : H_B -> H_Bq`` as a 2 x n matrix."""
    k = _slot_weights(n)
    f = np.zeros((2, n))
    f[:, j] = math.sqrt(k[j]) * (_H @ _KET[1])
    f[:, j + 1] = math.sqrt(k[j + 1]) * (_H @ _KET[0])
    return f


def _alice_circuit() -> list[np.ndarray]:
    """Measurement operators ``M_k`` from the qubit pair (index ``2 a_j + a_{j+1}``) to one qubit."""
    pair = lambda a, b: np.eye(4)[2 * a + b]
    m1 = np.outer(_H @ _KET[0], pair(0, 1)) + np.outer(_H @ _KET[1], pair(1, 0))
    m2 = np.outer(_KET[0], pair(0, 0) + pair(1, 1)) / math.sqrt(2.0)
    m3 = np.outer(_KET[1], pair(0, 0) - pair(1, 1)) / math.sqrt(2.0)
    return [m1, m2, m3]


@lru_cache(maxsize=None)
def _sparse_error_operators(n: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    dim = 2**n * n
    e_op = sp.csr_matrix((dim, dim))
    eph_op = sp.csr_matrix((dim, dim))
    x_proj = [_proj(_H @ _KET[s]) for s in (0, 1)]
    circuit = _alice_circuit()
    for j in range(n - 1):
        for s, s2 in product((0, 1), repeat=2):
            a_part = _embed(np.kron(x_proj[s], x_proj[s2]), j, 2, n)
            e_op = e_op + sp.kron(a_part, sp.csr_matrix(_bob_povm(n, j, s ^ s2 ^ 1)), format="csr")
        f = _filter(n, j)
        for s in (0, 1):
            b_part = f.T @ x_proj[1 - s] @ f
            a_pair = sum(m.T @ x_proj[s] @ m for m in circuit)
            eph_op = eph_op + sp.kron(_embed(a_pair, j, 2, n), sp.csr_matrix(b_part), format="csr")
    return e_op, eph_op


@dataclass(frozen=True)
class JointOperator:
    """Dense real symmetric operator on (a subset of) the ``|a>|i>`` basis.

    ``index`` lists the full-space indices of the retained basis vectors in
    ascending order, i.e. pattern-lexicographic and then by slot.
    """

    n: int
    index: np.ndarray
    entries: np.ndarray

    def __post_init__(self):
        m = self.entries
        if m.shape != (self.index.size, self.index.size):
            raise ValueError("entries do not match the basis size")
        if not np.allclose(m, m.T, atol=1e-14, rtol=0):
            raise ValueError("matrix is not symmetric")

    @property
    def dim(self) -> int:
        return self.index.size

    @property
    def basis(self) -> list[tuple[Pattern, int]]:
        """``(pattern, slot)`` pairs with 1-based slots."""
        n = self.n
        return [
            (Pattern.from_string(format(k // n, f"0{n}b")), k % n + 1) for k in self.index.tolist()
        ]

    def vector(self, amplitudes: dict[int, float]) -> np.ndarray:
        """Embed a sparse full-space vector ``{full index: amplitude}`` into this basis."""
        pos = {k: p for p, k in enumerate(self.index.tolist())}
        v = np.zeros(self.dim)
        for k, c in amplitudes.items():
            if k in pos:
                v[pos[k]] = c
            elif c != 0:
                raise ValueError(f"state has weight outside the operator basis (index {k})")
        return v


def sector_index(n: int, nu: int) -> np.ndarray:
    """Full-space indices spanning the range of ``P^(nu)``: weights ``nu, nu - 2, ...``."""
    words = np.arange(2**n)
    weights = np.array([bin(w).count("1") for w in words])
    ok = (weights <= nu) & ((nu - weights) % 2 == 0)
    return (words[ok][:, None] * n + np.arange(n)[None, :]).reshape(-1)


def _dense(op: sp.csr_matrix, index: np.ndarray) -> np.ndarray:
    sub = op[index][:, index].toarray()
    return 0.5 * (sub + sub.T)


def build_error_operators(n: int, nu: int | None = None) -> tuple[JointOperator, JointOperator]:
    """Bit- and phase-error operators, on the full space or restricted to ``P^(nu)``."""
    _check_n(n)
    e_op, eph_op = _sparse_error_operators(n)
    index = np.arange(2**n * n) if nu is None else sector_index(n, nu)
    return JointOperator(n, index, _dense(e_op, index)), JointOperator(n, index, _dense(eph_op, index))


@lru_cache(maxsize=None)
def _sparse_u(n: int) -> sp.csr_matrix:
    hn = np.ones((1, 1))
    for _ in range(n):
        hn = np.kron(hn, _H)
    signs = np.array(
        [(-1.0) ** ((w >> (n - 1 - i)) & 1) for w in range(2**n) for i in range(n)]
    )
    h_full = sp.kron(sp.csr_matrix(hn), sp.identity(n), format="csr")
    return (h_full @ sp.diags(signs) @ h_full).tocsr()


def build_u(n: int) -> JointOperator:
    """The orthogonal map that multiplies ``H|s>..|i>`` by ``(-1)^{s_i}``, as a dense matrix."""
    _check_n(n)
    u = _sparse_u(n).toarray()
    u[np.abs(u) < 1e-15] = 0.0
    return JointOperator(n, np.arange(2**n * n), u)


def brute_force_omega(n: int, nu: int, lam: float) -> float:
    """Largest eigenvalue of ``P^(nu) (e_ph - lam e) P^(nu)`` by a dense LAPACK solve."""
    _check_n(n)
    if not 0 <= nu <= 3:
        raise ValueError("oracle photon numbers are 0..3")
    e_op, eph_op = build_error_operators(n, nu)
    return float(np.linalg.eigvalsh(eph_op.entries - lam * e_op.entries)[-1])


@dataclass(frozen=True)
class AttackState:
    """``sum_i c_i |a* xor b_i>|i>``, where ``b_i`` has a single one at slot ``i``."""

    pattern: Pattern
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.amplitudes, dtype=float)
        if c.size != self.pattern.n:
            raise ValueError("one amplitude per slot is required")
        norm = math.sqrt(float(c @ c))
        if norm == 0:
            raise ValueError("zero state")
        object.__setattr__(self, "amplitudes", c / norm)

    @property
    def n(self) -> int:
        return self.pattern.n

    def components(self) -> dict[int, float]:
        n, word = self.n, self.pattern.word
        out = {}
        for i, c in enumerate(self.amplitudes.tolist()):
            if c != 0:
                flipped = word ^ (1 << (n - 1 - i))
                out[flipped * n + i] = c
        return out


def attack_state_errors(state: AttackState, e_op: JointOperator, eph_op: JointOperator) -> tuple[float, float]:
    """Bit and phase error probabilities ``(<psi|e|psi>, <psi|e_ph|psi>)``."""
    if not state.n == e_op.n == eph_op.n:
        raise ValueError("state and operators have different block lengths")
    if e_op.index.size != eph_op.index.size or np.any(e_op.index != eph_op.index):
        raise ValueError("operators live on different bases")
    v = e_op.vector(state.components())
    return float(v @ e_op.entries @ v), float(v @ eph_op.entries @ v)


def conjugation_residuals(n: int, pi: np.ndarray | None = None) -> dict[str, float]:
    """Largest entrywise mismatch of the three block-diagonalisation identities.

    ``pi`` overrides the dense bit-error operator used as the reference,
    which lets callers confirm a deliberately wrong operator is caught.
    """
    from .operators import build_pi, pi_ph_diagonal

    _check_n(n)
    u = _sparse_u(n)
    e_op, eph_op = _sparse_error_operators(n)
    ref_pi = build_pi(n).to_dense() if pi is None else np.asarray(pi, dtype=float)
    dim_a = 2**n
    words = np.arange(dim_a)
    bits = ((words[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(float)

    got_e = (u @ e_op @ u.T).toarray()
    want_e = np.kron(np.eye(dim_a), ref_pi)
    got_ph = (u @ eph_op @ u.T).toarray()
    want_ph = np.diag(pi_ph_diagonal(bits).reshape(-1))

    weights = bits.sum(axis=1)
    res_p = 0.0
    for nu in range(4):
        p = np.zeros(dim_a * n)
        p[sector_index(n, nu)] = 1.0
        got_p = (u @ sp.diags(p) @ u.T).toarray()
        lower = ((weights <= nu - 1) & ((nu - 1 - weights) % 2 == 0)).astype(float)
        upper = (weights == nu + 1).astype(float)
        want_p = np.diag((lower[:, None] + upper[:, None] * bits).reshape(-1))
        res_p = max(res_p, float(np.abs(got_p - want_p).max()))
    return {
        "bit_error": float(np.abs(got_e - want_e).max()),
        "phase_error": float(np.abs(got_ph - want_ph).max()),
        "projection": res_p,
    }


@dataclass(frozen=True)
class PhiAmplitude:
    pattern: Pattern
    nu: int
    value: float


def _parity_series(alpha: float, parity: int, cutoff: int) -> np.ndarray:
    """Per-pulse coefficients ``alpha^m / sqrt(m!)`` for ``m <= cutoff`` of the given parity, else 0."""
    m = np.arange(cutoff + 1)
    coeff = np.array([alpha**k / math.sqrt(math.factorial(k)) for k in m.tolist()])
    return np.where(m % 2 == parity, coeff, 0.0)


def phi_support(n: int, alpha: float, nu: int, fock_cutoff: int | None = None) -> list[PhiAmplitude]:
    """Norms of ``<a|<nu|Phi>`` for every pattern ``a``, from the truncated Fock series.

    Each pulse contributes ``(|alpha> + (-1)^a_i |-alpha>) / 2``, whose Fock
    expansion keeps only photon numbers of parity ``a_i``.  Projecting onto
    ``nu`` photons in total sums over compositions of ``nu``; patterns with no
    admissible composition get an exact zero.

    Raises:
        ValueError: if ``fock_cutoff < nu`` or the truncated single-pulse
            Fock tail exceeds 1e-12.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    cutoff = nu + DEFAULT_FOCK_MARGIN if fock_cutoff is None else fock_cutoff
    if cutoff < nu:
        raise ValueError("Fock cutoff below the photon number")
    kept = sum(math.exp(-alpha**2) * alpha ** (2 * k) / math.factorial(k) for k in range(cutoff + 1))
    if 1.0 - kept > FOCK_TAIL_TOL:
        raise ValueError(f"Fock cutoff {cutoff} leaves tail mass {1 - kept:.2e}")
    series = [_parity_series(alpha, p, cutoff) for p in (0, 1)]
    out = []
    for word in range(2**n):
        a = [(word >> (n - 1 - i)) & 1 for i in range(n)]
        # squared norm: convolve |coefficient|^2 over pulses, read off total nu
        dist = np.zeros(1)
        dist[0] = 1.0
        for ai in a:
            dist = np.convolve(dist, series[ai] ** 2)[: nu + 1]
        total = float(dist[nu]) if dist.size > nu else 0.0
        value = math.exp(-n * alpha**2 / 2) * math.sqrt(total) if total > 0 else 0.0
        out.append(PhiAmplitude(Pattern(tuple(bool(b) for b in a)), nu, value))
    return out
