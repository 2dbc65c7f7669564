import numpy as np
import pytest

from dpsqkd.linalg import (
    DenseSymmetric,
    EigenError,
    PiecewiseLinear,
    TridiagonalSymmetric,
    jacobi_eigenvalues,
    max_eigenpair_tridiag,
    max_eigenvalue_dense,
    max_eigenvalue_tridiag,
    max_eigenvalues_tridiag,
    sturm_count,
    upper_concave_envelope,
)


def random_tridiag(rng, n):
    return TridiagonalSymmetric(rng.normal(size=n), rng.normal(size=n - 1))


def test_tridiagonal_shape_is_validated():
    with pytest.raises(ValueError):
        TridiagonalSymmetric(np.zeros(3), np.zeros(3))


def test_dense_round_trip_and_matvec():
    m = TridiagonalSymmetric([1.0, 2.0, 3.0], [0.5, -0.25])
    dense = m.to_dense()
    assert np.array_equal(dense, dense.T)
    v = np.array([1.0, -1.0, 2.0])
    assert np.allclose(m.matvec(v), dense @ v)
    lo, hi = m.gershgorin()
    w = np.linalg.eigvalsh(dense)
    assert lo <= w.min() and w.max() <= hi


def test_sturm_count_matches_spectrum():
    rng = np.random.default_rng(1)
    m = random_tridiag(rng, 7)
    w = np.linalg.eigvalsh(m.to_dense())
    for x in np.linspace(w.min() - 1, w.max() + 1, 25):
        assert sturm_count(m.diag, m.offdiag, np.asarray(x)) == np.sum(w < x)


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_max_eigenvalue_against_lapack(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        m = random_tridiag(rng, n) if n > 1 else TridiagonalSymmetric(rng.normal(size=1), [])
        ref = np.linalg.eigvalsh(m.to_dense())[-1]
        assert abs(max_eigenvalue_tridiag(m) - ref) < 1e-11


def test_batched_eigenvalues_broadcast():
    rng = np.random.default_rng(3)
    d = rng.normal(size=(4, 6, 5))
    e = rng.normal(size=(4, 6, 4))
    got = max_eigenvalues_tridiag(d, e)
    assert got.shape == (4, 6)
    ref = max_eigenvalue_tridiag(TridiagonalSymmetric(d[2, 3], e[2, 3]))
    assert abs(got[2, 3] - ref) < 1e-12


def test_empty_input_is_rejected():
    with pytest.raises(ValueError, match="empty input"):
        max_eigenvalue_tridiag(TridiagonalSymmetric([], []))


def test_eigenpair_residual_and_sign_convention():
    rng = np.random.default_rng(7)
    for _ in range(30):
        m = random_tridiag(rng, 8)
        lam, v = max_eigenpair_tridiag(m)
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert np.linalg.norm(m.matvec(v) - lam * v) < 1e-10
        assert v[np.argmax(np.abs(v))] > 0


def test_eigenpair_on_degenerate_spectrum():
    # two decoupled identical blocks: the top eigenvalue is double
    m = TridiagonalSymmetric([1.0, 1.0, 1.0, 1.0], [0.5, 0.0, 0.5])
    lam, v = max_eigenpair_tridiag(m)
    assert abs(lam - 1.5) < 1e-12
    assert np.linalg.norm(m.matvec(v) - lam * v) < 1e-10


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(9, 9))
    a = a + a.T
    assert np.allclose(np.sort(jacobi_eigenvalues(a)), np.linalg.eigvalsh(a), atol=1e-11)
    assert abs(max_eigenvalue_dense(a) - np.linalg.eigvalsh(a)[-1]) < 1e-11


def test_dense_symmetric_rejects_asymmetry():
    with pytest.raises(ValueError, match="not symmetric"):
        DenseSymmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_jacobi_reports_non_convergence(monkeypatch):
    import dpsqkd.linalg as la

    monkeypatch.setattr(la, "JACOBI_MAX_SWEEPS", 0)
    with pytest.raises(EigenError):
        la.jacobi_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_piecewise_linear_support_and_evaluation():
    f = PiecewiseLinear([0.0, 1.0, 2.0], [0.0, 1.0, 1.5], concave=True)
    assert f(0.5) == pytest.approx(0.5)
    assert np.allclose(f.slopes, [1.0, 0.5])
    for g in [0.0, 0.25, 0.5, 0.75, 1.0, 3.0]:
        assert f.support(g) == pytest.approx(max(y - g * x for x, y in f.breakpoints))


def test_piecewise_linear_validates_shape():
    with pytest.raises(ValueError):
        PiecewiseLinear([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        PiecewiseLinear([0.0, 1.0, 2.0], [0.0, 0.0, 1.0], concave=True)


def test_upper_concave_envelope():
    pts = [(0, 0), (1, 0.2), (1, 1), (2, 1.5), (3, 1.6), (1.5, 0.0), (4, 1.7)]
    env = upper_concave_envelope(pts)
    assert env.breakpoints[0] == (0.0, 0.0)
    assert (1.0, 1.0) in env.breakpoints
    assert np.all(np.diff(env.slopes) <= 1e-12)
    for x, y in pts:
        assert env(x) >= y - 1e-12
    again = upper_concave_envelope(env.breakpoints)
    assert again.breakpoints == env.breakpoints


def test_envelope_single_point():
    env = upper_concave_envelope([(0.5, 1.0)])
    assert env.support(2.0) == pytest.approx(0.0)
