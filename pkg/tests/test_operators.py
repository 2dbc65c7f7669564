import numpy as np
import pytest

from dpsqkd.operators import (
    Pattern,
    Run,
    build_pi,
    build_pi_ph,
    candidates_minus,
    candidates_plus,
    kappa,
    minus_patterns,
    plus_runs,
    restricted_operator,
    shifted_operator,
)


def test_pattern_round_trip_and_order():
    p = Pattern.from_string("0110")
    assert str(p) == "0110" and p.weight == 2 and p.word == 6
    assert Pattern.from_string("0111") < Pattern.from_string("1000")
    assert Pattern.run(5, 1, 3) == Pattern.from_string("01110")
    assert (Pattern.from_string("1000") | Pattern.from_string("0010")) == Pattern.from_string("1010")
    assert Pattern.from_string("1010").covers(Pattern.from_string("0010"))
    with pytest.raises(ValueError):
        Pattern.from_string("012")


def test_kappa_weights():
    assert kappa(5).tolist() == [1.0, 0.5, 0.5, 0.5, 1.0]


def test_pi_entries():
    m = build_pi(6).to_dense()
    assert np.allclose(np.diag(m), 0.5)
    off = np.diag(m, 1)
    assert off[0] == pytest.approx(-1 / (2 * np.sqrt(2)))
    assert off[-1] == pytest.approx(-1 / (2 * np.sqrt(2)))
    assert np.allclose(off[1:-1], -0.25)


def test_short_block_rejected():
    with pytest.raises(ValueError, match="block too short"):
        build_pi(2)


@pytest.mark.parametrize("n", [3, 4, 9, 20])
def test_pi_is_psd_with_one_dimensional_kernel(n):
    w, v = np.linalg.eigh(build_pi(n).to_dense())
    assert w[0] > -1e-14 and w[1] > 1e-6
    kernel = np.ones(n)
    kernel[0] = kernel[-1] = 1 / np.sqrt(2)
    kernel /= np.linalg.norm(kernel)
    assert abs(abs(v[:, 0] @ kernel) - 1) < 1e-12


def test_phase_diagonal():
    d = build_pi_ph(Pattern.from_string("01100"))
    assert d.tolist() == [0.5, 0.75, 0.75, 0.25, 0.0]
    assert np.allclose(build_pi_ph(Pattern.from_string("11111")), [1, 1, 1, 1, 1])


def test_shifted_and_restricted_operators():
    p = Pattern.from_string("1110000")
    m = shifted_operator(p, 2.0).to_dense()
    ref = np.diag(build_pi_ph(p)) - 2.0 * build_pi(7).to_dense()
    assert np.allclose(m, ref)
    r = restricted_operator(Run(7, 0, 3), 2.0).to_dense()
    assert np.allclose(r, ref[:3, :3])


def test_candidate_families():
    assert len(minus_patterns(9, 3)) == 36
    assert all(p.weight == 2 for p in minus_patterns(9, 3))
    assert minus_patterns(9, 0) == []
    runs = plus_runs(9, 2)
    assert {r.length for r in runs} == {1, 2, 3}
    assert len(runs) == 9 + 8 + 7
    assert len(candidates_minus(6, 2, 1.0)) == 6
    assert len(candidates_plus(6, 1, 1.0)) == 6 + 5
    with pytest.raises(ValueError):
        candidates_plus(6, 1, -1.0)
