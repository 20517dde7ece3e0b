import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entcrit import measures as M
from entcrit.gamma_sup import OptimizerConfig
from entcrit.local_unitary import apply, haar_local_unitary
from entcrit.states import (DensityMatrix, PureState, bell_state,
                            density_from_pure, haar_random_pure,
                            horodecki_state, product_state, random_mixed,
                            werner_state)

YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def wootters_textbook(rho):
    """Oracle: sqrt of the eigenvalues of rho (YY) rho* (YY), straight from numpy."""
    m = rho.matrix
    ev = np.linalg.eigvals(m @ YY @ m.conj() @ YY)
    lam = np.sort(np.sqrt(np.abs(ev.real)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


@pytest.mark.parametrize("amps, want", [
    ([1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], 1.0),
    ([1, 0, 0, 0], 0.0),
    ([0.6, 0, 0, 0.8], 0.96),
])
def test_concurrence_pure_examples(amps, want):
    assert M.concurrence_pure(PureState(amps)) == pytest.approx(want, abs=1e-15)


def test_concurrence_pure_requires_normalization():
    from entcrit.config import ValidationError
    with pytest.raises(ValidationError):
        M.concurrence_pure([1, 1, 0, 0])


def test_concurrence_mixed_examples():
    assert M.concurrence_mixed(density_from_pure(bell_state("psi-"))) == pytest.approx(1.0, abs=1e-12)
    assert M.concurrence_mixed(werner_state(0.5)) == 0.0


@pytest.mark.parametrize("a", [0.1, 0.3, 0.6, 0.9])
@pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.8, 1.0])
def test_concurrence_horodecki_closed_form(a, p):
    want = 2 * a * math.sqrt(1 - a * a) * abs(1 - 2 * p)
    assert M.concurrence_mixed(horodecki_state(a, p)) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_concurrence_matches_textbook_oracle(seed):
    rho = random_mixed(seed, 1 + seed % 4)
    assert M.concurrence_mixed(rho) == pytest.approx(wootters_textbook(rho), abs=1e-6)


@pytest.mark.parametrize("seed", range(50))
def test_rank_one_reduces_to_pure_formula(seed):
    psi = haar_random_pure(seed)
    assert M.concurrence_mixed(density_from_pure(psi)) == pytest.approx(M.concurrence_pure(psi), abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_local_unitary_invariance(seed):
    rho = random_mixed(seed, 1 + seed % 4)
    rho2 = apply(haar_local_unitary(seed + 50), rho)
    assert abs(M.concurrence_mixed(rho) - M.concurrence_mixed(rho2)) <= 2e-9
    assert abs(M.negativity(rho) - M.negativity(rho2)) <= 2e-9


def test_partial_transpose_entries():
    rho = random_mixed(2, 4).matrix
    pt = M.partial_transpose(rho)
    r = rho.reshape(2, 2, 2, 2)
    for ia, ib, ja, jb in np.ndindex(2, 2, 2, 2):
        assert pt[2 * ia + jb, 2 * ja + ib] == r[ia, ib, ja, jb]
    np.testing.assert_allclose(pt, pt.conj().T)
    assert np.trace(pt).real == pytest.approx(1.0)


def test_bell_state_partial_transpose():
    rho = density_from_pure(bell_state("phi+"))
    assert M.min_pt_eigenvalue(rho) == pytest.approx(-0.5, abs=1e-12)
    assert not M.is_ppt(rho)
    assert M.negativity(rho) == pytest.approx(0.5, abs=1e-12)


def test_maximally_mixed_is_ppt():
    rho = DensityMatrix(np.eye(4) / 4)
    assert M.is_ppt(rho) and M.negativity(rho) == 0.0


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_product_states_are_ppt(x, y):
    ra = np.array([[x, 0.1], [0.1, 1 - x]]) if x * (1 - x) > 0.01 else np.diag([x, 1 - x])
    rb = np.diag([y, 1 - y])
    assert M.min_pt_eigenvalue(product_state(ra, rb)) >= -1e-9


def test_werner_threshold():
    # min PT eigenvalue is (1 - 2p) / 3 on this family; bisection finds its root
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if M.min_pt_eigenvalue(werner_state(mid)) >= 0:
            lo = mid
        else:
            hi = mid
    assert lo == pytest.approx(0.5, abs=1e-9)
    assert M.is_ppt(werner_state(0.5))
    assert not M.is_ppt(werner_state(0.5 + 1e-8))


@pytest.mark.parametrize("seed", range(20))
def test_ppt_verdict_is_side_independent(seed):
    rho = random_mixed(seed, 2)
    assert M.is_ppt(rho) == M.is_ppt(rho, side="A")
    assert M.min_pt_eigenvalue(rho) == pytest.approx(M.min_pt_eigenvalue(rho, side="A"), abs=1e-12)


def test_ppt_iff_zero_concurrence():
    for s in range(300):
        rho = random_mixed(5000 + s, 1 + s % 4)
        assert M.is_ppt(rho) == (M.concurrence_mixed(rho) <= 1e-6)


@pytest.mark.parametrize("rho, want", [
    (density_from_pure(bell_state("phi+")), (1, 1, 1, 0.5, False)),
    (DensityMatrix(np.eye(4) / 4), (0, 0, 0, 0, True)),
], ids=["phi+", "identity"])
def test_measure_report_examples(rho, want):
    rep = M.measure_report(rho, OptimizerConfig(restarts=2))
    got = (rep.gamma, rep.gamma_sup, rep.concurrence, rep.negativity, rep.is_ppt)
    assert got[:4] == pytest.approx(want[:4], abs=1e-9)
    assert got[4] is want[4]


def test_measure_report_werner_half():
    rep = M.measure_report(werner_state(0.5))
    assert rep.gamma == pytest.approx(1 / 3, abs=1e-12)
    assert rep.gamma_sup >= 1 / 3 - 1e-6
    assert rep.concurrence == 0 and rep.negativity == 0 and rep.is_ppt
    assert set(rep.to_json()) == {"gamma", "gamma_sup", "concurrence", "negativity", "ppt"}
