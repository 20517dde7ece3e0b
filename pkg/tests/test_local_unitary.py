import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entcrit import local_unitary as lu
from entcrit.config import UsageError, ValidationError
from entcrit.phase_povm import gamma_closed_form
from entcrit.states import PureState, haar_random_pure, random_mixed

mix = st.floats(0, math.pi / 2)
phase = st.floats(-20, 20)


@given(mix, mix, phase, phase)
def test_params_bounds_and_wrapping(phi, vt, ta, tb):
    p = lu.LocalUnitaryParams(phi, vt, ta, tb)
    assert 0 <= p.theta_a < 2 * math.pi and 0 <= p.theta_b < 2 * math.pi
    assert math.isclose(math.cos(p.theta_a), math.cos(ta), abs_tol=1e-9)
    assert lu.LocalUnitaryParams.from_array(p.as_array()) == p


@pytest.mark.parametrize("bad", [-0.1, math.pi / 2 + 0.01])
def test_params_reject_mixing_out_of_range(bad):
    with pytest.raises(UsageError):
        lu.LocalUnitaryParams(phi=bad)


def test_params_json_keys():
    assert set(lu.LocalUnitaryParams().to_json()) == {"phi", "vartheta", "theta_a", "theta_b"}


@given(mix, mix, phase, phase)
def test_first_row_formula(phi, vt, ta, tb):
    # a1' = a1 c c' + a2 e^{i tb} c s' + a3 e^{i ta} s c' + a4 e^{i(ta+tb)} s s'
    psi = haar_random_pure(3).amplitudes
    u = lu.build_from_params(lu.LocalUnitaryParams(phi, vt, ta, tb)).matrix
    c, s, c2, s2 = math.cos(phi), math.sin(phi), math.cos(vt), math.sin(vt)
    ea, eb = cmath.exp(1j * ta), cmath.exp(1j * tb)
    want = psi[0] * c * c2 + psi[1] * eb * c * s2 + psi[2] * ea * s * c2 + psi[3] * ea * eb * s * s2
    assert (u @ psi)[0] == pytest.approx(want, abs=1e-12)


@given(mix, phase)
def test_mixing_unitary_is_unitary(m, t):
    u = lu.mixing_unitary(m, t)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-14)


def test_full_local_unitary_validation():
    with pytest.raises(ValidationError, match="unitary"):
        lu.FullLocalUnitary(np.eye(2) * 1.1, np.eye(2))
    with pytest.raises(ValidationError, match="2x2"):
        lu.FullLocalUnitary(np.eye(3), np.eye(2))


@given(phase, phase)
def test_phase_only_rotates_corners(ta, tb):
    rho = random_mixed(11, 3)
    out = lu.apply_phase_only(lu.PhaseOnlyParams(ta, tb), rho)
    assert out.rho14 == pytest.approx(cmath.exp(-1j * (ta + tb)) * rho.rho14, abs=1e-13)
    assert out.rho23 == pytest.approx(cmath.exp(1j * (tb - ta)) * rho.rho23, abs=1e-13)
    assert gamma_closed_form(out) == pytest.approx(gamma_closed_form(rho), abs=1e-13)


def test_phase_only_can_make_corners_real_positive():
    rho = random_mixed(4, 4)
    a, b = np.angle(rho.rho14), np.angle(rho.rho23)
    # solve ta + tb = a, tb - ta = -b
    out = lu.apply_phase_only(lu.PhaseOnlyParams((a + b) / 2, (a - b) / 2), rho)
    assert out.rho14.real == pytest.approx(abs(rho.rho14), abs=1e-13)
    assert out.rho23.real == pytest.approx(abs(rho.rho23), abs=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_apply_preserves_spectrum(seed):
    rho = random_mixed(seed, 2)
    out = lu.apply(lu.haar_local_unitary(seed), rho)
    np.testing.assert_allclose(out.eigenvalues(), rho.eigenvalues(), atol=1e-13)


def test_apply_requires_full_local_unitary():
    with pytest.raises(ValidationError):
        lu.apply(np.eye(4), random_mixed(0, 1))


def test_haar_local_unitary_reproducible():
    a, b = lu.haar_local_unitary(8), lu.haar_local_unitary(8)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert not np.allclose(a.matrix, lu.haar_local_unitary(9).matrix)


def test_haar_local_unitary_is_not_biased():
    # |U_00|^2 is uniform on [0, 1] for Haar U(2): mean 1/2, variance 1/12
    x = np.array([abs(lu.haar_local_unitary(s).u_a[0, 0]) ** 2 for s in range(2000)])
    assert abs(x.mean() - 0.5) < 0.03
    assert abs(x.var() - 1 / 12) < 0.01


def test_hadamard_maps_plus_to_zero():
    plus = PureState.normalized([1, 1, 1, 1]).amplitudes
    u = lu.FullLocalUnitary(lu.HADAMARD, lu.HADAMARD).matrix
    np.testing.assert_allclose(u @ plus, [1, 0, 0, 0], atol=1e-15)
