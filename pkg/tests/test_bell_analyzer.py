import math

import numpy as np
import pytest
from conftest import sigma2

from entcrit import bell_analyzer as ba
from entcrit.config import UsageError
from entcrit.gamma_sup import OptimizerConfig, gamma_sup
from entcrit.local_unitary import PhaseOnlyParams, apply_phase_only
from entcrit.states import (DensityMatrix, PureState, bell_state,
                            density_from_pure, horodecki_state, random_mixed,
                            werner_state)

H = 1 / math.sqrt(2)
PLUS_PLUS = density_from_pure(PureState([0.5, 0.5, 0.5, 0.5]))
PHI_PLUS = density_from_pure(bell_state("phi+"))
IDENTITY = DensityMatrix(np.eye(4) / 4)
# the Bell state written in a rotated local frame
ROTATED_BELL = density_from_pure(PureState([0.5, 0.5, 0.5, -0.5]))


@pytest.mark.parametrize("rho, want", [
    (PHI_PLUS, (1, 0, 0, 0)),
    (IDENTITY, (0.25, 0.25, 0.25, 0.25)),
    (PLUS_PLUS, (0.5, 0, 0.5, 0)),
], ids=["phi+", "identity", "plus-plus"])
def test_bell_probability_examples(rho, want):
    np.testing.assert_allclose(ba.bell_probabilities(rho).as_array(), want, atol=1e-15)


@pytest.mark.parametrize("seed", range(50))
def test_identities_and_completeness(seed):
    rho = random_mixed(seed, 1 + seed % 4)
    d1, d2 = ba.corner_differences(rho)
    assert d1 == pytest.approx(2 * rho.rho14.real, abs=1e-12)
    assert d2 == pytest.approx(2 * rho.rho23.real, abs=1e-12)
    assert ba.bell_probabilities(rho).total() == pytest.approx(1.0, abs=1e-10)


def test_corner_difference_examples():
    assert ba.corner_differences(PHI_PLUS) == pytest.approx((1, 0), abs=1e-15)
    assert ba.corner_differences(density_from_pure(bell_state("psi-"))) == pytest.approx((0, -1), abs=1e-15)
    rho = random_mixed(8, 3)
    a, b = np.angle(rho.rho14), np.angle(rho.rho23)
    real = apply_phase_only(PhaseOnlyParams((a + b) / 2, (a - b) / 2), rho)
    assert ba.corner_differences(real) == pytest.approx((2 * abs(rho.rho14), 2 * abs(rho.rho23)), abs=1e-12)


def test_visibility():
    assert ba.visibility(PHI_PLUS, "++") == pytest.approx(1.0)
    assert ba.visibility(PLUS_PLUS, "++") == pytest.approx(1.0)
    for s in ("++", "+-"):
        assert ba.visibility(IDENTITY, s) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(UsageError):
        ba.visibility(IDENTITY, "--")


def test_measured_abs_examples():
    assert ba.measured_abs_corners(PHI_PLUS) == pytest.approx((0.5, 0.0), abs=1e-9)
    assert ba.measured_abs_corners(werner_state(0.5)) == pytest.approx((0.0, 1 / 6), abs=1e-9)
    m = PHI_PLUS.matrix.copy()
    m[0, 3] *= np.exp(1j * math.pi / 3)
    m[3, 0] = m[0, 3].conjugate()
    assert ba.measured_abs_corners(DensityMatrix(m)) == pytest.approx((0.5, 0.0), abs=1e-9)
    with pytest.raises(UsageError):
        ba.measured_abs_corners(PHI_PLUS, phase_grid=4)


@pytest.mark.parametrize("seed", range(20))
def test_measured_abs_random(seed):
    rho = random_mixed(seed, 2)
    a14, a23 = ba.measured_abs_corners(rho, phase_grid=8 + seed)
    assert a14 == pytest.approx(abs(rho.rho14), abs=1e-9)
    assert a23 == pytest.approx(abs(rho.rho23), abs=1e-9)


def test_protocol_noiseless_examples():
    assert ba.protocol_gamma_sup(ROTATED_BELL).gamma_sup_estimate == pytest.approx(1.0, abs=1e-4)
    res = ba.protocol_gamma_sup(PLUS_PLUS)
    assert res.gamma_sup_estimate <= 1e-4
    assert res.inner_phase_settings == 8 and res.settings_evaluated > 0
    assert res.shot_noise_sigma == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_protocol_matches_gamma_sup(seed):
    rho = random_mixed(7000 + seed, 1 + seed % 4)
    want = gamma_sup(rho).value
    assert ba.protocol_gamma_sup(rho).gamma_sup_estimate == pytest.approx(want, abs=1e-4)
    assert want == pytest.approx(sigma2(rho), abs=1e-6)


def test_protocol_with_shots_phi_plus():
    res = ba.protocol_gamma_sup(PHI_PLUS, shots=100_000, seed=3)
    assert res.gamma_sup_estimate == pytest.approx(1.0, abs=0.01)
    assert abs(res.gamma_sup_estimate - 1.0) <= 3 * res.shot_noise_sigma + 1e-3
    assert res.gamma_sup_estimate <= 1 + 3 * res.shot_noise_sigma


def test_protocol_shot_checks_and_determinism():
    with pytest.raises(UsageError):
        ba.protocol_gamma_sup(PHI_PLUS, shots=999)
    cfg = OptimizerConfig(restarts=1)
    r1, r2 = [], []
    a = ba.protocol_gamma_sup(PLUS_PLUS, cfg, shots=1000, seed=9, record=r1)
    b = ba.protocol_gamma_sup(PLUS_PLUS, cfg, shots=1000, seed=9, record=r2)
    assert a == b and r1 == r2
    assert len(r1) == a.settings_evaluated
    assert all(sum(row[5:9]) == 1000 * 8 for row in r1)


@pytest.mark.slow
def test_estimator_error_shrinks_like_inverse_sqrt_shots():
    rho = horodecki_state(0.6, 0.3)
    exact = ba.protocol_gamma_sup(rho).gamma_sup_estimate
    cfg = OptimizerConfig(restarts=2)
    rms = []
    for shots in (1_000, 10_000, 100_000):
        errs = [ba.protocol_gamma_sup(rho, cfg, shots=shots, seed=s).gamma_sup_estimate - exact
                for s in range(8)]
        rms.append(math.sqrt(np.mean(np.square(errs))))
    for a, b in zip(rms, rms[1:]):
        assert math.sqrt(10) / 3 <= a / b <= 3 * math.sqrt(10)


def test_sample_outcomes():
    rec = ba.sample_bell_outcomes(PHI_PLUS, 500, seed=1)
    assert rec.counts == (500, 0, 0, 0) and rec.shots == 500
    for seed in range(3):
        f = ba.sample_bell_outcomes(IDENTITY, 10**6, seed).frequencies()
        assert np.all(np.abs(f - 0.25) < 0.002)
    a = ba.sample_bell_outcomes(random_mixed(1, 2), 1000, 5)
    assert a == ba.sample_bell_outcomes(random_mixed(1, 2), 1000, 5)
    assert sum(a.counts) == 1000


def test_shot_record_validation():
    with pytest.raises(ValueError):
        ba.ShotRecord((1, 2, 3), 6)
    with pytest.raises(ValueError):
        ba.ShotRecord((1, 2, 3, 4), 11)


def test_harmonic_readout_variance_matches_monte_carlo():
    # the propagated sigma should match the spread of repeated readouts
    rho = random_mixed(4, 2).matrix
    chis = 2 * math.pi * np.arange(8) / 8
    p = ba._clean(ba._phased_bell_probs(rho, chis))
    rng = np.random.default_rng(0)
    est, sig = [], []
    for _ in range(400):
        a14, a23, s = ba._harmonic_readout(rng.multinomial(20_000, p), 20_000, chis)
        est.append(2 * abs(a14 - a23))
        sig.append(s)
    assert np.std(est) == pytest.approx(np.mean(sig), rel=0.15)


def test_write_records_csv(tmp_path):
    rows = []
    ba.protocol_gamma_sup(PHI_PLUS, OptimizerConfig(restarts=1), shots=1000, seed=0, record=rows)
    path = tmp_path / "sim.csv"
    ba.write_records_csv(rows[:3], path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(ba.CSV_COLUMNS)
    assert len(lines) == 4
