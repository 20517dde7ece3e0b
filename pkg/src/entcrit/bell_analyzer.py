"""Bell-state analyzer: detection probabilities, the corner identities and a
measurement-only reconstruction of Gamma_sup.

With Bell probabilities p_Phi+-, p_Psi+-,

    d1 = p_Phi+ - p_Phi- = 2 Re rho_14,     d2 = p_Psi+ - p_Psi- = 2 Re rho_23.

A local phase chi on qubit B rotates rho_14 by e^{-i chi} and rho_23 by
e^{+i chi}, so sweeping chi turns d1 and d2 into sinusoids of amplitude
2 |rho_14| and 2 |rho_23|. The protocol reads off those amplitudes at each
outer setting (phi, vartheta, theta_a, theta_b) and maximizes
2 | |rho'_14| - |rho'_23| | over the settings.

Maximizing the visibility d1 + d2 directly does not give Gamma_sup: the
product state |+,+> already has d1 + d2 = 1. ``visibility`` is kept to
exhibit that.

Noiseless mode maximizes each sinusoid by a phase scan plus golden-section
refinement. With finite shots the amplitudes come from a first-harmonic fit
over equally spaced phases instead, which is the least-squares sinusoid and
does not chase noise.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import UsageError
from .gamma_sup import (LOWER, PERIODIC, UPPER, OptimizerConfig,
                        pick_best, restart_points, staged_ascent)
from .local_unitary import LocalUnitaryParams, build_from_params
from .states import as_matrix, bell_basis

MIN_SHOTS = 1000
MIN_PHASE_GRID = 8
# phase refinement tolerance of the noiseless readout; the amplitude error
# is quadratic in it (about 1e-11 here)
PHASE_TOL = 1e-5
# below the shot-noise floor a finer parameter search is meaningless
NOISY_REFINE_TOL = 1e-3

CSV_COLUMNS = ("setting_index", "phi", "vartheta", "theta_a", "theta_b",
               "n_phi_plus", "n_phi_minus", "n_psi_plus", "n_psi_minus", "estimate")


@dataclass(frozen=True)
class BellProbabilities:
    p_phi_plus: float
    p_phi_minus: float
    p_psi_plus: float
    p_psi_minus: float

    def as_array(self):
        return np.array([self.p_phi_plus, self.p_phi_minus, self.p_psi_plus, self.p_psi_minus])

    def total(self) -> float:
        return float(self.as_array().sum())


@dataclass(frozen=True)
class ShotRecord:
    counts: tuple
    shots: int

    def __post_init__(self):
        c = tuple(int(n) for n in self.counts)
        if len(c) != 4 or min(c) < 0:
            raise ValueError("counts must be four nonnegative integers")
        if sum(c) != int(self.shots) or self.shots < 1:
            raise ValueError("counts must sum to shots >= 1")
        object.__setattr__(self, "counts", c)

    def frequencies(self):
        return np.array(self.counts, dtype=float) / self.shots


@dataclass(frozen=True)
class ProtocolResult:
    gamma_sup_estimate: float
    settings_evaluated: int
    inner_phase_settings: int
    shot_noise_sigma: float = 0.0
    best_params: LocalUnitaryParams = field(default_factory=LocalUnitaryParams)
    shots: int | None = None

    def to_json(self) -> dict:
        return {"gamma_sup_estimate": self.gamma_sup_estimate,
                "settings_evaluated": self.settings_evaluated,
                "inner_phase_settings": self.inner_phase_settings,
                "shot_noise_sigma": self.shot_noise_sigma,
                "shots": self.shots,
                "params": self.best_params.to_json()}


def bell_probabilities(rho) -> BellProbabilities:
    m = as_matrix(rho)
    B = bell_basis()
    p = np.einsum("ki,ij,kj->k", np.conj(B), m, B).real
    return BellProbabilities(*(float(x) for x in p))


def corner_differences(rho):
    """(P_Phi+ - P_Phi-, P_Psi+ - P_Psi-), i.e. (2 Re rho_14, 2 Re rho_23)."""
    p = bell_probabilities(rho)
    return p.p_phi_plus - p.p_phi_minus, p.p_psi_plus - p.p_psi_minus


def visibility(rho, signs: str = "++") -> float:
    """d1 + d2 for ``"++"``, d1 - d2 for ``"+-"``."""
    d1, d2 = corner_differences(rho)
    if signs == "++":
        return d1 + d2
    if signs in ("+-", "+−"):
        return d1 - d2
    raise UsageError(f"signs must be '++' or '+-', got {signs!r}")


def measured_abs_corners(rho, phase_grid: int = MIN_PHASE_GRID, backend=None):
    """(|rho_14|, |rho_23|) from phase-swept Bell differences (noiseless)."""
    if int(phase_grid) < MIN_PHASE_GRID:
        raise UsageError(f"phase grid needs at least {MIN_PHASE_GRID} settings")
    be = kernels.get_backend(backend)
    m = np.ascontiguousarray(as_matrix(rho), dtype=np.complex128)
    a14, a23 = be.measured_abs(m, int(phase_grid), PHASE_TOL)
    return float(a14), float(a23)


# --- sampling -----------------------------------------------------------------

def _clean(p):
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=-1, keepdims=True)


def sample_bell_outcomes(rho, shots: int, seed: int) -> ShotRecord:
    """Multinomial Bell-analyzer counts for ``shots`` copies of ``rho``."""
    shots = int(shots)
    if shots < 1:
        raise UsageError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    p = _clean(bell_probabilities(rho).as_array())
    return ShotRecord(tuple(rng.multinomial(shots, p)), shots)


def _setting_rng(seed, index):
    # independent stream per outer setting: reproducible in any evaluation order
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def _phased_bell_probs(rp, chis):
    """Bell probabilities after local phase chi on qubit B, shape (len(chis), 4)."""
    e = np.exp(-1j * chis)
    h = 1.0 / math.sqrt(2.0)
    v = np.zeros((len(chis), 4, 4), dtype=np.complex128)
    v[:, 0, 0] = v[:, 1, 0] = h
    v[:, 0, 3] = h * e
    v[:, 1, 3] = -h * e
    v[:, 2, 1] = v[:, 3, 1] = h * e
    v[:, 2, 2] = h
    v[:, 3, 2] = -h
    return np.einsum("kbi,ij,kbj->kb", np.conj(v), rp, v).real


def _harmonic_readout(counts, shots, chis):
    """Amplitude estimates and the linearized standard error of the Gamma estimate.

    ``counts`` has shape (n_phase, 4) in Bell order.
    """
    f = counts / shots
    d1 = f[:, 0] - f[:, 1]
    d2 = f[:, 2] - f[:, 3]
    n = len(chis)
    c1 = (2.0 / n) * np.sum(d1 * np.exp(1j * chis))
    c2 = (2.0 / n) * np.sum(d2 * np.exp(-1j * chis))
    a14, a23 = abs(c1) / 2.0, abs(c2) / 2.0
    # multinomial (co)variances of d1, d2 at each phase
    v1 = (f[:, 0] + f[:, 1] - d1 ** 2) / shots
    v2 = (f[:, 2] + f[:, 3] - d2 ** 2) / shots
    cov = -d1 * d2 / shots
    g1 = (2.0 / n) * np.cos(chis - np.angle(c1))
    g2 = (2.0 / n) * np.cos(chis + np.angle(c2))
    var = np.sum(g1 ** 2 * v1 + g2 ** 2 * v2 - 2.0 * g1 * g2 * cov)
    return a14, a23, math.sqrt(max(float(var), 0.0))


class _NoisyObjective:
    """Sampled protocol objective; every call is a fresh outer setting."""

    def __init__(self, rho, shots, seed, n_phase, record):
        self.rho = rho
        self.shots = shots
        self.seed = seed
        self.chis = 2.0 * math.pi * np.arange(n_phase) / n_phase
        self.index = 0
        self.record = record

    def measure(self, x):
        u = build_from_params(LocalUnitaryParams.from_array(x)).matrix
        rp = u @ self.rho @ np.conj(u).T
        p = _clean(_phased_bell_probs(rp, self.chis))
        counts = _setting_rng(self.seed, self.index).multinomial(self.shots, p)
        a14, a23, sigma = _harmonic_readout(counts, self.shots, self.chis)
        if self.record is not None:
            tot = counts.sum(axis=0)
            p_ = LocalUnitaryParams.from_array(x)
            self.record.append((self.index, p_.phi, p_.vartheta, p_.theta_a, p_.theta_b,
                                int(tot[0]), int(tot[1]), int(tot[2]), int(tot[3]),
                                2.0 * abs(a14 - a23)))
        self.index += 1
        return a14, a23, sigma

    def __call__(self, rho, aux, x):
        a14, a23, _ = self.measure(x)
        eps2 = aux[0] * aux[0]
        return 2.0 * abs(math.sqrt(a14 * a14 + eps2) - math.sqrt(a23 * a23 + eps2))


def _noisy_protocol(m, cfg, shots, seed, n_phase, record):
    obj = _NoisyObjective(m, shots, seed, n_phase, record)
    delta = max(cfg.convergence_delta, 3.0 / math.sqrt(shots))
    tol = max(cfg.refine_tolerance, NOISY_REFINE_TOL)
    starts = restart_points(cfg)
    for eps in tuple(cfg.smoothing) + (0.0,):
        f, starts, _, _, _ = kernels.ascent(
            obj, kernels.scan_loop, m, np.array([eps]), starts, LOWER, UPPER, PERIODIC,
            cfg.line_search_points, tol, delta, cfg.sweeps_max)
    best = starts[pick_best(f, starts)]
    # fresh shots at the chosen setting, so the readout is not biased upward
    # by having selected the luckiest sample during the search
    a14, a23, sigma = obj.measure(best)
    return ProtocolResult(2.0 * abs(a14 - a23), obj.index, n_phase, sigma,
                          LocalUnitaryParams.from_array(best), shots)


def protocol_gamma_sup(rho, cfg: OptimizerConfig | None = None, shots: int | None = None,
                       seed: int = 0, phase_grid: int = MIN_PHASE_GRID,
                       record: list | None = None) -> ProtocolResult:
    """Gamma_sup reconstructed only from Bell-analyzer statistics.

    Parameters
    ----------
    rho : DensityMatrix or array
    cfg : OptimizerConfig
        Outer search settings (restarts, sweeps, line search).
    shots : int, optional
        Copies per (outer setting, inner phase); ``None`` for exact probabilities.
    seed : int
        Sampling seed; outer setting k draws from the stream (seed, k).
    phase_grid : int
        Inner phase settings per outer setting (>= 8).
    record : list, optional
        Receives one tuple per sampled outer setting, in ``CSV_COLUMNS`` order.
    """
    cfg = cfg or OptimizerConfig()
    n_phase = int(phase_grid)
    if n_phase < MIN_PHASE_GRID:
        raise UsageError(f"phase grid needs at least {MIN_PHASE_GRID} settings")
    m = np.ascontiguousarray(as_matrix(rho), dtype=np.complex128)
    if shots is not None:
        if int(shots) < MIN_SHOTS:
            raise UsageError(f"need at least {MIN_SHOTS} shots per setting, got {shots}")
        return _noisy_protocol(m, cfg, int(shots), seed, n_phase, record)
    values, params, _, _, evals = staged_ascent("protocol_point", m, cfg, (n_phase, PHASE_TOL))
    k = pick_best(values, params)
    return ProtocolResult(float(min(max(values[k], 0.0), 1.0)), int(evals.sum()), n_phase, 0.0,
                          LocalUnitaryParams.from_array(params[k]), None)


def write_records_csv(rows, path) -> None:
    """Bell-sim rows with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([v if isinstance(v, int) else format(v, ".17g") for v in row])
