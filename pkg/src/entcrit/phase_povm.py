"""Joint phase statistics of two qubits and the Gamma criterion.

The single-qubit phase POVM is

    Delta(phi) = (I + g e^{i phi} |1><0| + g e^{-i phi} |0><1|) / (2 pi),

its two-qubit product is re-expressed in the phase sum/difference and
symmetrized over a joint pi shift so that it is 2 pi periodic in both
variables. Tracing against rho gives a density on the torus,

    P(s, d) = (1 + 2 g^2 Re[e^{i s} rho_14] + 2 g^2 Re[e^{i d} rho_23]) / (4 pi^2),

which is a degree-one trigonometric polynomial per axis, so a uniform grid
with n >= 3 nodes integrates its Fourier components exactly. Its first
harmonics have moduli |rho_14| / (2 pi) and |rho_23| / (2 pi), hence
``4 pi |G+ - G-| = 2 ||rho_14| - |rho_23||``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .config import UsageError
from .states import as_matrix

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseGrid:
    n_plus: int = 16
    n_minus: int = 16

    def __post_init__(self):
        if int(self.n_plus) < 4 or int(self.n_minus) < 4:
            raise UsageError("phase grid needs at least 4 nodes per axis")

    @property
    def phi_plus(self):
        return TWO_PI * np.arange(self.n_plus) / self.n_plus

    @property
    def phi_minus(self):
        return TWO_PI * np.arange(self.n_minus) / self.n_minus


@dataclass(frozen=True)
class JointPhaseDistribution:
    grid: PhaseGrid
    values: np.ndarray          # shape (n_plus, n_minus)
    gamma_param: float = 1.0

    def integral(self) -> float:
        cell = (TWO_PI / self.grid.n_plus) * (TWO_PI / self.grid.n_minus)
        return float(self.values.sum() * cell)


@dataclass(frozen=True)
class FourierPair:
    gamma_plus: float
    gamma_minus: float


def _check_gamma(gamma_param):
    g = float(gamma_param)
    if not 0.0 <= g <= 1.0:
        raise UsageError(f"POVM parameter must lie in [0, 1], got {g!r}")
    return g


def single_qubit_povm_element(phi, gamma_param: float = 1.0):
    g = _check_gamma(gamma_param)
    m = np.eye(2, dtype=np.complex128)
    m[1, 0] = g * np.exp(1j * phi)
    m[0, 1] = g * np.exp(-1j * phi)
    return m / TWO_PI


def _povm_stack(phi):
    # vectorized single-qubit elements, shape (..., 2, 2)
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = out[..., 1, 1] = 1.0
    out[..., 1, 0] = np.exp(1j * phi)
    out[..., 0, 1] = np.exp(-1j * phi)
    return out


def _joint_stack(phi_plus, phi_minus, g):
    u = (phi_plus + phi_minus) / 2
    v = (phi_plus - phi_minus) / 2
    da, db = _povm_stack(u), _povm_stack(v)
    da_s, db_s = _povm_stack(u + math.pi), _povm_stack(v + math.pi)
    # scale only the off-diagonal (phase-carrying) parts by g
    for d in (da, db, da_s, db_s):
        d[..., 1, 0] *= g
        d[..., 0, 1] *= g
    first = np.einsum("...ij,...kl->...ikjl", da, db).reshape(da.shape[:-2] + (4, 4))
    second = np.einsum("...ij,...kl->...ikjl", da_s, db_s).reshape(da.shape[:-2] + (4, 4))
    return (first + second) / (2.0 * TWO_PI**2)


def joint_povm_element(phi_plus, phi_minus, gamma_param: float = 1.0):
    """Symmetrized joint element 1/2 [Delta(u, v) + Delta(u + pi, v + pi)],
    u = (phi_plus + phi_minus) / 2, v = (phi_plus - phi_minus) / 2."""
    g = _check_gamma(gamma_param)
    return _joint_stack(np.float64(phi_plus), np.float64(phi_minus), g)


def joint_phase_distribution(rho, grid: PhaseGrid | None = None,
                             gamma_param: float = 1.0) -> JointPhaseDistribution:
    grid = grid or PhaseGrid()
    g = _check_gamma(gamma_param)
    m = as_matrix(rho)
    s, d = np.meshgrid(grid.phi_plus, grid.phi_minus, indexing="ij")
    lam = _joint_stack(s, d, g)
    vals = np.einsum("ij,...ji->...", m, lam)
    return JointPhaseDistribution(grid, np.ascontiguousarray(vals.real), g)


def fourier_components(dist: JointPhaseDistribution) -> FourierPair:
    """First-harmonic moduli along each axis.

    The modulus is the same for every value of the spectator variable; it is
    averaged over that axis to wash out rounding.
    """
    grid = dist.grid
    wp = np.exp(1j * grid.phi_plus) * (TWO_PI / grid.n_plus)
    wm = np.exp(1j * grid.phi_minus) * (TWO_PI / grid.n_minus)
    g_plus = np.abs(wp @ dist.values).mean()
    g_minus = np.abs(dist.values @ wm).mean()
    return FourierPair(float(g_plus), float(g_minus))


def gamma_numeric(rho, grid: PhaseGrid | None = None) -> float:
    """Gamma = 4 pi |G+ - G-| from the sampled joint distribution (g = 1)."""
    fp = fourier_components(joint_phase_distribution(rho, grid or PhaseGrid(), 1.0))
    return 2.0 * TWO_PI * abs(fp.gamma_plus - fp.gamma_minus)


def gamma_closed_form(rho) -> float:
    m = as_matrix(rho)
    return float(2.0 * abs(abs(m[0, 3]) - abs(m[1, 2])))


def write_distribution_csv(dist: JointPhaseDistribution, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi_plus", "phi_minus", "p_value"])
        for i, s in enumerate(dist.grid.phi_plus):
            for j, d in enumerate(dist.grid.phi_minus):
                w.writerow([repr(float(s)), repr(float(d)), repr(float(dist.values[i, j]))])
