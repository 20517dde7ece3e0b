"""Local unitaries U_A (x) U_B and their action on two-qubit states.

The search family is parametrized by two mixing angles and two relative
phases,

    U(mix, theta) = [[cos mix,                  e^{i theta} sin mix],
                     [-e^{-i theta} sin mix,    cos mix            ]],

with (phi, theta_a) for qubit A and (vartheta, theta_b) for qubit B. The
first row of U_A (x) U_B acting on amplitudes (a1, a2, a3, a4) gives

    a1' = a1 cos phi cos vt + a2 e^{i tb} cos phi sin vt
          + a3 e^{i ta} sin phi cos vt + a4 e^{i(ta + tb)} sin phi sin vt.

Gamma only depends on U up to diagonal phases applied afterwards, and the
first row of U modulo a phase ranges over the whole Bloch sphere, so these
four angles reach the supremum over all local unitaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .config import TOL, UsageError, ValidationError
from .states import DensityMatrix, as_matrix, make_rng

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


def _wrap(theta):
    t = math.fmod(float(theta), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    # fmod can land exactly on 2 pi after the shift for tiny negative input
    return 0.0 if t >= TWO_PI else t


@dataclass(frozen=True)
class LocalUnitaryParams:
    """Angles in radians. Phases are reduced into [0, 2 pi) on construction."""

    phi: float = 0.0
    vartheta: float = 0.0
    theta_a: float = 0.0
    theta_b: float = 0.0

    def __post_init__(self):
        for name in ("phi", "vartheta"):
            x = float(getattr(self, name))
            if not -1e-12 <= x <= HALF_PI + 1e-12:
                raise UsageError(f"{name} must lie in [0, pi/2], got {x!r}")
            object.__setattr__(self, name, min(max(x, 0.0), HALF_PI))
        for name in ("theta_a", "theta_b"):
            x = float(getattr(self, name))
            if not math.isfinite(x):
                raise UsageError(f"{name} must be finite")
            object.__setattr__(self, name, _wrap(x))

    def as_array(self):
        return np.array([self.phi, self.vartheta, self.theta_a, self.theta_b])

    @classmethod
    def from_array(cls, x) -> "LocalUnitaryParams":
        return cls(*(float(v) for v in x))

    def to_json(self) -> dict:
        return {"phi": self.phi, "vartheta": self.vartheta,
                "theta_a": self.theta_a, "theta_b": self.theta_b}


@dataclass(frozen=True)
class PhaseOnlyParams:
    theta_a: float = 0.0
    theta_b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta_a", _wrap(self.theta_a))
        object.__setattr__(self, "theta_b", _wrap(self.theta_b))


@dataclass(frozen=True)
class FullLocalUnitary:
    u_a: np.ndarray
    u_b: np.ndarray

    def __post_init__(self):
        for name in ("u_a", "u_b"):
            u = np.asarray(getattr(self, name), dtype=np.complex128)
            if u.shape != (2, 2):
                raise ValidationError(f"{name} must be 2x2")
            err = float(np.max(np.abs(np.conj(u).T @ u - np.eye(2))))
            if err > TOL.unitary:
                raise ValidationError(f"{name} is not unitary (max |U^dagger U - I| = {err:.3e})")
            u = u.copy()
            u.setflags(write=False)
            object.__setattr__(self, name, u)

    @property
    def matrix(self):
        return qmath.kron(self.u_a, self.u_b)


def mixing_unitary(mix: float, theta: float):
    c, s = math.cos(mix), math.sin(mix)
    e = complex(math.cos(theta), math.sin(theta))
    return np.array([[c, e * s], [-e.conjugate() * s, c]], dtype=np.complex128)


def build_from_params(p: LocalUnitaryParams) -> FullLocalUnitary:
    return FullLocalUnitary(mixing_unitary(p.phi, p.theta_a), mixing_unitary(p.vartheta, p.theta_b))


def phase_unitary(p: PhaseOnlyParams) -> FullLocalUnitary:
    return FullLocalUnitary(np.diag([1.0, np.exp(1j * p.theta_a)]),
                            np.diag([1.0, np.exp(1j * p.theta_b)]))


def apply(u: FullLocalUnitary, rho) -> DensityMatrix:
    """(U_A (x) U_B) rho (U_A (x) U_B)^dagger."""
    if not isinstance(u, FullLocalUnitary):
        raise ValidationError("apply expects a FullLocalUnitary")
    m = as_matrix(rho)
    U = u.matrix
    out = U @ m @ np.conj(U).T
    return DensityMatrix((out + np.conj(out).T) / 2)


def apply_phase_only(p: PhaseOnlyParams, rho) -> DensityMatrix:
    """Diagonal local phases: rho_14 -> e^{-i(ta + tb)} rho_14,
    rho_23 -> e^{i(tb - ta)} rho_23."""
    return apply(phase_unitary(p), rho)


def _haar_u2(rng):
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_local_unitary(seed: int) -> FullLocalUnitary:
    rng = make_rng(seed)
    return FullLocalUnitary(_haar_u2(rng), _haar_u2(rng))


HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
