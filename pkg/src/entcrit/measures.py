"""Reference entanglement measures: concurrence and the partial-transpose test.

The mixed-state concurrence uses the spin-flip construction. With
rho = sum_i w_i v_i v_i^dagger and the subnormalized vectors u_i = sqrt(w_i) v_i,
the matrix tau_ij = u_i^T (sigma_y (x) sigma_y) u_j is complex symmetric and its
singular values are the square roots of the eigenvalues of
rho (sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y). Working with tau avoids
the square roots of tiny, possibly negative, eigenvalues that the direct
product form produces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .config import TOL
from .gamma_sup import OptimizerConfig, gamma_sup
from .phase_povm import gamma_closed_form
from .states import PureState, as_matrix

SIGMA_YY = np.array([[0, 0, 0, -1],
                     [0, 0, 1, 0],
                     [0, 1, 0, 0],
                     [-1, 0, 0, 0]], dtype=np.complex128)

# PT eigenvalues above -PPT_TOL count as nonnegative
PPT_TOL = TOL.ppt


def concurrence_pure(psi) -> float:
    """2 |a1 a4 - a2 a3| for normalized amplitudes (a1, a2, a3, a4)."""
    if not isinstance(psi, PureState):
        psi = PureState(psi)
    a = psi.amplitudes
    return float(min(2.0 * abs(a[0] * a[3] - a[1] * a[2]), 1.0))


def spin_flip_values(rho) -> np.ndarray:
    """Descending square roots of the eigenvalues of rho rho~ (the Wootters mu_i)."""
    m = as_matrix(rho)
    w, v = qmath.hermitian_eigh(m)
    w = np.where(w > TOL.spinflip_clip, w, 0.0)
    u = v * np.sqrt(w)
    tau = u.T @ SIGMA_YY @ u
    return qmath.singular_values(tau)


def concurrence_mixed(rho) -> float:
    mu = spin_flip_values(rho)
    return float(min(max(0.0, mu[0] - mu[1] - mu[2] - mu[3]), 1.0))


def partial_transpose(rho, side: str = "B") -> np.ndarray:
    """Transpose on one qubit: on B, ((iA, iB), (jA, jB)) -> ((iA, jB), (jA, iB))."""
    r = np.asarray(as_matrix(rho)).reshape(2, 2, 2, 2)
    if side == "B":
        out = r.transpose(0, 3, 2, 1)
    elif side == "A":
        out = r.transpose(2, 1, 0, 3)
    else:
        raise ValueError("side must be 'A' or 'B'")
    return np.ascontiguousarray(out.reshape(4, 4))


def _pt_eigenvalues(rho, side="B"):
    return qmath.hermitian_eigenvalues(partial_transpose(rho, side))


def min_pt_eigenvalue(rho, side: str = "B") -> float:
    return float(_pt_eigenvalues(rho, side)[-1])


def is_ppt(rho, side: str = "B") -> bool:
    return min_pt_eigenvalue(rho, side) >= -PPT_TOL


def negativity(rho) -> float:
    """|sum of negative eigenvalues of the partial transpose|; values above
    -PPT_TOL are treated as zero so that negativity vanishes exactly on PPT states."""
    ev = _pt_eigenvalues(rho)
    return float(max(0.0, -ev[ev < -PPT_TOL].sum()))


@dataclass(frozen=True)
class MeasureReport:
    """Side-by-side criteria for one state. Concurrence lies in [0, 1];
    negativity in [0, 1/2] with the unnormalized convention used here."""

    gamma: float
    gamma_sup: float
    concurrence: float
    negativity: float
    is_ppt: bool

    def __post_init__(self):
        for name in ("gamma", "gamma_sup", "concurrence", "negativity"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "gamma_sup": self.gamma_sup,
                "concurrence": self.concurrence, "negativity": self.negativity,
                "ppt": self.is_ppt}


def measure_report(rho, cfg: OptimizerConfig | None = None) -> MeasureReport:
    m = as_matrix(rho)
    return MeasureReport(
        gamma=gamma_closed_form(m),
        gamma_sup=gamma_sup(m, cfg or OptimizerConfig()).value,
        concurrence=concurrence_mixed(m),
        negativity=negativity(m),
        is_ppt=is_ppt(m))
