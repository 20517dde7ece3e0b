"""Supremum of Gamma over local unitaries.

``coordinate_ascent`` maximizes Gamma over the four angles of
:class:`~entcrit.local_unitary.LocalUnitaryParams` one coordinate at a time,
restarting from seeded random points (the first restart always starts at
the identity, so the result never falls below the standard-basis Gamma).

Gamma has kinks wherever |rho'_14| or |rho'_23| vanishes and coordinate
moves stall on them, so the ascent first runs on a smoothed objective
(each modulus replaced by sqrt(|z|^2 + eps^2)) for a decreasing list of eps,
warm-starting each stage from the last, and finishes on the exact Gamma.

``brute_force_oracle`` is an independent check: an exhaustive grid over the
same four angles, or over six Euler angles of U(2) x U(2) modulo global
phases. Grids with ``r`` intervals per mixing axis and ``r`` nodes per phase
axis are nested whenever one resolution divides the other, so the oracle
value never decreases under such refinement.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import UsageError
from .local_unitary import (HALF_PI, TWO_PI, LocalUnitaryParams, apply,
                            build_from_params, mixing_unitary)
from .phase_povm import gamma_closed_form
from .states import as_matrix, make_rng

LOWER = np.zeros(4)
UPPER = np.array([HALF_PI, HALF_PI, TWO_PI, TWO_PI])
PERIODIC = np.array([False, False, True, True])

# |dGamma/dt| <= 4 for every angle t (each generator has norm <= 1)
LIPSCHITZ = 4.0


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    sweeps_max: int = 50
    line_search_points: int = 32
    refine_tolerance: float = 1e-9
    convergence_delta: float = 1e-10
    seed: int = 0
    verify: bool = False
    oracle_resolution: int = 24
    smoothing: tuple = (0.05, 0.01, 2e-3, 4e-4)
    backend: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.restarts < 1 or self.sweeps_max < 1 or self.line_search_points < 2:
            raise UsageError("restarts, sweeps_max must be >= 1 and line_search_points >= 2")
        if self.refine_tolerance <= 0 or self.convergence_delta <= 0:
            raise UsageError("tolerances must be positive")
        if any(e <= 0 for e in self.smoothing):
            raise UsageError("smoothing widths must be positive")


@dataclass(frozen=True)
class GammaSupResult:
    value: float
    best_params: LocalUnitaryParams
    sweeps_used: int
    restarts_used: int
    converged: bool
    oracle_checked: bool = False
    oracle_value: float | None = None
    oracle_agrees: bool | None = None

    def to_json(self) -> dict:
        return {"gamma_sup": self.value, "params": self.best_params.to_json(),
                "sweeps": self.sweeps_used, "restarts": self.restarts_used,
                "converged": self.converged, "oracle_checked": self.oracle_checked,
                "oracle_value": self.oracle_value, "oracle_agrees": self.oracle_agrees}


def gamma_at(rho, p: LocalUnitaryParams) -> float:
    """Gamma of the state after the local unitary built from ``p``."""
    return gamma_closed_form(apply(build_from_params(p), rho))


def restart_points(cfg: OptimizerConfig) -> np.ndarray:
    """Identity first, then uniform draws; row k never depends on ``restarts``."""
    rng = make_rng(cfg.seed)
    pts = np.zeros((cfg.restarts, 4))
    if cfg.restarts > 1:
        pts[1:] = rng.uniform(size=(cfg.restarts - 1, 4)) * UPPER
    return pts


def pick_best(values, params):
    """Index of the best restart; ties broken by the lexicographically
    smallest parameter tuple (rounded to 1e-9)."""
    best = 0
    for k in range(1, len(values)):
        if values[k] > values[best] + 1e-12:
            best = k
        elif abs(values[k] - values[best]) <= 1e-12:
            if tuple(np.round(params[k], 9)) < tuple(np.round(params[best], 9)):
                best = k
    return best


def _run_ascent(point_name, rho, aux, cfg: OptimizerConfig, starts=None):
    be = kernels.get_backend(cfg.backend)
    point = getattr(be, point_name)
    if starts is None:
        starts = restart_points(cfg)
    return be.ascent(point, be.scan, np.ascontiguousarray(rho, dtype=np.complex128),
                     np.asarray(aux, dtype=float), starts, LOWER, UPPER, PERIODIC,
                     cfg.line_search_points, cfg.refine_tolerance,
                     cfg.convergence_delta, cfg.sweeps_max)


def _result(values, params, sweeps, conv, evals, cfg) -> GammaSupResult:
    k = pick_best(values, params)
    return GammaSupResult(
        value=float(min(max(values[k], 0.0), 1.0)),
        best_params=LocalUnitaryParams.from_array(params[k]),
        sweeps_used=int(sweeps[k]),
        restarts_used=cfg.restarts,
        converged=bool(conv[k]))


def staged_ascent(point_name, rho, cfg: OptimizerConfig, extra_aux=()):
    """Ascent through the smoothing schedule, then on the exact objective.

    The kernel named ``point_name`` receives ``aux = (eps, *extra_aux)``.
    Returns per-restart (values, params, total sweeps, converged, evaluations).
    """
    m = as_matrix(rho)
    starts = None
    total = np.zeros(cfg.restarts, dtype=np.int64)
    evals = np.zeros(cfg.restarts, dtype=np.int64)
    for eps in tuple(cfg.smoothing) + (0.0,):
        aux = np.array((eps,) + tuple(extra_aux), dtype=float)
        values, starts, sweeps, conv, ne = _run_ascent(point_name, m, aux, cfg, starts)
        total += sweeps
        evals += ne
    return values, starts, total, conv, evals


def coordinate_ascent(rho, cfg: OptimizerConfig | None = None) -> GammaSupResult:
    cfg = cfg or OptimizerConfig()
    return _result(*staged_ascent("gamma_point", rho, cfg), cfg)


# --- brute-force oracle ----------------------------------------------------------

def _euler_zyz(alpha, beta, gamma):
    rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=np.complex128)
    return rz(alpha) @ ry @ rz(gamma)


def oracle_unitaries(resolution: int, use_full_unitaries: bool = False) -> np.ndarray:
    """Candidate single-qubit unitaries of the brute-force grid, shape (K, 2, 2)."""
    mix = np.linspace(0.0, HALF_PI, resolution + 1)
    phase = TWO_PI * np.arange(resolution) / resolution
    if not use_full_unitaries:
        return np.array([mixing_unitary(m, t) for m in mix for t in phase])
    beta = np.linspace(0.0, math.pi, resolution + 1)
    return np.array([_euler_zyz(a, b, g) for a in phase for b in beta for g in phase])


def oracle_grid_bound(resolution: int, use_full_unitaries: bool = False) -> float:
    """Worst-case shortfall of the grid maximum below the true supremum.

    Every point of the search box is within half a grid step of a node on
    each axis and Gamma is ``LIPSCHITZ``-Lipschitz in each angle, so the
    bound is LIPSCHITZ * sum(half steps). Euler angles enter at half rate.
    """
    h_mix = 0.5 * HALF_PI / resolution
    h_phase = 0.5 * TWO_PI / resolution
    if use_full_unitaries:
        # beta/2 plays the mixing role; gamma plays the phase role
        return LIPSCHITZ * 2 * (0.5 * (0.5 * math.pi / resolution) + h_phase)
    return LIPSCHITZ * 2 * (h_mix + h_phase)


def brute_force_oracle(rho, resolution: int = 24, use_full_unitaries: bool = False,
                       backend: str | None = None) -> float:
    """Exhaustive grid maximum of Gamma over local unitaries.

    Parameters
    ----------
    rho : DensityMatrix or array
    resolution : int
        Intervals per mixing/polar axis and nodes per phase axis (>= 8).
    use_full_unitaries : bool
        Search six Euler angles (alpha, beta, gamma per qubit) instead of
        the four-angle family; the extra angle is a pure phase freedom.
    """
    if int(resolution) < 8:
        raise UsageError("oracle resolution must be >= 8")
    m = np.ascontiguousarray(as_matrix(rho), dtype=np.complex128)
    rows_a, p14, p23 = _grid_factors(int(resolution), bool(use_full_unitaries))
    return float(kernels.get_backend(backend).grid_max(m, rows_a, p14, p23))


@functools.lru_cache(maxsize=8)
def _grid_factors(resolution, full):
    us = oracle_unitaries(resolution, full)
    out = (np.ascontiguousarray(us[:, :2, :]),
           np.ascontiguousarray(np.einsum("lb,ld->lbd", us[:, 0], np.conj(us[:, 1]))),
           np.ascontiguousarray(np.einsum("lb,ld->lbd", us[:, 1], np.conj(us[:, 0]))))
    for a in out:
        a.setflags(write=False)
    return out


def oracle_agrees(value: float, oracle_value: float, resolution: int,
                  use_full_unitaries: bool = False) -> bool:
    """Optimizer may not lose to the grid, nor beat it by more than the grid bound."""
    bound = max(2e-3, oracle_grid_bound(resolution, use_full_unitaries))
    return value >= oracle_value - 1e-9 and value - oracle_value <= bound


def gamma_sup(rho, cfg: OptimizerConfig | None = None) -> GammaSupResult:
    cfg = cfg or OptimizerConfig()
    res = coordinate_ascent(rho, cfg)
    if not cfg.verify:
        return res
    ov = brute_force_oracle(rho, cfg.oracle_resolution, backend=cfg.backend)
    return GammaSupResult(res.value, res.best_params, res.sweeps_used, res.restarts_used,
                          res.converged, True, ov,
                          oracle_agrees(res.value, ov, cfg.oracle_resolution))
