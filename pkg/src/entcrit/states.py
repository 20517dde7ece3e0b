"""Two-qubit states: validated containers, the standard test families, and
seeded random generators.

Random numbers come from numpy's PCG64 bit generator seeded directly with
the integer seed (``numpy.random.Generator(numpy.random.PCG64(seed))``).
Gaussian variates use numpy's ``standard_normal`` and mixture weights use
``Generator.dirichlet``; golden files in ``tests/data`` depend on exactly
this stream.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qmath
from .config import TOL, Tolerances, UsageError, ValidationError

SQRT_HALF = 1.0 / math.sqrt(2.0)


def make_rng(seed: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Normalized amplitudes (a1, a2, a3, a4) on |00>, |01>, |10>, |11>."""

    amplitudes: np.ndarray
    tol: Tolerances = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.shape != (4,):
            raise ValidationError(f"pure state needs 4 amplitudes, got {amp.shape[0]}")
        if not np.all(np.isfinite(amp)):
            raise ValidationError("pure state has non-finite amplitudes")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > self.tol.norm:
            raise ValidationError(f"pure state is not normalized (sum |a_i|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amp))

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amp = np.asarray(amplitudes, dtype=np.complex128)
        return cls(amp / np.linalg.norm(amp))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite 4x4 matrix."""

    matrix: np.ndarray
    tol: Tolerances = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ValidationError(f"density matrix must be 4x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("density matrix has non-finite entries")
        herr = qmath.hermiticity_error(m)
        if herr > self.tol.herm:
            raise ValidationError(f"density matrix is not Hermitian (max |rho - rho^dagger| = {herr:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > self.tol.trace:
            raise ValidationError(f"density matrix trace is {tr.real!r}, not 1")
        lo = qmath.hermitian_eigenvalues(m, self.tol)[-1]
        if lo < -self.tol.psd:
            raise ValidationError(f"density matrix is not positive semidefinite (min eigenvalue {lo:.3e})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def rho14(self) -> complex:
        return complex(self.matrix[0, 3])

    @property
    def rho23(self) -> complex:
        return complex(self.matrix[1, 2])

    def eigenvalues(self):
        return qmath.hermitian_eigenvalues(self.matrix, self.tol)


def as_matrix(rho) -> np.ndarray:
    """Accept a DensityMatrix, PureState or raw array and return the 4x4 array."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return density_from_pure(rho).matrix
    return DensityMatrix(rho).matrix


def as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return density_from_pure(rho)
    return DensityMatrix(rho)


class BellKind(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


BELL_ORDER = (BellKind.PHI_PLUS, BellKind.PHI_MINUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS)

_BELL_VECTORS = {
    BellKind.PHI_PLUS: (SQRT_HALF, 0.0, 0.0, SQRT_HALF),
    BellKind.PHI_MINUS: (SQRT_HALF, 0.0, 0.0, -SQRT_HALF),
    BellKind.PSI_PLUS: (0.0, SQRT_HALF, SQRT_HALF, 0.0),
    BellKind.PSI_MINUS: (0.0, SQRT_HALF, -SQRT_HALF, 0.0),
}


def bell_state(kind: BellKind | str) -> PureState:
    return PureState(np.array(_BELL_VECTORS[BellKind(kind)], dtype=np.complex128))


def bell_basis() -> np.ndarray:
    """Rows are |Phi+>, |Phi->, |Psi+>, |Psi-> in the computational basis."""
    return np.array([_BELL_VECTORS[k] for k in BELL_ORDER], dtype=np.complex128)


def density_from_pure(psi: PureState) -> DensityMatrix:
    if not isinstance(psi, PureState):
        psi = PureState(psi)
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, np.conj(a)))


def _check_unit(name, x):
    x = float(x)
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise UsageError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def horodecki_state(a: float, p: float) -> DensityMatrix:
    """p |psi1><psi1| + (1-p) |psi2><psi2| with psi1 = a|00> + b|11>,
    psi2 = a|01> + b|10>, b = sqrt(1 - a^2)."""
    a = _check_unit("a", a)
    p = _check_unit("p", p)
    b = math.sqrt(1.0 - a * a)
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = p * a * a
    m[3, 3] = p * b * b
    m[0, 3] = m[3, 0] = p * a * b
    m[1, 1] = (1.0 - p) * a * a
    m[2, 2] = (1.0 - p) * b * b
    m[1, 2] = m[2, 1] = (1.0 - p) * a * b
    return DensityMatrix(m)


def bell_diagonal_state(lambdas) -> DensityMatrix:
    """Mixture of Bell projectors with weights ordered (Phi+, Phi-, Psi+, Psi-)."""
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    if lam.shape != (4,):
        raise UsageError("bell_diagonal_state needs four weights")
    if np.any(lam < -TOL.simplex) or abs(lam.sum() - 1.0) > TOL.simplex:
        raise UsageError(f"Bell weights must be nonnegative and sum to 1, got {lam.tolist()}")
    l1, l2, l3, l4 = lam
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = m[3, 3] = (l1 + l2) / 2
    m[0, 3] = m[3, 0] = (l1 - l2) / 2
    m[1, 1] = m[2, 2] = (l3 + l4) / 2
    m[1, 2] = m[2, 1] = (l3 - l4) / 2
    return DensityMatrix(m)


def werner_state(p: float) -> DensityMatrix:
    """Weight p on |Psi->, the rest spread evenly over the other Bell states."""
    p = _check_unit("p", p)
    q = (1.0 - p) / 3.0
    return bell_diagonal_state((q, q, q, p))


def _single_qubit_density(m, name):
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValidationError(f"{name} must be 2x2")
    if qmath.hermiticity_error(m) > TOL.herm:
        raise ValidationError(f"{name} is not Hermitian")
    if abs(np.trace(m) - 1.0) > TOL.trace:
        raise ValidationError(f"{name} does not have unit trace")
    if qmath.hermitian_eigenvalues(m)[-1] < -TOL.psd:
        raise ValidationError(f"{name} is not positive semidefinite")
    return m


def product_state(rho_a, rho_b) -> DensityMatrix:
    rho_a = _single_qubit_density(rho_a, "rho_a")
    rho_b = _single_qubit_density(rho_b, "rho_b")
    return DensityMatrix(qmath.kron(rho_a, rho_b))


def _gaussian_amplitudes(rng, n=4):
    g = rng.standard_normal(2 * n)
    z = g[:n] + 1j * g[n:]
    return z / np.linalg.norm(z)


def haar_random_pure(seed: int) -> PureState:
    """Haar-random pure state: normalized vector of 4 standard complex Gaussians.

    The 8 normals are drawn in one call; the first four are real parts.
    """
    return PureState(_gaussian_amplitudes(make_rng(seed)))


def random_mixed(seed: int, rank: int) -> DensityMatrix:
    """Dirichlet(1, ..., 1) mixture of ``rank`` Haar-random pure states."""
    rank = int(rank)
    if not 1 <= rank <= 4:
        raise UsageError(f"rank must be in 1..4, got {rank}")
    rng = make_rng(seed)
    vecs = [_gaussian_amplitudes(rng) for _ in range(rank)]
    weights = rng.dirichlet(np.ones(rank)) if rank > 1 else np.ones(1)
    m = sum(w * np.outer(v, np.conj(v)) for w, v in zip(weights, vecs))
    m = (m + np.conj(m).T) / 2
    return DensityMatrix(m / np.trace(m).real)


# --- JSON state descriptors --------------------------------------------------

def _complex_from_pair(x):
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ValidationError(f"complex entries must be [re, im] pairs, got {x!r}")


def state_from_descriptor(desc: dict) -> DensityMatrix:
    """Build a DensityMatrix from a JSON-style descriptor.

    Recognized kinds: ``bell``, ``horodecki``, ``werner``, ``bell_diagonal``,
    ``pure`` and ``density``. Complex numbers are ``[re, im]`` pairs.
    """
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ValidationError("state descriptor must be an object with a 'kind' field")
    kind = desc["kind"]
    try:
        if kind == "bell":
            return density_from_pure(bell_state(desc["which"]))
        if kind == "horodecki":
            return horodecki_state(desc["a"], desc["p"])
        if kind == "werner":
            return werner_state(desc["p"])
        if kind == "bell_diagonal":
            return bell_diagonal_state(desc["lambdas"])
        if kind == "pure":
            amps = [_complex_from_pair(x) for x in desc["amplitudes"]]
            return density_from_pure(PureState(amps))
        if kind == "density":
            rows = desc["matrix"]
            if len(rows) != 4 or any(len(r) != 4 for r in rows):
                raise ValidationError("density matrix must be 4x4")
            return DensityMatrix([[_complex_from_pair(x) for x in r] for r in rows])
    except KeyError as exc:
        raise ValidationError(f"descriptor of kind {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ValidationError, UsageError)):
            raise
        raise ValidationError(f"bad descriptor field: {exc}") from None
    raise ValidationError(f"unknown state kind {kind!r}")


def descriptor_from_density(rho) -> dict:
    m = as_matrix(rho)
    return {"kind": "density",
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


def load_descriptor(text: str) -> DensityMatrix:
    try:
        desc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from None
    return state_from_descriptor(desc)
