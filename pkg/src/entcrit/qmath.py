"""Small complex linear algebra on 2x2 and 4x4 matrices.

Matrices are plain ``numpy`` complex arrays. Two-qubit operators use the
basis order |00>, |01>, |10>, |11> (qubit A is the more significant index),
so the corner coherences rho_14 and rho_23 sit at ``[0, 3]`` and ``[1, 2]``.

The eigen and singular value routines are cyclic Jacobi sweeps; at these
sizes they converge in a handful of sweeps and are accurate to a few ulps
of the matrix norm, including for (near) zero eigenvalues.
"""
import math

import numpy as np

from . import _accel
from .config import TOL, UsageError, ValidationError

_SHAPES = ((2, 2), (4, 4))


def _check_square(m, name="matrix"):
    m = np.asarray(m)
    if m.shape not in _SHAPES:
        raise UsageError(f"{name} must be 2x2 or 4x4, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def matmul(a, b):
    a = _check_square(a, "a")
    b = _check_square(b, "b")
    if a.shape != b.shape:
        raise UsageError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a @ b


def dagger(m):
    return np.conj(_check_square(m)).T


def kron(a, b):
    """Tensor product A (x) B with qubit A as the row-major (leading) index."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise UsageError("kron expects two 2x2 matrices")
    return np.kron(a, b)


def trace(m):
    return complex(np.trace(_check_square(m)))


def hermiticity_error(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - np.conj(m).T)))


def check_hermitian(m, tol=TOL):
    m = _check_square(m)
    err = hermiticity_error(m)
    if err > tol.herm:
        raise ValidationError(f"matrix is not Hermitian (max |m - m^dagger| = {err:.3e})")
    return m


# --- Jacobi kernels -------------------------------------------------------
# Written with explicit loops so the same source runs under numba or plain
# Python; the numpy path is only slow by a constant at these sizes.

def _jacobi_eigh(a_in, tol, max_sweeps):
    n = a_in.shape[0]
    a = a_in.copy()
    v = np.eye(n, dtype=np.complex128)
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        scale = 0.0
        for i in range(n):
            for j in range(n):
                x = abs(a[i, j]) ** 2
                scale += x
                if i != j:
                    off += x
        if math.sqrt(off) <= tol * max(1.0, math.sqrt(scale)):
            break
        sweeps = sweep + 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                ph = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(.., e^{-i alpha}_q, ..) @ R(c, s); A <- G^H A G
                gqp = -s * np.conj(ph)
                gqq = c * np.conj(ph)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * c + akq * gqp
                    a[k, q] = akp * s + akq * gqq
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * c + vkq * gqp
                    v[k, q] = vkp * s + vkq * gqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk + np.conj(gqp) * aqk
                    a[q, k] = s * apk + np.conj(gqq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps


def _jacobi_svd(x_in, max_sweeps):
    # one-sided (Hestenes) Jacobi: orthogonalise columns by unitary rotations
    n = x_in.shape[1]
    u = x_in.copy()
    eps = 2.220446049250313e-16
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0j
                for k in range(u.shape[0]):
                    alpha += abs(u[k, p]) ** 2
                    beta += abs(u[k, q]) ** 2
                    gamma += np.conj(u[k, p]) * u[k, q]
                g = abs(gamma)
                if g <= eps * math.sqrt(alpha * beta) or g < 1e-300:
                    continue
                rotated = True
                ph = np.conj(gamma / g)
                zeta = (beta - alpha) / (2.0 * g)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(u.shape[0]):
                    up = u[k, p]
                    wq = u[k, q] * ph
                    u[k, p] = c * up - s * wq
                    u[k, q] = s * up + c * wq
        if not rotated:
            break
    sv = np.empty(n)
    for j in range(n):
        acc = 0.0
        for k in range(u.shape[0]):
            acc += abs(u[k, j]) ** 2
        sv[j] = math.sqrt(acc)
    return sv


_KERNELS = {}


def _kernels():
    key = _accel.numba_enabled()
    if key not in _KERNELS:
        if key:
            _KERNELS[key] = (_accel.jit(_jacobi_eigh), _accel.jit(_jacobi_svd))
        else:
            _KERNELS[key] = (_jacobi_eigh, _jacobi_svd)
    return _KERNELS[key]


def hermitian_eigh(m, tol=TOL):
    """Eigenvalues (descending) and unit eigenvectors (columns) of a Hermitian matrix."""
    m = check_hermitian(m, tol)
    eigh, _ = _kernels()
    w, v, _ = eigh(np.ascontiguousarray(m, dtype=np.complex128), tol.jacobi_offdiag, tol.jacobi_max_sweeps)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(m, tol=TOL):
    """Real eigenvalues of a Hermitian 2x2/4x4 matrix, sorted descending.

    Raises
    ------
    ValidationError
        If ``m`` deviates from Hermitian by more than ``tol.herm``.
    """
    return hermitian_eigh(m, tol)[0]


def singular_values(m, tol=TOL):
    """Singular values (descending) via one-sided Jacobi.

    Small singular values come out with absolute error of order
    ``eps * ||m||`` rather than ``sqrt(eps)``, which matters for the
    spin-flip construction in :mod:`entcrit.measures`.
    """
    m = _check_square(m)
    _, svd = _kernels()
    sv = svd(np.ascontiguousarray(m, dtype=np.complex128), tol.jacobi_max_sweeps)
    return np.sort(sv)[::-1]
