"""Hot loops: Gamma at local-unitary parameters, the noiseless Bell-analyzer
objective, the coordinate-ascent driver and the brute-force grid maximum.

Every kernel is written once as plain Python over scalars so that numba can
compile it unchanged. ``get_backend()`` returns either the compiled set or a
pure-numpy set in which the inner scans are vectorized instead; the choice
follows ``ENTCRIT_BACKEND`` (see :mod:`entcrit._accel`).

Parameter vectors are ``x = (phi, vartheta, theta_a, theta_b)``.
"""
from __future__ import annotations

import math
import threading
import types
from types import SimpleNamespace

import numpy as np

from . import _accel

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SQRT_HALF = 1.0 / math.sqrt(2.0)


# --- scalar kernels ----------------------------------------------------------

def _corners(rho, phi, vt, ta, tb):
    """(rho'_14, rho'_23) of rho' = U rho U^dagger without forming rho'."""
    ca, sa = math.cos(phi), math.sin(phi)
    cb, sb = math.cos(vt), math.sin(vt)
    ea = complex(math.cos(ta), math.sin(ta))
    eb = complex(math.cos(tb), math.sin(tb))
    # rows of U_A and U_B
    a00, a01, a10, a11 = complex(ca), ea * sa, -ea.conjugate() * sa, complex(ca)
    b00, b01, b10, b11 = complex(cb), eb * sb, -eb.conjugate() * sb, complex(cb)
    ca10, ca11 = a10.conjugate(), a11.conjugate()
    # M[b, d] = sum_{a, c} A0[a] rho[2a + b, 2c + d] conj(A1[c])
    m00 = a00 * (rho[0, 0] * ca10 + rho[0, 2] * ca11) + a01 * (rho[2, 0] * ca10 + rho[2, 2] * ca11)
    m01 = a00 * (rho[0, 1] * ca10 + rho[0, 3] * ca11) + a01 * (rho[2, 1] * ca10 + rho[2, 3] * ca11)
    m10 = a00 * (rho[1, 0] * ca10 + rho[1, 2] * ca11) + a01 * (rho[3, 0] * ca10 + rho[3, 2] * ca11)
    m11 = a00 * (rho[1, 1] * ca10 + rho[1, 3] * ca11) + a01 * (rho[3, 1] * ca10 + rho[3, 3] * ca11)
    cb00, cb01, cb10, cb11 = b00.conjugate(), b01.conjugate(), b10.conjugate(), b11.conjugate()
    r14 = (b00 * (m00 * cb10 + m01 * cb11) + b01 * (m10 * cb10 + m11 * cb11))
    r23 = (b10 * (m00 * cb00 + m01 * cb01) + b11 * (m10 * cb00 + m11 * cb01))
    return r14, r23


def gamma_point(rho, aux, x):
    """Gamma after the local unitary x. ``aux[0] = eps`` smooths the moduli
    as sqrt(|z|^2 + eps^2); eps = 0 gives Gamma exactly."""
    r14, r23 = _corners(rho, x[0], x[1], x[2], x[3])
    eps2 = aux[0] * aux[0]
    if eps2 == 0.0:
        return 2.0 * abs(abs(r14) - abs(r23))
    u = math.sqrt(r14.real * r14.real + r14.imag * r14.imag + eps2)
    v = math.sqrt(r23.real * r23.real + r23.imag * r23.imag + eps2)
    return 2.0 * abs(u - v)


def _transform(rho, x):
    """Full rho' = (U_A (x) U_B) rho (U_A (x) U_B)^dagger."""
    u = np.empty((4, 4), dtype=np.complex128)
    ca, sa = math.cos(x[0]), math.sin(x[0])
    cb, sb = math.cos(x[1]), math.sin(x[1])
    ea = complex(math.cos(x[2]), math.sin(x[2]))
    eb = complex(math.cos(x[3]), math.sin(x[3]))
    ua = ((complex(ca), ea * sa), (-ea.conjugate() * sa, complex(ca)))
    ub = ((complex(cb), eb * sb), (-eb.conjugate() * sb, complex(cb)))
    for i in range(2):
        for k in range(2):
            for j in range(2):
                for m in range(2):
                    u[2 * i + k, 2 * j + m] = ua[i][j] * ub[k][m]
    out = np.zeros((4, 4), dtype=np.complex128)
    tmp = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += rho[i, k] * u[j, k].conjugate()
            tmp[i, j] = acc
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += u[i, k] * tmp[k, j]
            out[i, j] = acc
    return out


def _pair_weight(rp, i, j, vi, vj):
    # <v| rp |v> for v with nonzero components vi at i and vj at j only
    cross = vi.conjugate() * vj * rp[i, j]
    return ((vi.real * vi.real + vi.imag * vi.imag) * rp[i, i].real
            + (vj.real * vj.real + vj.imag * vj.imag) * rp[j, j].real
            + 2.0 * cross.real)


def _difference(rp, chi, which):
    # which = 0: P_phi+ - P_phi-, which = 1: P_psi+ - P_psi-
    e = complex(math.cos(chi), -math.sin(chi))  # conj(e^{i chi})
    h = complex(SQRT_HALF)
    if which == 0:
        return _pair_weight(rp, 0, 3, h, h * e) - _pair_weight(rp, 0, 3, h, -h * e)
    return _pair_weight(rp, 1, 2, h * e, h) - _pair_weight(rp, 1, 2, h * e, -h)


def bell_differences(rp, chi):
    """Bell-analyzer differences after local phases (theta_a, theta_b) = (0, chi).

    Returns (P_phi+ - P_phi-, P_psi+ - P_psi-). Each probability is a
    projection onto a Bell vector, i.e. <B| D rp D^dagger |B> with
    D = diag(1, e^{i chi}) on qubit B; every Bell vector has two nonzero
    components, so each projection needs three terms.
    """
    return _difference(rp, chi, 0), _difference(rp, chi, 1)


def _max_difference(rp, which, n_phase, tol):
    best = -1e300
    best_chi = 0.0
    step = 2.0 * math.pi / n_phase
    for k in range(n_phase):
        chi = k * step
        d = _difference(rp, chi, which)
        if d > best:
            best = d
            best_chi = chi
    a = best_chi - step
    b = best_chi + step
    c = b - INV_GOLDEN * (b - a)
    e = a + INV_GOLDEN * (b - a)
    fc = _difference(rp, c, which)
    fe = _difference(rp, e, which)
    while b - a > tol:
        if fc >= fe:
            b = e
            e = c
            fe = fc
            c = b - INV_GOLDEN * (b - a)
            fc = _difference(rp, c, which)
        else:
            a = c
            c = e
            fc = fe
            e = a + INV_GOLDEN * (b - a)
            fe = _difference(rp, e, which)
    return max(best, fc, fe)


def measured_abs(rp, n_phase, tol):
    """(|rho_14|, |rho_23|) recovered as half the maximal Bell differences."""
    return 0.5 * _max_difference(rp, 0, n_phase, tol), 0.5 * _max_difference(rp, 1, n_phase, tol)


def protocol_point(rho, aux, x):
    """Noiseless protocol objective 2 |abs14 - abs23| at local setting x.

    ``aux = (eps, n_phase, phase_tol)`` with eps smoothing as in gamma_point.
    """
    rp = _transform(rho, x)
    a14, a23 = measured_abs(rp, int(aux[1]), aux[2])
    eps2 = aux[0] * aux[0]
    if eps2 == 0.0:
        return 2.0 * abs(a14 - a23)
    return 2.0 * abs(math.sqrt(a14 * a14 + eps2) - math.sqrt(a23 * a23 + eps2))


# --- line search and coordinate ascent ----------------------------------------

def golden_line(point, rho, aux, x, axis, lo, hi, tol):
    """Golden-section maximum of ``point`` along one coordinate in [lo, hi].
    Returns (t, f, evaluations)."""
    y = x.copy()
    a, b = lo, hi
    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    y[axis] = c
    fc = point(rho, aux, y)
    y[axis] = d
    fd = point(rho, aux, y)
    n = 2
    while b - a > tol:
        n += 1
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - INV_GOLDEN * (b - a)
            y[axis] = c
            fc = point(rho, aux, y)
        else:
            a = c
            c = d
            fc = fd
            d = a + INV_GOLDEN * (b - a)
            y[axis] = d
            fd = point(rho, aux, y)
    if fc >= fd:
        return c, fc, n
    return d, fd, n


def _along(x, d, t, lo, hi, periodic, y):
    two_pi = 2.0 * math.pi
    for i in range(4):
        v = x[i] + t * d[i]
        if periodic[i]:
            v = v % two_pi
        else:
            v = min(max(v, lo[i]), hi[i])
        y[i] = v


def golden_dir(point, rho, aux, x, d, lo, hi, periodic, a, b, tol):
    """Golden-section maximum of ``point`` on the segment x + t d, t in [a, b]
    (mixing angles clamped to their range). Returns (t, f, evaluations)."""
    y = x.copy()
    c = b - INV_GOLDEN * (b - a)
    e = a + INV_GOLDEN * (b - a)
    _along(x, d, c, lo, hi, periodic, y)
    fc = point(rho, aux, y)
    _along(x, d, e, lo, hi, periodic, y)
    fe = point(rho, aux, y)
    n = 2
    while b - a > tol:
        n += 1
        if fc >= fe:
            b = e
            e = c
            fe = fc
            c = b - INV_GOLDEN * (b - a)
            _along(x, d, c, lo, hi, periodic, y)
            fc = point(rho, aux, y)
        else:
            a = c
            c = e
            fc = fe
            e = a + INV_GOLDEN * (b - a)
            _along(x, d, e, lo, hi, periodic, y)
            fe = point(rho, aux, y)
    if fc >= fe:
        return c, fc, n
    return e, fe, n


def _bracket(point, rho, aux, x, d, dnorm, f0, lo, hi, periodic, y):
    """Interval [a, b] along x + t d holding the line maximum: t doubles while
    the objective keeps rising, so a ridge crawled by tiny coordinate moves
    is crossed in a logarithmic number of steps."""
    t_prev, t_prev2 = 0.0, 0.0
    f_prev = f0
    t = 1.0
    n = 0
    while t * dnorm <= 4.0 * math.pi:
        _along(x, d, t, lo, hi, periodic, y)
        f = point(rho, aux, y)
        n += 1
        if f <= f_prev:
            break
        t_prev2, t_prev, f_prev = t_prev, t, f
        t *= 2.0
    return t_prev2, t, n


def scan_values(lo, hi, periodic, n):
    if periodic:
        return lo + (hi - lo) * np.arange(n) / n
    return np.linspace(lo, hi, n)


def ascent(point, scan, rho, aux, starts, lo, hi, periodic, n_scan, tol, delta, sweeps_max):
    """Cyclic coordinate ascent from each row of ``starts``.

    Per coordinate: a coarse scan of ``n_scan`` points across the full range,
    then golden-section refinement within one scan step of the incumbent.
    After each sweep a Powell step searches along the sweep's net move,
    with a bracket that grows until the objective stops rising.
    Stops after a sweep that improves by less than ``delta``.
    Returns per-restart (values, params, sweeps, converged, evaluations).
    """
    n_restarts = starts.shape[0]
    out_f = np.empty(n_restarts)
    out_x = np.empty((n_restarts, 4))
    out_sweeps = np.zeros(n_restarts, dtype=np.int64)
    out_conv = np.zeros(n_restarts, dtype=np.bool_)
    out_evals = np.zeros(n_restarts, dtype=np.int64)
    two_pi = 2.0 * math.pi
    x_start = np.empty(4)
    d = np.empty(4)
    for r in range(n_restarts):
        x = starts[r].copy()
        f = point(rho, aux, x)
        evals = 1
        for sweep in range(sweeps_max):
            f_start = f
            x_start[:] = x
            for axis in range(4):
                values = scan_values(lo[axis], hi[axis], periodic[axis], n_scan)
                step = values[1] - values[0]
                fs = scan(point, rho, aux, x, axis, values)
                evals += n_scan
                k = np.argmax(fs)
                if fs[k] > f:
                    x[axis] = values[k]
                    f = fs[k]
                a = x[axis] - step
                b = x[axis] + step
                if not periodic[axis]:
                    a = max(a, lo[axis])
                    b = min(b, hi[axis])
                t, ft, ne = golden_line(point, rho, aux, x, axis, a, b, tol)
                evals += ne
                if ft > f:
                    if periodic[axis]:
                        t = t % two_pi
                    x[axis] = t
                    f = ft
            # Powell step: extrapolate along this sweep's net displacement,
            # which follows curved ridges that single coordinates zig-zag across
            dnorm = 0.0
            for i in range(4):
                di = x[i] - x_start[i]
                if periodic[i]:
                    di = (di + math.pi) % two_pi - math.pi
                d[i] = di
                dnorm += di * di
            if dnorm > 0.0:
                dnorm = math.sqrt(dnorm)
                a, b, ne = _bracket(point, rho, aux, x, d, dnorm, f, lo, hi, periodic, x_start)
                evals += ne
                t, ft, ne = golden_dir(point, rho, aux, x, d, lo, hi, periodic, a, b,
                                       tol / dnorm)
                evals += ne
                if ft > f:
                    _along(x, d, t, lo, hi, periodic, x_start)
                    x[:] = x_start
                    f = ft
            out_sweeps[r] = sweep + 1
            if f - f_start < delta:
                out_conv[r] = True
                break
        out_f[r] = f
        out_x[r] = x
        out_evals[r] = evals
    return out_f, out_x, out_sweeps, out_conv, out_evals


def scan_loop(point, rho, aux, x, axis, values):
    y = x.copy()
    out = np.empty(values.shape[0])
    for i in range(values.shape[0]):
        y[axis] = values[i]
        out[i] = point(rho, aux, y)
    return out


# --- brute-force grid ----------------------------------------------------------

def grid_max(rho, rows_a, p14, p23):
    """max over all (A, B) pairs of 2 ||rho'_14| - |rho'_23||.

    ``rows_a[k] = (U_A[0, :], U_A[1, :])`` and ``p14[l] = outer(U_B[0], conj U_B[1])``,
    ``p23[l] = outer(U_B[1], conj U_B[0])`` for each candidate U_B.
    """
    nb = p14.shape[0]
    # real/imag parts of the B-side factors, laid out contiguously per candidate
    q = np.empty((nb, 16))
    for l in range(nb):
        for j in range(4):
            z = p14[l, j // 2, j % 2]
            w = p23[l, j // 2, j % 2]
            q[l, 2 * j] = z.real
            q[l, 2 * j + 1] = z.imag
            q[l, 8 + 2 * j] = w.real
            q[l, 8 + 2 * j + 1] = w.imag
    best2 = 0.0
    m = np.empty(8)
    for k in range(rows_a.shape[0]):
        a00 = rows_a[k, 0, 0]
        a01 = rows_a[k, 0, 1]
        c10 = rows_a[k, 1, 0].conjugate()
        c11 = rows_a[k, 1, 1].conjugate()
        for j in range(4):
            b, d = j // 2, j % 2
            z = (a00 * (rho[b, d] * c10 + rho[b, 2 + d] * c11)
                 + a01 * (rho[2 + b, d] * c10 + rho[2 + b, 2 + d] * c11))
            m[2 * j] = z.real
            m[2 * j + 1] = z.imag
        for l in range(nb):
            xr = 0.0
            xi = 0.0
            yr = 0.0
            yi = 0.0
            for j in range(4):
                mr = m[2 * j]
                mi = m[2 * j + 1]
                xr += mr * q[l, 2 * j] - mi * q[l, 2 * j + 1]
                xi += mr * q[l, 2 * j + 1] + mi * q[l, 2 * j]
                yr += mr * q[l, 8 + 2 * j] - mi * q[l, 8 + 2 * j + 1]
                yi += mr * q[l, 8 + 2 * j + 1] + mi * q[l, 8 + 2 * j]
            # compare squared moduli first; one sqrt per improvement only
            u = xr * xr + xi * xi
            v = yr * yr + yi * yi
            if abs(u - v) > best2:
                g = math.sqrt(u) - math.sqrt(v)
                if g * g > best2:
                    best2 = g * g
    return 2.0 * math.sqrt(best2)


# --- numpy (vectorized) variants ----------------------------------------------

def _corners_np(rho, X):
    X = np.atleast_2d(X)
    ca, sa = np.cos(X[:, 0]), np.sin(X[:, 0])
    cb, sb = np.cos(X[:, 1]), np.sin(X[:, 1])
    ea, eb = np.exp(1j * X[:, 2]), np.exp(1j * X[:, 3])
    A0 = np.stack([ca + 0j, ea * sa], axis=1)
    A1 = np.stack([-np.conj(ea) * sa, ca + 0j], axis=1)
    B0 = np.stack([cb + 0j, eb * sb], axis=1)
    B1 = np.stack([-np.conj(eb) * sb, cb + 0j], axis=1)
    r = rho.reshape(2, 2, 2, 2)
    M = np.einsum("na,abcd,nc->nbd", A0, r, np.conj(A1))
    r14 = np.einsum("nb,nbd,nd->n", B0, M, np.conj(B1))
    r23 = np.einsum("nb,nbd,nd->n", B1, M, np.conj(B0))
    return r14, r23


def gamma_points_np(rho, X, eps=0.0):
    r14, r23 = _corners_np(rho, X)
    if eps == 0.0:
        return 2.0 * np.abs(np.abs(r14) - np.abs(r23))
    return 2.0 * np.abs(np.sqrt(np.abs(r14) ** 2 + eps * eps) - np.sqrt(np.abs(r23) ** 2 + eps * eps))


def scan_numpy(point, rho, aux, x, axis, values):
    if point is gamma_point:
        X = np.repeat(x[None, :], values.shape[0], axis=0)
        X[:, axis] = values
        return gamma_points_np(rho, X, aux[0])
    return scan_loop(point, rho, aux, x, axis, values)


def grid_max_np(rho, rows_a, p14, p23):
    best = 0.0
    r = rho.reshape(2, 2, 2, 2)
    for k in range(rows_a.shape[0]):
        M = np.einsum("a,abcd,c->bd", rows_a[k, 0], r, np.conj(rows_a[k, 1]))
        r14 = np.einsum("bd,lbd->l", M, p14)
        r23 = np.einsum("bd,lbd->l", M, p23)
        g = 2.0 * np.abs(np.abs(r14) - np.abs(r23)).max()
        best = max(best, float(g))
    return best


# --- backend selection ---------------------------------------------------------

_BACKENDS: dict = {}


_LEAVES = ("_corners", "_transform", "_pair_weight", "_difference", "bell_differences",
           "_max_difference", "measured_abs", "scan_values", "_along")


def _build(name):
    if name == "numpy":
        return SimpleNamespace(
            name="numpy", gamma_point=gamma_point, protocol_point=protocol_point,
            scan=scan_numpy, ascent=ascent, grid_max=grid_max_np,
            measured_abs=measured_abs, transform=_transform,
            bell_differences=bell_differences)
    if not _accel.HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return _compile_numba()


def _compile_numba():
    # Compile copies of the kernels whose globals point at jitted helpers, so
    # the module-level (numpy backend) functions stay pure Python.
    env = dict(globals())

    def rebind(fn):
        return types.FunctionType(fn.__code__, env, fn.__name__, fn.__defaults__, fn.__closure__)

    for key in _LEAVES:
        env[key] = _accel.jit(rebind(globals()[key]))
    for key in ("gamma_point", "protocol_point"):
        env[key] = _accel.jit(rebind(globals()[key]))
    env["grid_max"] = _accel.jit_fast(rebind(grid_max))
    # these take jitted functions as arguments and cannot be cached
    for key in ("golden_line", "golden_dir", "_bracket", "scan_loop", "ascent"):
        env[key] = _accel.jit_nocache(rebind(globals()[key]))
    return SimpleNamespace(
        name="numba", gamma_point=env["gamma_point"], protocol_point=env["protocol_point"],
        scan=env["scan_loop"], ascent=env["ascent"], grid_max=env["grid_max"],
        measured_abs=env["measured_abs"], transform=env["_transform"],
        bell_differences=env["bell_differences"])


_BUILD_LOCK = threading.Lock()


def get_backend(name: str | None = None):
    """Kernel set by name ("numba" or "numpy"); default follows the env flag."""
    if name is None:
        name = "numba" if _accel.numba_enabled() else "numpy"
    with _BUILD_LOCK:
        if name not in _BACKENDS:
            _BACKENDS[name] = _build(name)
    return _BACKENDS[name]
