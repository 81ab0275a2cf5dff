"""Dense symmetric eigenvalues: Householder tridiagonalization + implicit QL.

The three hot kernels (tridiagonalization, QL sweeps, Sturm counts) exist in
two flavours.  With numba enabled (the default) the loop kernels are compiled
with ``@njit``; with ``SYMSPEC_NUMBA=0`` the tridiagonalization and Sturm
counts use vectorized numpy and the QL sweep runs as plain Python.

For matrices larger than :data:`HOUSEHOLDER_MAX_N` the unblocked Householder
reduction becomes memory bound, so ``method="auto"`` hands the reduction to
LAPACK ``dsytrd`` (blocked).  The QL stage is always ours.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import lapack

from . import _accel
from .errors import InvalidInput

HOUSEHOLDER_MAX_N = 1536
QL_MAX_ITER = 60


# ---------------------------------------------------------------------------
# Householder reduction
# ---------------------------------------------------------------------------

@_accel.njit
def _householder_loops(a):
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    v = np.zeros(n)
    p = np.zeros(n)
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += a[i, k] * a[i, k]
        alpha = math.sqrt(alpha)
        if alpha == 0.0:
            e[k] = 0.0
            continue
        if a[k + 1, k] > 0.0:
            alpha = -alpha
        e[k] = alpha
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] -= alpha
        vnorm2 = 0.0
        for i in range(k + 1, n):
            vnorm2 += v[i] * v[i]
        beta = 2.0 / vnorm2
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += a[i, j] * v[j]
            p[i] = beta * s
        kk = 0.0
        for i in range(k + 1, n):
            kk += v[i] * p[i]
        kk *= 0.5 * beta
        for i in range(k + 1, n):
            p[i] -= kk * v[i]
        for i in range(k + 1, n):
            vi = v[i]
            pi = p[i]
            for j in range(k + 1, n):
                a[i, j] -= vi * p[j] + pi * v[j]
    for i in range(n):
        d[i] = a[i, i]
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return d, e


def _householder_numpy(a):
    n = a.shape[0]
    e = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0.0:
            alpha = -alpha
        e[k] = alpha
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / (v @ v)
        sub = a[k + 1:, k + 1:]
        p = beta * (sub @ v)
        p -= (0.5 * beta * (v @ p)) * v
        sub -= np.outer(v, p) + np.outer(p, v)
    d = np.diag(a).copy()
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return d, e


def _dsytrd(a):
    n = a.shape[0]
    lwork = int(lapack.dsytrd_lwork(n, lower=1)[0])
    _, d, e, _, info = lapack.dsytrd(a, lower=1, lwork=max(lwork, 1))
    if info != 0:
        raise RuntimeError(f"dsytrd failed with info={info}")
    return np.asarray(d, dtype=float), np.asarray(e, dtype=float)


def tridiagonalize(a, method="auto"):
    """Reduce a symmetric matrix to tridiagonal ``(diag, offdiag)``.

    ``method`` is ``"householder"`` (our kernel), ``"lapack"`` or ``"auto"``.
    Only the lower triangle's symmetric part matters; the input is copied.
    """
    a = np.array(a, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if method == "auto":
        method = "householder" if n <= HOUSEHOLDER_MAX_N else "lapack"
    if method == "lapack":
        return _dsytrd(a)
    if method != "householder":
        raise InvalidInput(f"unknown tridiagonalization method {method!r}")
    a = 0.5 * (a + a.T)
    if _accel.USE_NUMBA:
        return _householder_loops(a)
    return _householder_numpy(a)


# ---------------------------------------------------------------------------
# Implicit QL
# ---------------------------------------------------------------------------

@_accel.njit
def _tql_loops(d, e_sub, eps):
    # e[i] couples d[i] and d[i+1]; e[n-1] is a zero sentinel.
    n = d.shape[0]
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = e_sub[i]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > QL_MAX_ITER:
                return l + 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def eigvalsh_tridiagonal(d, e):
    """Eigenvalues (ascending) of the symmetric tridiagonal matrix (d, e)."""
    d = np.array(d, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    if e.shape[0] != max(d.shape[0] - 1, 0):
        raise InvalidInput("offdiagonal must have length len(diag) - 1")
    if d.shape[0] == 0:
        return d
    info = _tql_loops(d, e, np.finfo(np.float64).eps)
    if info != 0:
        raise RuntimeError(f"implicit QL did not converge for eigenvalue {info - 1}")
    d.sort()
    return d


def eigvalsh(a, method="auto"):
    """All eigenvalues of a dense symmetric matrix, ascending."""
    d, e = tridiagonalize(a, method=method)
    return eigvalsh_tridiagonal(d, e)


# ---------------------------------------------------------------------------
# Sturm sequence counts
# ---------------------------------------------------------------------------

@_accel.njit
def _sturm_loops(d, e, shifts, tiny):
    out = np.zeros(shifts.shape[0], dtype=np.int64)
    n = d.shape[0]
    for k in range(shifts.shape[0]):
        x = shifts[k]
        count = 0
        q = d[0] - x
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
        for i in range(1, n):
            q = d[i] - x - e[i - 1] * e[i - 1] / q
            if q == 0.0:
                q = -tiny
            if q < 0.0:
                count += 1
        out[k] = count
    return out


def _sturm_numpy(d, e, shifts, tiny):
    q = d[0] - shifts
    q[q == 0.0] = -tiny
    count = (q < 0.0).astype(np.int64)
    e2 = e * e
    for i in range(1, d.shape[0]):
        q = d[i] - shifts - e2[i - 1] / q
        q[q == 0.0] = -tiny
        count += q < 0.0
    return count


def sturm_count(d, e, shifts):
    """Number of eigenvalues of the tridiagonal (d, e) strictly below each shift.

    Independent of the QL sweep, so index and nullity counts can be
    cross-checked without the eigenvalues themselves.
    """
    d = np.asarray(d, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    scalar = np.ndim(shifts) == 0
    shifts = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    if d.shape[0] == 0:
        out = np.zeros(shifts.shape, dtype=np.int64)
    else:
        tiny = np.finfo(np.float64).tiny * max(1.0, float(np.abs(d).max()))
        kernel = _sturm_loops if _accel.USE_NUMBA else _sturm_numpy
        out = kernel(d, e, shifts, tiny)
    return int(out[0]) if scalar else out
