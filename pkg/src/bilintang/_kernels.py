"""Hot inner loops with a numba path and a pure-numpy fallback.

Set ``BILINTANG_DISABLE_NUMBA=1`` to force the numpy implementations (also
used automatically when numba is not importable).  Both paths implement the
same arithmetic; ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

DISABLE_ENV = "BILINTANG_DISABLE_NUMBA"


def use_numba() -> bool:
    if njit is None:
        return False
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


# --------------------------------------------------------------------------
# Modified Gram-Schmidt with one reorthogonalization pass and rank truncation

def _mgs_loop(X, tol, Q, keep):
    n, k = X.shape
    r = 0
    for j in range(k):
        x = X[:, j].copy()
        nrm0 = 0.0
        for i in range(n):
            nrm0 += abs(x[i]) ** 2
        nrm0 = np.sqrt(nrm0)
        if nrm0 == 0.0:
            continue
        for i in range(n):
            x[i] = x[i] / nrm0
        for _ in range(2):
            for c in range(r):
                h = 0.0 * x[0]
                for i in range(n):
                    h += np.conj(Q[i, c]) * x[i]
                for i in range(n):
                    x[i] -= h * Q[i, c]
        nrm = 0.0
        for i in range(n):
            nrm += abs(x[i]) ** 2
        nrm = np.sqrt(nrm)
        if nrm <= tol:
            continue
        for i in range(n):
            Q[i, r] = x[i] / nrm
        keep[r] = j
        r += 1
    return r


_mgs_loop_jit = njit(cache=True)(_mgs_loop) if njit is not None else None


def mgs_numpy(X: np.ndarray, tol: float = 1e-10):
    """Orthonormalize the columns of ``X`` column by column.

    Each column is first scaled to unit norm, then orthogonalized twice
    against the accepted columns; it is dropped when the remaining norm is
    at most ``tol``.

    Returns
    -------
    Q
        Orthonormal basis, one column per accepted input column.
    keep
        Indices of the accepted input columns.
    """
    X = np.asarray(X)
    n, k = X.shape
    Q = np.zeros((n, k), dtype=X.dtype)
    keep = []
    for j in range(k):
        x = X[:, j].copy()
        nrm0 = np.linalg.norm(x)
        if nrm0 == 0.0:
            continue
        x /= nrm0
        r = len(keep)
        for _ in range(2):
            for c in range(r):
                x -= np.vdot(Q[:, c], x) * Q[:, c]
        nrm = np.linalg.norm(x)
        if nrm <= tol:
            continue
        Q[:, r] = x / nrm
        keep.append(j)
    return Q[:, : len(keep)], np.array(keep, dtype=np.int64)


def mgs_numba(X: np.ndarray, tol: float = 1e-10):
    X = np.ascontiguousarray(X)
    if X.dtype not in (np.float64, np.complex128):
        X = X.astype(np.complex128 if np.iscomplexobj(X) else np.float64)
    n, k = X.shape
    Q = np.zeros((n, k), dtype=X.dtype)
    keep = np.zeros(k, dtype=np.int64)
    r = _mgs_loop_jit(X, float(tol), Q, keep)
    return Q[:, :r], keep[:r]


def mgs(X, tol: float = 1e-10):
    """Dispatch to :func:`mgs_numba` or :func:`mgs_numpy`."""
    if use_numba() and X.shape[0] * X.shape[1] > 0:
        return mgs_numba(X, tol)
    return mgs_numpy(X, tol)


# --------------------------------------------------------------------------
# IMEX time stepping for small dense systems
#
#   x_{q+1} = ME x_q + dt * (sum_j u_j MN_j x_q + MB u + MAd x(t_{q+1} - tau))
#
# where M = (E - dt A)^{-1} has been premultiplied.  The delayed state is
# linearly interpolated from a ring buffer; history is zero on [-tau, 0].

def _imex_loop(ME, MN, MB, MAd, C, U, dt, lag_int, lag_frac, Y):
    nsteps = U.shape[0] - 1
    n = ME.shape[0]
    m = MB.shape[1]
    p = C.shape[0]
    has_delay = lag_int >= 1
    L = lag_int + 2 if has_delay else 1
    H = np.zeros((L, n))
    x = np.zeros(n)
    tmp = np.zeros(n)
    xd = np.zeros(n)
    for q in range(nsteps):
        u = U[q + 1]
        for i in range(n):
            acc = 0.0
            for c in range(n):
                Mx = ME[i, c]
                for j in range(m):
                    Mx += dt * u[j] * MN[j, i, c]
                acc += Mx * x[c]
            for j in range(m):
                acc += dt * MB[i, j] * u[j]
            tmp[i] = acc
        if has_delay:
            i0 = q + 1 - lag_int
            i1 = i0 - 1
            for i in range(n):
                v = 0.0
                if i0 >= 0:
                    v += (1.0 - lag_frac) * H[i0 % L, i]
                if i1 >= 0 and lag_frac != 0.0:
                    v += lag_frac * H[i1 % L, i]
                xd[i] = v
            for i in range(n):
                acc = 0.0
                for c in range(n):
                    acc += MAd[i, c] * xd[c]
                tmp[i] += dt * acc
        for i in range(n):
            x[i] = tmp[i]
        H[(q + 1) % L, :] = x
        for r in range(p):
            acc = 0.0
            for c in range(n):
                acc += C[r, c] * x[c]
            Y[q + 1, r] = acc
    return Y


_imex_loop_jit = njit(cache=True)(_imex_loop) if njit is not None else None


def imex_numpy(ME, MN, MB, MAd, C, U, dt, lag_int=0, lag_frac=0.0):
    """Vectorized reference implementation of the dense IMEX recursion."""
    nsteps = U.shape[0] - 1
    n = ME.shape[0]
    has_delay = lag_int >= 1
    L = lag_int + 2 if has_delay else 1
    H = np.zeros((L, n))
    x = np.zeros(n)
    Y = np.zeros((nsteps + 1, C.shape[0]))
    for q in range(nsteps):
        u = U[q + 1]
        rhs = ME @ x + dt * (np.tensordot(u, MN, axes=(0, 0)) @ x + MB @ u)
        if has_delay:
            i0 = q + 1 - lag_int
            xd = np.zeros(n)
            if i0 >= 0:
                xd += (1.0 - lag_frac) * H[i0 % L]
            if i0 - 1 >= 0 and lag_frac != 0.0:
                xd += lag_frac * H[(i0 - 1) % L]
            rhs += dt * (MAd @ xd)
        x = rhs
        H[(q + 1) % L] = x
        Y[q + 1] = C @ x
    return Y


def imex_numba(ME, MN, MB, MAd, C, U, dt, lag_int=0, lag_frac=0.0):
    f = lambda a: np.ascontiguousarray(a, dtype=np.float64)  # noqa: E731
    Y = np.zeros((U.shape[0], C.shape[0]))
    return _imex_loop_jit(f(ME), f(MN), f(MB), f(MAd), f(C), f(U), float(dt),
                          int(lag_int), float(lag_frac), Y)


def imex_dense(ME, MN, MB, MAd, C, U, dt, lag_int=0, lag_frac=0.0):
    """Dispatch to :func:`imex_numba` or :func:`imex_numpy`."""
    if use_numba():
        return imex_numba(ME, MN, MB, MAd, C, U, dt, lag_int, lag_frac)
    return imex_numpy(ME, MN, MB, MAd, C, U, dt, lag_int, lag_frac)
