"""Evaluation of structured multivariate transfer functions.

All evaluators are built on one forward chain.  Level ``j`` of the chain
solves ``Y_j = K(s_j)^{-1} Z_j`` with ``Z_1 = B(s_1) S`` for a seed matrix
``S`` and ``Z_{j+1} = Mix(s_j) Y_j``.  Three choices of ``Mix`` give the
three families of transfer functions:

``kron``
    ``[N_1(s) Y, ..., N_m(s) Y]``, the regular functions ``G_k``.  Column
    blocks are ordered so that the index of the bilinear factor nearest to
    ``B`` varies fastest.
``scaled``
    ``(sum_i d_i N_i(s)) Y``, the modified functions with scaling vectors.

The blockwise evaluation ``G_k (I ⊗ b)`` is the ``kron`` chain seeded
with ``S = b``.  Partial derivatives in the frequency variables are
propagated through the chain with the resolvent recurrence

.. math::

    Y^{(i)} = K^{-1}\\Big(Z^{(i)} - \\sum_{l=1}^{i} \\binom{i}{l} K^{(l)} Y^{(i-l)}\\Big)

and the Leibniz rule for the left factors, so ``K(s)^{-1}`` is never formed.
"""

from __future__ import annotations

import warnings
from collections import OrderedDict
from math import comb

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SingularPointError",
    "Resolvent",
    "MAX_DERIVATIVE_ORDER",
    "eval_regular",
    "eval_regular_derivative",
    "eval_scaled_N",
    "eval_modified",
    "eval_modified_derivative",
    "eval_modified_scaling_gradient",
    "eval_blockwise",
    "eval_blockwise_derivative",
    "right_chain",
    "left_chain",
]

MAX_DERIVATIVE_ORDER = 8
_SINGULAR_RTOL = 1e-14


class SingularPointError(np.linalg.LinAlgError):
    """``K(s)`` is numerically singular at a requested point."""

    def __init__(self, point):
        self.point = complex(point)
        super().__init__(f"K(s) is singular at s = {_fmt(self.point)}")


def _fmt(s: complex) -> str:
    return f"{s.real:.6g}{s.imag:+.6g}j"


class Resolvent:
    """LU factorizations of ``K(s)`` cached per distinct point.

    Also caches derivatives ``K^{(l)}(s)``.  Both caches keep the ``maxsize``
    most recently used entries, which bounds memory for large ``n``.  One
    instance is meant to live for the duration of a single evaluation or
    verification call.
    """

    def __init__(self, sys, maxsize: int = 8):
        self.sys = sys
        self.maxsize = maxsize
        self._lu = OrderedDict()
        self._kder = OrderedDict()

    def _get(self, cache, key):
        val = cache.get(key)
        if val is not None:
            cache.move_to_end(key)
        return val

    def _put(self, cache, key, val):
        cache[key] = val
        while len(cache) > self.maxsize:
            cache.popitem(last=False)

    def K(self, s, order: int = 0) -> np.ndarray:
        key = (complex(s), order)
        out = self._get(self._kder, key)
        if out is None:
            out = self.sys.K.derivative(complex(s), order)
            self._put(self._kder, key, out)
        return out

    def lu(self, s):
        s = complex(s)
        fac = self._get(self._lu, s)
        if fac is None:
            Ks = self.K(s)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                try:
                    fac = sla.lu_factor(Ks, check_finite=True)
                except ValueError as exc:
                    raise SingularPointError(s) from exc
            d = np.abs(np.diag(fac[0]))
            if d.size and (d.min() <= _SINGULAR_RTOL * d.max() or not np.isfinite(d).all()):
                raise SingularPointError(s)
            self._put(self._lu, s, fac)
        return fac

    def solve(self, s, rhs) -> np.ndarray:
        """``K(s)^{-1} rhs``."""
        return sla.lu_solve(self.lu(s), np.asarray(rhs, dtype=complex), check_finite=False)

    def solve_rows(self, s, rhs) -> np.ndarray:
        """``rhs K(s)^{-1}`` for a row block ``rhs``."""
        rhs = np.asarray(rhs, dtype=complex)
        return sla.lu_solve(self.lu(s), rhs.T, trans=1, check_finite=False).T

    def rcond(self, s) -> float:
        """Reciprocal 1-norm condition number estimate of ``K(s)``."""
        lu, _ = self.lu(s)
        anorm = np.linalg.norm(self.K(s), 1)
        gecon = sla.get_lapack_funcs("gecon", (lu,))
        rc, info = gecon(lu, anorm, norm="1")
        return float(rc)


# ---------------------------------------------------------------------------
# generic chains

def _mix(sys, kind, s, order, Y, d=None):
    if kind == "scaled":
        return sys.scaled_N(s, d, order) @ Y
    return np.hstack([Nj.derivative(s, order) @ Y for Nj in sys.N])


def _resolvent_derivs(res, s, Z, order):
    """``[Y^{(0)}, ..., Y^{(order)}]`` for ``Y(s) = K(s)^{-1} Z(s)``.

    ``Z`` is a list of the derivatives ``Z^{(i)}``; missing entries are zero.
    """
    Ys = []
    for i in range(order + 1):
        rhs = Z[i].copy() if i < len(Z) else np.zeros_like(Z[0])
        for l in range(1, i + 1):
            Kl = res.K(s, l)
            if np.any(Kl):
                rhs -= comb(i, l) * (Kl @ Ys[i - l])
        Ys.append(res.solve(s, rhs))
    return Ys


def _resolvent_derivs_rows(res, s, Z, order):
    """Row analogue: derivatives of ``Y(s) = Z(s) K(s)^{-1}``."""
    Ys = []
    for i in range(order + 1):
        rhs = Z[i].copy() if i < len(Z) else np.zeros_like(Z[0])
        for l in range(1, i + 1):
            Kl = res.K(s, l)
            if np.any(Kl):
                rhs -= comb(i, l) * (Ys[i - l] @ Kl)
        Ys.append(res.solve_rows(s, rhs))
    return Ys


def right_chain(sys, points, seed, kind="scaled", scalings=None, orders=None,
                resolvent=None, output=True):
    """Run the forward chain and return per-level derivatives.

    Parameters
    ----------
    sys
        The structured bilinear system.
    points
        Frequencies ``s_1, ..., s_k``.
    seed
        ``m x w`` matrix (or length-``m`` vector) multiplying ``B(s_1)``.
    kind
        ``"scaled"`` or ``"kron"``.
    scalings
        ``k-1`` scaling vectors (``kind="scaled"`` only).
    orders
        Derivative orders ``l_1, ..., l_k`` (default all zero).
    resolvent
        Optional shared :class:`Resolvent`.
    output
        If true, also apply ``C(s_k)`` and return the transfer value.

    Returns
    -------
    levels
        ``levels[j][i]`` is the ``i``-th derivative in ``s_{j+1}`` of the
        level-``j+1`` state, with lower levels differentiated to their full
        order.
    value
        ``C``-applied derivative of the final level (``None`` if
        ``output`` is false).
    """
    k = len(points)
    if k < 1:
        raise ValueError("at least one frequency point is required")
    orders = [0] * k if orders is None else [int(o) for o in orders]
    if len(orders) != k or min(orders) < 0:
        raise ValueError("orders must be k nonnegative integers")
    if kind == "scaled":
        scalings = [] if scalings is None else list(scalings)
        if len(scalings) != k - 1:
            raise ValueError(f"expected {k - 1} scaling vectors, got {len(scalings)}")
    elif kind != "kron":
        raise ValueError(f"unknown chain kind {kind!r}")
    res = Resolvent(sys) if resolvent is None else resolvent
    seed = np.asarray(seed, dtype=complex)
    if seed.ndim == 1:
        seed = seed.reshape(-1, 1)
    if seed.shape[0] != sys.m:
        raise ValueError(f"seed must have {sys.m} rows")
    s1 = points[0]
    Z = [sys.B.derivative(s1, i) @ seed for i in range(orders[0] + 1)]
    levels = []
    for j in range(k):
        s = points[j]
        Ys = _resolvent_derivs(res, s, Z, orders[j])
        levels.append(Ys)
        if j + 1 < k:
            lj = orders[j]
            d = scalings[j] if kind == "scaled" else None
            U = sum(comb(lj, l) * _mix(sys, kind, s, l, Ys[lj - l], d) for l in range(lj + 1))
            Z = [U]
    value = None
    if output:
        sk, lk = points[-1], orders[-1]
        Ys = levels[-1]
        value = sum(comb(lk, l) * (sys.C.derivative(sk, l) @ Ys[lk - l]) for l in range(lk + 1))
    return levels, value


def left_chain(sys, points, seed, kind="scaled", scalings=None, orders=None,
               resolvent=None, output=False):
    """Row chain for left (test-space) directions.

    The chain starts at ``s_k`` from ``seed C(s_k)`` with ``seed`` a
    ``w x p`` matrix (or length-``p`` vector ``c``, used as ``c^H``) and
    moves towards ``s_1``.  Level ``i`` (``i = 1..k``) lives at
    ``s_{k-i+1}`` and multiplies the previous row block by
    ``Mix(s_{k-i+1})`` with scaling ``scalings[k-i]``.

    Returns ``(levels, value)`` where ``levels[i-1][q]`` is the ``q``-th
    derivative of level ``i`` in its own variable and ``value`` (when
    ``output``) is the row block times ``B(s_1)``.
    """
    k = len(points)
    if k < 1:
        raise ValueError("at least one frequency point is required")
    orders = [0] * k if orders is None else [int(o) for o in orders]
    if len(orders) != k or min(orders) < 0:
        raise ValueError("orders must be k nonnegative integers")
    if kind == "scaled":
        scalings = [] if scalings is None else list(scalings)
        if len(scalings) != k - 1:
            raise ValueError(f"expected {k - 1} scaling vectors, got {len(scalings)}")
    elif kind != "kron":
        raise ValueError(f"unknown chain kind {kind!r}")
    res = Resolvent(sys) if resolvent is None else resolvent
    seed = np.asarray(seed, dtype=complex)
    if seed.ndim == 1:
        seed = seed.conj().reshape(1, -1)
    if seed.shape[1] != sys.p:
        raise ValueError(f"seed must have {sys.p} columns")
    levels = []
    R = None
    for i in range(1, k + 1):
        idx = k - i  # zero-based index of s_{k-i+1}
        s, o = points[idx], orders[idx]
        if i == 1:
            Z = [seed @ sys.C.derivative(s, q) for q in range(o + 1)]
        elif kind == "scaled":
            d = scalings[idx]
            Z = [R @ sys.scaled_N(s, d, q) for q in range(o + 1)]
        else:
            Z = [np.vstack([R @ Nj.derivative(s, q) for Nj in sys.N]) for q in range(o + 1)]
        Ys = _resolvent_derivs_rows(res, s, Z, o)
        levels.append(Ys)
        R = Ys[o]
    value = None
    if output:
        s1, o1 = points[0], orders[0]
        Ys = levels[-1]
        value = sum(comb(o1, l) * (Ys[o1 - l] @ sys.B.derivative(s1, l)) for l in range(o1 + 1))
    return levels, value


# ---------------------------------------------------------------------------
# public evaluators

def _check_orders(orders, k):
    orders = [int(o) for o in orders]
    if len(orders) != k:
        raise ValueError(f"expected {k} derivative orders, got {len(orders)}")
    if min(orders) < 0:
        raise ValueError("derivative orders must be nonnegative")
    if sum(orders) > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"total derivative order {sum(orders)} exceeds {MAX_DERIVATIVE_ORDER}")
    return orders


def _as_points(freqs):
    pts = [complex(s) for s in np.atleast_1d(freqs)]
    if not pts:
        raise ValueError("at least one frequency point is required")
    return pts


def eval_regular(sys, freqs, resolvent=None) -> np.ndarray:
    """Regular subsystem transfer function ``G_k(s_1, ..., s_k)``.

    Returns a ``p x m**k`` matrix.  Column ``i_{k-1} m^{k-1} + ... + i_1 m
    + i_0`` (zero-based) belongs to input ``i_0`` and bilinear factors
    ``N_{i_1}`` (nearest to ``B``) through ``N_{i_{k-1}}``.

    >>> from bilintang.structures import first_order
    >>> sys = first_order(None, [[-1.0]], [[[1.0]]], [[1.0]], [[1.0]])
    >>> eval_regular(sys, [0.0, 0.0]).real
    array([[1.]])
    """
    return eval_regular_derivative(sys, freqs, None, resolvent)


def eval_regular_derivative(sys, freqs, orders=None, resolvent=None) -> np.ndarray:
    pts = _as_points(freqs)
    orders = _check_orders(orders if orders is not None else [0] * len(pts), len(pts))
    _, G = right_chain(sys, pts, np.eye(sys.m), "kron", None, orders, resolvent)
    return G


def eval_scaled_N(sys, s, d, order: int = 0) -> np.ndarray:
    """``sum_i d_i N_i(s)`` (or its ``order``-th derivative)."""
    return sys.scaled_N(complex(s), d, order)


def _as_scalings(sys, scalings, k):
    scalings = [] if scalings is None else [np.asarray(d, dtype=complex).reshape(-1) for d in scalings]
    if len(scalings) != k - 1:
        raise ValueError(f"expected {k - 1} scaling vectors, got {len(scalings)}")
    for d in scalings:
        if d.shape != (sys.m,):
            raise ValueError(f"scaling vectors must have length m = {sys.m}")
    return scalings


def eval_modified(sys, freqs, scalings=None, resolvent=None) -> np.ndarray:
    """Modified transfer function ``G~_k(s_1, ..., s_k; d^(1), ..., d^(k-1))``.

    Returns a ``p x m`` matrix.  The scaling ``d^(j)`` weights the bilinear
    terms evaluated at ``s_j``.
    """
    return eval_modified_derivative(sys, freqs, scalings, None, resolvent)


def eval_modified_derivative(sys, freqs, scalings=None, orders=None, resolvent=None) -> np.ndarray:
    """Partial derivative ``d^{j_1}/ds_1 ... d^{j_k}/ds_k`` of :func:`eval_modified`."""
    pts = _as_points(freqs)
    k = len(pts)
    orders = _check_orders(orders if orders is not None else [0] * k, k)
    scalings = _as_scalings(sys, scalings, k)
    _, G = right_chain(sys, pts, np.eye(sys.m), "scaled", scalings, orders, resolvent)
    return G


def eval_modified_scaling_gradient(sys, freqs, scalings, which, orders=None,
                                   resolvent=None) -> np.ndarray:
    """Derivative of the modified transfer function w.r.t. ``d^(j)_i``.

    ``which = (j, i)`` is one-based.  Because the function is linear in each
    scaling vector, the result is the modified function with ``d^(j)``
    replaced by the unit vector ``e_i``.  ``orders`` optionally requests the
    mixed derivative with the frequency variables as well.
    """
    pts = _as_points(freqs)
    k = len(pts)
    scalings = _as_scalings(sys, scalings, k)
    j, i = (int(x) for x in which)
    if not 1 <= j <= k - 1:
        raise IndexError(f"scaling index j = {j} outside 1..{k - 1}")
    if not 1 <= i <= sys.m:
        raise IndexError(f"component index i = {i} outside 1..{sys.m}")
    e = np.zeros(sys.m, dtype=complex)
    e[i - 1] = 1.0
    scalings[j - 1] = e
    return eval_modified_derivative(sys, pts, scalings, orders, resolvent)


def eval_blockwise(sys, freqs, b, resolvent=None) -> np.ndarray:
    """Blockwise evaluation ``G_k(s_1, ..., s_k) (I_{m^{k-1}} ⊗ b)``, ``p x m^{k-1}``."""
    return eval_blockwise_derivative(sys, freqs, b, None, resolvent)


def eval_blockwise_derivative(sys, freqs, b, orders=None, resolvent=None) -> np.ndarray:
    pts = _as_points(freqs)
    orders = _check_orders(orders if orders is not None else [0] * len(pts), len(pts))
    b = np.asarray(b, dtype=complex).reshape(-1)
    if b.shape != (sys.m,):
        raise ValueError(f"direction b must have length m = {sys.m}")
    _, G = right_chain(sys, pts, b, "kron", None, orders, resolvent)
    return G
