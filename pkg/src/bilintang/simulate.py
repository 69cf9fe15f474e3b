"""Time-domain simulation of structured bilinear systems.

All templates are integrated with the IMEX Euler scheme

.. math::

    (E - \\Delta t A) x_{q+1} = E x_q + \\Delta t \\Big(A_d x(t_{q+1} - \\tau)
        + \\sum_j N_j x_q u_j(t_{q+1}) + B u(t_{q+1})\\Big),

with ``x_0 = 0``: the linear part is implicit, the bilinear part explicit.
Second-order systems are integrated in companion form ``[q; q']``; delayed
states come from a history buffer with linear interpolation and zero
history on ``[-tau, 0]``.

Large systems use a sparse LU factorization and a Python step loop; small
dense (typically reduced) systems use the compiled kernel in
:mod:`bilintang._kernels`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import ceil

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels

__all__ = [
    "SimulationError",
    "InputSignal",
    "Trajectory",
    "SIGNALS",
    "named_signal",
    "linear_parts",
    "simulate",
    "simulate_first_order",
    "simulate_second_order",
    "simulate_delay",
]

DENSE_LIMIT = 400


class SimulationError(ValueError):
    """The system or step size cannot be simulated."""


@dataclass(frozen=True)
class InputSignal:
    """Input ``u(t)`` returning a length-``m`` real vector."""

    fn: object
    m: int
    description: str = ""

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.fn(t), dtype=float).reshape(self.m)

    def sample(self, times) -> np.ndarray:
        return np.array([self(t) for t in times]).reshape(len(times), self.m)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Outputs ``y(t_q)`` on a uniform grid starting at 0."""

    times: np.ndarray
    outputs: np.ndarray
    states: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.outputs, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing and start at 0")
        if y.shape[0] != t.size:
            raise ValueError("outputs must have one row per time")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "outputs", y)


def _const(values, desc):
    v = np.asarray(values, dtype=float)
    return InputSignal(lambda t: v, v.size, desc)


def _msd_paper(t):
    return [np.sin(200 * t) + 200, -np.cos(200 * t) - 200]


def _rod_paper(t):
    return [0.05 * (np.cos(10 * t) + np.cos(5 * t)), 0.05 * (np.sin(10 * t) + np.sin(5 * t)),
            0.01, 0.01, 0.01]


SIGNALS = ("zero", "step", "msd_paper", "rod_paper")


def named_signal(name: str, m: int) -> InputSignal:
    """Built-in input signals.

    ``zero`` and ``step`` (all inputs 1) work for any ``m``;
    ``msd_paper`` needs ``m = 2`` and ``rod_paper`` needs ``m = 5``.
    """
    if name == "zero":
        return _const(np.zeros(m), "zero")
    if name == "step":
        return _const(np.ones(m), "unit step")
    if name == "msd_paper":
        if m != 2:
            raise ValueError("signal 'msd_paper' needs m = 2")
        return InputSignal(_msd_paper, 2, "[sin(200t)+200; -cos(200t)-200]")
    if name == "rod_paper":
        if m != 5:
            raise ValueError("signal 'rod_paper' needs m = 5")
        return InputSignal(_rod_paper, 5, "[0.05(cos10t+cos5t); 0.05(sin10t+sin5t); 0.01; 0.01; 0.01]")
    raise ValueError(f"unknown signal {name!r}; choose from {SIGNALS}")


# ---------------------------------------------------------------------------
# extraction of state-space matrices from matrix functions

def _split(fn):
    """Sum coefficient matrices by scalar basis: ``{0: X0, 1: X1, 2: X2, 'tau': (tau, Xd)}``."""
    parts = {}
    for t in fn.terms:
        b = t.basis
        key = b.degree if b.kind == "monomial" else ("delay", b.tau)
        parts[key] = parts.get(key, 0) + t.weight * np.asarray(t.matrix)
    out = {}
    for key, mat in parts.items():
        if np.any(mat):
            out[key] = mat
    return out


def _real(mat, name):
    mat = np.asarray(mat)
    if np.iscomplexobj(mat):
        if np.any(np.abs(mat.imag) > 1e-12 * max(1.0, np.abs(mat).max())):
            raise SimulationError(f"{name} is complex; only real systems can be simulated")
        mat = mat.real
    return np.asarray(mat, dtype=float)


def linear_parts(sys):
    """First-order matrices ``(E, A, Ad, tau, N, B, C)`` of a system.

    Second-order systems are returned in companion form.  ``Ad`` is
    ``None`` without delay.
    """
    n, m, p = sys.dims
    K = _split(sys.K)
    Cp = _split(sys.C)
    Bp = _split(sys.B)
    Np = [_split(Nj) for Nj in sys.N]
    if any(key != 0 for key in Bp):
        raise SimulationError("B(s) must be constant for simulation")
    B = _real(Bp.get(0, np.zeros((n, m))), "B")
    delays = [key for key in K if isinstance(key, tuple)]
    if len(delays) > 1:
        raise SimulationError("at most one delay can be simulated")
    zero = np.zeros((n, n))
    if 2 in K:
        if delays:
            raise SimulationError("delayed second-order systems are not supported")
        M, D, K0 = (_real(K.get(i, zero), "K") for i in (2, 1, 0))
        I, Z = np.eye(n), np.zeros((n, n))
        E = np.block([[I, Z], [Z, M]])
        A = np.block([[Z, I], [-K0, -D]])
        N = [_real(np.block([[Z, Z], [Nj.get(0, zero), Nj.get(1, zero)]]), f"N{j}")
             for j, Nj in enumerate(Np, 1)]
        B = np.vstack([np.zeros((n, m)), B])
        C = _real(np.hstack([Cp.get(0, np.zeros((p, n))), Cp.get(1, np.zeros((p, n)))]), "C")
        return E, A, None, None, N, B, C
    if any(key not in (0,) for Nj in Np for key in Nj) or any(key != 0 for key in Cp):
        raise SimulationError("first-order systems need constant C and N_j")
    E = _real(K.get(1, zero), "E")
    A = -_real(K.get(0, zero), "A")
    N = [_real(Nj.get(0, zero), f"N{j}") for j, Nj in enumerate(Np, 1)]
    C = _real(Cp.get(0, np.zeros((p, n))), "C")
    if delays:
        tau = delays[0][1]
        return E, A, -_real(K[delays[0]], "Ad"), tau, N, B, C
    return E, A, None, None, N, B, C


# ---------------------------------------------------------------------------
# integrators

def _grid(t_f, dt):
    if not dt > 0:
        raise SimulationError("dt must be positive")
    if not t_f > 0:
        raise SimulationError("t_f must be positive")
    nsteps = int(ceil(t_f / dt - 1e-9))
    return dt * np.arange(nsteps + 1)


def _integrate(E, A, Ad, tau, N, B, C, u, t_f, dt, keep_states=False, dense=None):
    lag_int, lag_frac = 0, 0.0
    if Ad is not None:
        steps = int(ceil(tau / dt - 1e-9))
        dt = tau / steps
        lag_int = steps
    times = _grid(t_f, dt)
    U = u.sample(times)
    if U.shape[1] != B.shape[1]:
        raise SimulationError(f"input has {U.shape[1]} components, system expects {B.shape[1]}")
    n = E.shape[0]
    dense = n <= DENSE_LIMIT if dense is None else dense
    Adm = np.zeros((n, n)) if Ad is None else Ad
    if dense and not keep_states:
        lhs = E - dt * A
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            fac = sla.lu_factor(lhs)
        d = np.abs(np.diag(fac[0]))
        if d.min() <= 1e-14 * d.max():
            raise SimulationError("E - dt*A is singular; try a smaller dt")
        solve = lambda X: sla.lu_solve(fac, X)  # noqa: E731
        ME = solve(E)
        MN = np.stack([solve(Nj) for Nj in N]) if N else np.zeros((0, n, n))
        MB = solve(B)
        MAd = solve(Adm)
        Y = _kernels.imex_dense(ME, MN, MB, MAd, C, U, dt, lag_int, lag_frac)
        return Trajectory(times, Y)
    # sparse path
    Es, As = sp.csc_matrix(E), sp.csc_matrix(A)
    Ns = [sp.csr_matrix(Nj) for Nj in N]
    Ads = sp.csr_matrix(Adm)
    try:
        lu = spla.splu(sp.csc_matrix(Es - dt * As))
    except RuntimeError as exc:
        raise SimulationError("E - dt*A is singular; try a smaller dt") from exc
    Es = Es.tocsr()
    L = lag_int + 2 if lag_int else 1
    H = np.zeros((L, n))
    x = np.zeros(n)
    Y = np.zeros((times.size, C.shape[0]))
    X = np.zeros((times.size, n)) if keep_states else None
    for q in range(times.size - 1):
        uq = U[q + 1]
        rhs = Es @ x + dt * (B @ uq)
        for j, Nj in enumerate(Ns):
            if uq[j] != 0:
                rhs += (dt * uq[j]) * (Nj @ x)
        if lag_int:
            i0 = q + 1 - lag_int
            if i0 >= 0:
                rhs += dt * (Ads @ H[i0 % L])
        x = lu.solve(rhs)
        H[(q + 1) % L] = x
        Y[q + 1] = C @ x
        if keep_states:
            X[q + 1] = x
    return Trajectory(times, Y, X)


def simulate_first_order(sys, u: InputSignal, t_f: float, dt: float, **kw) -> Trajectory:
    """Simulate ``E x' = A x + sum_j N_j x u_j + B u``, ``y = C x``."""
    E, A, Ad, tau, N, B, C = linear_parts(sys)
    if Ad is not None:
        raise SimulationError("system has a delay term; use simulate_delay")
    return _integrate(E, A, None, None, N, B, C, u, t_f, dt, **kw)


def simulate_second_order(sys, u: InputSignal, t_f: float, dt: float, **kw) -> Trajectory:
    """Simulate a second-order system in companion form; ``y = Cp q + Cv q'``."""
    if 2 not in _split(sys.K):
        raise SimulationError("system has no second-order term")
    E, A, Ad, tau, N, B, C = linear_parts(sys)
    return _integrate(E, A, None, None, N, B, C, u, t_f, dt, **kw)


def simulate_delay(sys, u: InputSignal, t_f: float, dt: float, **kw) -> Trajectory:
    """Simulate ``x' = A x + A_d x(t - tau) + ...``; ``dt`` is shrunk to divide ``tau``."""
    E, A, Ad, tau, N, B, C = linear_parts(sys)
    if Ad is None:
        raise SimulationError("system has no delay term")
    return _integrate(E, A, Ad, tau, N, B, C, u, t_f, dt, **kw)


def simulate(sys, u: InputSignal, t_f: float, dt: float, **kw) -> Trajectory:
    """Dispatch on the structure of ``K(s)``."""
    E, A, Ad, tau, N, B, C = linear_parts(sys)
    return _integrate(E, A, Ad, tau, N, B, C, u, t_f, dt, **kw)
