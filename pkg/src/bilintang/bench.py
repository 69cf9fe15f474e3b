"""Deterministic benchmark generators.

Three families mirror the experiments: a damped mass-spring chain with
bilinear springs (``msd``), a heated rod with delayed feedback
(``delay_rod``) and a small 2D heat equation with bilinear Robin boundary
control (``heat2d``).  Every generated system stores its generator
parameters in ``system.descriptor``.
"""

from __future__ import annotations

import numpy as np

from .structures import StructuredBilinearSystem, first_order, second_order, time_delay

__all__ = ["FAMILIES", "make_msd", "make_delay_rod", "make_heat2d", "make_family", "random_system"]

FAMILIES = ("msd", "delay_rod", "heat2d")


def _tridiag(n, lower, diag, upper):
    return np.diag(np.full(n - 1, lower), -1) + np.diag(np.full(n, diag)) + np.diag(np.full(n - 1, upper), 1)


def make_msd(n: int = 1000, k: float = 2.0, alpha: float = 0.02, beta: float = 0.1) -> StructuredBilinearSystem:
    """Damped mass-spring chain with two bilinear springs.

    ``M = I``, ``K = tridiag(-k, 2k, -k)``, Rayleigh damping
    ``D = alpha M + beta K``.  Inputs act on the first and last mass,
    outputs are the displacements of masses 2 and 5.

    >>> make_msd(10).dims
    (10, 2, 2)
    """
    if n < 6:
        raise ValueError(f"mass-spring chain needs n >= 6 (outputs read mass 5), got {n}")
    M = np.eye(n)
    K = _tridiag(n, -k, 2 * k, -k)
    D = alpha * M + beta * K
    Bu = np.zeros((n, 2))
    Bu[0, 0], Bu[-1, 1] = 1.0, -1.0
    Cp = np.zeros((2, n))
    Cp[0, 1], Cp[1, 4] = 1.0, 1.0
    S1 = np.diag(np.linspace(0.2, 0.0, n))
    S2 = np.diag(np.linspace(0.0, 0.2, n))
    Np = [-S1 @ K @ S1, S2 @ K @ S2]
    sys = second_order(M, D, K, Np, None, Bu, Cp)
    desc = {"family": "msd", "n": n, "m": 2, "p": 2, "seed": None,
            "parameters": {"k": k, "alpha": alpha, "beta": beta}}
    return StructuredBilinearSystem(sys.C, sys.K, sys.B, sys.N, sys.template_tag, None, desc)


def make_delay_rod(n: int = 1000, m: int = 5, p: int = 2, tau: float = 1.0) -> StructuredBilinearSystem:
    """Heated rod on ``(0, pi)`` cooled by delayed feedback.

    Centered differences with Dirichlet boundaries give
    ``A = Lap - 2 diag(sin z)`` and ``A_d = 2 diag(sin z)``.  Input ``k``
    heats the ``k``-th of ``m`` equal sections and couples bilinearly via
    ``N_k = -diag(section indicator)``; output ``i`` averages the state
    over the ``i``-th of ``p`` equal sections.
    """
    if n < 10:
        raise ValueError(f"rod needs n >= 10, got {n}")
    if n % m or n % p:
        raise ValueError(f"n = {n} must be divisible by m = {m} and p = {p}")
    h = np.pi / (n + 1)
    z = h * np.arange(1, n + 1)
    lap = _tridiag(n, 1.0, -2.0, 1.0) / h**2
    A = lap - 2.0 * np.diag(np.sin(z))
    Ad = 2.0 * np.diag(np.sin(z))
    B = np.zeros((n, m))
    N = []
    w = n // m
    for k in range(m):
        B[k * w:(k + 1) * w, k] = 1.0
        N.append(-np.diag(B[:, k]))
    C = np.zeros((p, n))
    w = n // p
    for i in range(p):
        C[i, i * w:(i + 1) * w] = 1.0 / w
    sys = time_delay(A, Ad, N, B, C, tau=tau)
    desc = {"family": "delay_rod", "n": n, "m": m, "p": p, "seed": None,
            "parameters": {"tau": tau, "bilinear": "-diag(section indicator)",
                           "output": "section average"}}
    return StructuredBilinearSystem(sys.C, sys.K, sys.B, sys.N, sys.template_tag, sys.tau, desc)


def _perimeter_faces(nx, ny):
    """Boundary faces of an ``nx x ny`` cell grid, counterclockwise.

    Each face is given by the linear index (row-major, ``iy * nx + ix``) of
    the cell it belongs to.
    """
    faces = [ix for ix in range(nx)]                                 # bottom
    faces += [iy * nx + nx - 1 for iy in range(ny)]                  # right
    faces += [(ny - 1) * nx + ix for ix in reversed(range(nx))]      # top
    faces += [iy * nx for iy in reversed(range(ny))]                 # left
    return faces


def make_heat2d(nx: int = 16, ny: int = 16, q=(1.0,) * 7) -> StructuredBilinearSystem:
    """Heat equation on the unit square with bilinear Robin boundary control.

    Finite volumes on an ``nx x ny`` cell grid.  The boundary is cut into 7
    contiguous segments.  On segment ``i <= 6`` the flux
    ``q_i u_i (1 - v)`` gives a ``B`` column and ``N_i = -q_i diag(w_i)``;
    on segment 7 the flux ``q_7 (u_7 - v)`` gives a ``B`` column and a
    damping term in ``A``.  ``w_i`` counts a cell's faces on segment ``i``
    divided by the cell width.  Six interior probes form the output.
    """
    if nx < 4 or ny < 4:
        raise ValueError(f"grid too small to host 7 boundary segments: {nx} x {ny}")
    q = tuple(float(x) for x in q)
    if len(q) != 7:
        raise ValueError("q needs 7 entries")
    n = nx * ny
    hx, hy = 1.0 / nx, 1.0 / ny
    A = np.zeros((n, n))
    for iy in range(ny):
        for ix in range(nx):
            i = iy * nx + ix
            for jx, jy, h in ((ix - 1, iy, hx), (ix + 1, iy, hx), (ix, iy - 1, hy), (ix, iy + 1, hy)):
                if 0 <= jx < nx and 0 <= jy < ny:
                    A[i, i] -= 1.0 / h**2
                    A[i, jy * nx + jx] += 1.0 / h**2
    faces = _perimeter_faces(nx, ny)
    nf = len(faces)
    bounds = np.linspace(0, nf, 8).round().astype(int)
    weights = np.zeros((7, n))
    for s in range(7):
        for f in range(bounds[s], bounds[s + 1]):
            cell = faces[f]
            # bottom/top faces have length hx over cell area hx*hy
            on_horizontal = f < nx or nx + ny <= f < 2 * nx + ny
            weights[s, cell] += 1.0 / (hy if on_horizontal else hx)
    B = (np.array(q)[:, None] * weights).T
    N = [-q[s] * np.diag(weights[s]) for s in range(6)]
    N.append(np.zeros((n, n)))
    A -= q[6] * np.diag(weights[6])
    probes = [(0.25, 0.25), (0.5, 0.25), (0.75, 0.25), (0.25, 0.75), (0.5, 0.75), (0.75, 0.75)]
    C = np.zeros((6, n))
    for r, (px, py) in enumerate(probes):
        C[r, int(py * ny) * nx + int(px * nx)] = 1.0
    sys = first_order(None, A, N, B, C)
    desc = {"family": "heat2d", "n": n, "m": 7, "p": 6, "seed": None,
            "parameters": {"nx": nx, "ny": ny, "q": list(q)}}
    return StructuredBilinearSystem(sys.C, sys.K, sys.B, sys.N, sys.template_tag, None, desc)


def make_family(family: str, n: int | None = None, m: int | None = None, p: int | None = None,
                **params) -> StructuredBilinearSystem:
    """Dispatch on a family name; unknown names raise ``ValueError``."""
    if family == "msd":
        return make_msd(1000 if n is None else n, **params)
    if family == "delay_rod":
        return make_delay_rod(1000 if n is None else n, 5 if m is None else m, 2 if p is None else p, **params)
    if family == "heat2d":
        side = params.pop("nx", None) or (int(round(np.sqrt(n))) if n else 16)
        return make_heat2d(side, params.pop("ny", side), **params)
    raise ValueError(f"unknown family {family!r}; valid families: {', '.join(FAMILIES)}")


def random_system(n: int, m: int, p: int, template: str = "first_order", seed: int = 0,
                  complex_valued: bool = False) -> StructuredBilinearSystem:
    """Well-conditioned random system for tests and soundness checks.

    Linear parts are shifted to be comfortably stable so that ``K(s)`` is
    invertible near the imaginary axis; bilinear terms are scaled to
    ``O(1)``.
    """
    rng = np.random.default_rng(seed)

    def g(*shape):
        x = rng.standard_normal(shape)
        if complex_valued:
            x = x + 1j * rng.standard_normal(shape)
        return x

    scale = 1.0 / np.sqrt(n)
    Nl = [0.5 * scale * g(n, n) for _ in range(m)]
    B, C = g(n, m), g(p, n)
    if template == "first_order":
        A = -2.0 * np.eye(n) + 0.5 * scale * g(n, n)
        E = np.eye(n) + 0.1 * scale * g(n, n)
        return first_order(E, A, Nl, B, C)
    if template == "second_order":
        R = g(n, n) * scale
        M = np.eye(n) + 0.1 * (R @ R.conj().T)
        R = g(n, n) * scale
        K = np.eye(n) + R @ R.conj().T
        D = 0.5 * M + 0.2 * K
        Nv = [0.2 * scale * g(n, n) for _ in range(m)]
        return second_order(M, D, K, Nl, Nv, B, C[:, :], 0.3 * g(p, n))
    if template == "time_delay":
        A = -3.0 * np.eye(n) + 0.5 * scale * g(n, n)
        Ad = 0.5 * scale * g(n, n)
        return time_delay(A, Ad, Nl, B, C, tau=1.0)
    raise ValueError(f"unknown template {template!r}")
