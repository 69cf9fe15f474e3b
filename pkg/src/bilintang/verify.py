"""Numerical certification of interpolation conditions and error metrics.

For every point set of an :class:`~bilintang.subspaces.InterpolationSpec`
the checkers evaluate each condition that the construction guarantees,
on the full and on the reduced system, and report the residual.

Condition families (per point set):

``right``
    levels ``j = 1..k``, orders ``(l_1, ..., l_{j-1}, i)`` with
    ``i = 0..l_j``, evaluated along ``b`` (modified, blockwise) or as full
    matrices (matrix interpolation).
``left``
    levels ``h = 1..kappa`` at ``varsigma_{kappa-h+1}, ..., varsigma_kappa``,
    orders ``(i, nu_{kappa-h+2}, ..., nu_kappa)``, multiplied by ``c^H``.
``mixed``
    two-sided only; level ``q + h`` at ``sigma_1..sigma_q`` followed by
    ``varsigma_{kappa-h+1}..varsigma_kappa``.  The modified framework
    inserts an arbitrary middle scaling ``z``; three seeded random ``z``
    are tested.
``gradient``
    two-sided with identical point sets; derivatives of ``c^H G b`` with
    respect to every frequency and (modified only) every scaling entry.

A condition is only reported as pass/fail when the directions it relies on
survived truncation; otherwise its status is ``"skipped"``.  When
``K^(s)`` is too ill-conditioned for a meaningful comparison the status is
``"ill-conditioned"``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla

from .subspaces import effective_scalings
from .transfer import MAX_DERIVATIVE_ORDER, Resolvent, SingularPointError, right_chain

__all__ = [
    "ConditionReport",
    "DEFAULT_TOL",
    "COND_LIMIT",
    "check_tangential",
    "check_hermite",
    "check_blockwise",
    "check_conditions",
    "summarize",
    "reports_to_json",
    "reports_table",
    "error_metrics",
    "GridErrors",
    "grid_errors",
]

DEFAULT_TOL = 1e-8
COND_LIMIT = 1e12
N_RANDOM_Z = 3
_FLOOR = 1e-300


@dataclass
class ConditionReport:
    """Outcome of one interpolation condition.

    ``status`` is ``"pass"``, ``"fail"``, ``"ill-conditioned"`` or
    ``"skipped"``; ``passed`` is true only for ``"pass"``.
    """

    id: str
    family: str
    kind: str
    set: int
    level: int
    orders: list
    lhs_norm: float
    abs_residual: float
    rel_residual: float
    tol: float
    status: str
    cond: float = float("nan")

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _family(framework: str) -> str:
    return {"MtxInt": "matrix", "BwtInt": "blockwise"}.get(framework, "modified")


class _Evaluator:
    """Evaluate one transfer quantity on the full and the reduced system."""

    def __init__(self, sys, rom_sys):
        self.sys, self.rom = sys, rom_sys
        self.res_full = Resolvent(sys)
        self.res_rom = Resolvent(rom_sys)
        self._cond = {}

    def cond(self, points) -> float:
        worst = 1.0
        for s in points:
            s = complex(s)
            if s not in self._cond:
                try:
                    rc = self.res_rom.rcond(s)
                    self._cond[s] = np.inf if rc == 0 else 1.0 / rc
                except SingularPointError:
                    self._cond[s] = np.inf
            worst = max(worst, self._cond[s])
        return worst

    def both(self, points, kind, seed, scalings, orders, left=None):
        out = []
        for sys, res in ((self.sys, self.res_full), (self.rom, self.res_rom)):
            _, G = right_chain(sys, list(points), seed, kind, scalings, orders, res)
            if left is not None:
                G = np.asarray(left).conj().reshape(1, -1) @ G
            out.append(G)
        return out


def _needed(bases, set_index, right=None, left=None):
    """Whether the directions a condition relies on survived truncation.

    ``right=(level, order)`` requires right records of lower levels and of
    ``level`` up to ``order``; ``left`` likewise for the left chain.
    ``"all"`` requires every record of that side.
    """
    if bases is None:
        return True
    for side, bound in (("right", right), ("left", left)):
        if bound is None:
            continue
        for r in bases.records(side, set_index):
            if bound == "all":
                ok = r.in_span
            else:
                lvl, order = bound
                relevant = r.level < lvl or (r.level == lvl and (
                    r.orders[-1] <= order if side == "right" else r.orders[0] <= order))
                ok = r.in_span or not relevant
            if not ok:
                return False
    return True


def _report(cid, family, kind, si, level, orders, vals, tol, cond, available):
    G, Gr = vals
    lhs = float(np.linalg.norm(G))
    err = float(np.linalg.norm(G - Gr))
    rel = err / max(lhs, _FLOOR)
    if not available:
        status = "skipped"
    elif cond > COND_LIMIT:
        status = "ill-conditioned"
    else:
        status = "pass" if rel <= tol else "fail"
    return ConditionReport(cid, family, kind, si, level, [int(o) for o in orders], lhs, err, rel,
                           tol, status, float(cond))


def _z_vectors(m, seed, si, q, h):
    rng = np.random.default_rng([seed, si, q, h])
    return [rng.standard_normal(m) + 1j * rng.standard_normal(m) for _ in range(N_RANDOM_Z)]


def check_conditions(sys, rom, spec, tol: float = DEFAULT_TOL, seed: int = 0,
                     include_gradient: bool = True, extra_z=()):
    """All conditions guaranteed by the construction of ``spec``.

    Parameters
    ----------
    sys
        Full system.
    rom
        :class:`~bilintang.rom.ReducedModel` (or a reduced system, in which
        case every direction is assumed to be in span).
    spec
        The interpolation spec used for the reduction.
    tol
        Relative residual tolerance.
    seed
        Seed for the random middle scalings ``z`` of mixed conditions.
    extra_z
        Additional fixed ``z`` vectors tested after the random ones.

    Returns
    -------
    list of ConditionReport
        Ordered by point set, then condition family.
    """
    rom_sys = getattr(rom, "system", rom)
    bases = getattr(rom, "bases", None)
    ev = _Evaluator(sys, rom_sys)
    fw = spec.framework
    family = _family(fw)
    m = sys.m
    reports = []
    right_ok = spec.side in ("both", "right")
    left_ok = spec.side in ("both", "left")
    two_sided = spec.side == "both"
    for si, ps in enumerate(spec.point_sets):
        d, delta = effective_scalings(ps, fw, m)
        sig, vs = list(ps.sigma), list(ps.varsigma)
        k, kap = ps.k, ps.kappa
        ell, nu = list(ps.ell), list(ps.nu)
        b = ps.b
        seed_r = np.eye(m) if fw == "MtxInt" else b
        kind = "scaled" if family == "modified" else "kron"
        tag = f"{family}/set{si}"
        if right_ok:
            for j in range(1, k + 1):
                for i in range(ell[j - 1] + 1):
                    orders = ell[: j - 1] + [i]
                    pts = sig[:j]
                    sc = list(d[: j - 1]) if kind == "scaled" else None
                    vals = ev.both(pts, kind, seed_r, sc, orders)
                    reports.append(_report(f"{tag}/right/L{j}/o{orders}", family, "right", si, j,
                                           orders, vals, tol, ev.cond(pts),
                                           _needed(bases, si, right=(j, i))))
        if left_ok:
            for h in range(1, kap + 1):
                first = kap - h  # zero-based index of varsigma_{kappa-h+1}
                for i in range(nu[first] + 1):
                    orders = [i] + nu[first + 1:]
                    pts = vs[first:]
                    sc = list(delta[first:]) if kind == "scaled" else None
                    if fw == "MtxInt":
                        vals = ev.both(pts, "kron", np.eye(m), None, orders)
                    else:
                        vals = ev.both(pts, kind, np.eye(m), sc, orders, left=ps.c)
                    reports.append(_report(f"{tag}/left/L{h}/o{orders}", family, "left", si, h,
                                           orders, vals, tol, ev.cond(pts),
                                           _needed(bases, si, left=(h, i))))
        if two_sided:
            for q in range(1, k + 1):
                for h in range(1, kap + 1):
                    first = kap - h
                    pts = sig[:q] + vs[first:]
                    zs = ([*_z_vectors(m, seed, si, q, h), *extra_z] if kind == "scaled"
                          else [None])
                    for jq in range(ell[q - 1] + 1):
                        for i in range(nu[first] + 1):
                            orders = ell[: q - 1] + [jq, i] + nu[first + 1:]
                            if sum(orders) > MAX_DERIVATIVE_ORDER:
                                continue
                            avail = _needed(bases, si, right=(q, jq), left=(h, i))
                            for zi, z in enumerate(zs):
                                if kind == "scaled":
                                    sc = list(d[: q - 1]) + [z] + list(delta[first:])
                                    vals = ev.both(pts, "scaled", b, sc, orders, left=ps.c)
                                elif fw == "BwtInt":
                                    vals = ev.both(pts, "kron", b, None, orders, left=ps.c)
                                else:
                                    vals = ev.both(pts, "kron", np.eye(m), None, orders)
                                zlabel = f"/z{zi}" if z is not None else ""
                                reports.append(_report(
                                    f"{tag}/mixed/q{q}h{h}/o{orders}{zlabel}", family, "mixed", si,
                                    q + h, orders, vals, tol, ev.cond(pts), avail))
            if include_gradient and ps.identical_points:
                avail = _needed(bases, si, right="all", left="all")
                cond = ev.cond(sig)
                for j in range(k):
                    orders = list(ell)
                    orders[j] += 1
                    if sum(orders) > MAX_DERIVATIVE_ORDER:
                        continue
                    if kind == "scaled":
                        vals = ev.both(sig, "scaled", b, list(d), orders, left=ps.c)
                    elif fw == "BwtInt":
                        vals = ev.both(sig, "kron", b, None, orders, left=ps.c)
                    else:
                        vals = ev.both(sig, "kron", np.eye(m), None, orders)
                    reports.append(_report(f"{tag}/gradient/ds{j + 1}/o{orders}", family, "gradient",
                                           si, k, orders, vals, tol, cond, avail))
                if kind == "scaled":
                    for j in range(1, k):
                        for i in range(1, m + 1):
                            sc = [np.array(x) for x in d]
                            sc[j - 1] = np.eye(m, dtype=complex)[i - 1]
                            vals = ev.both(sig, "scaled", b, sc, ell, left=ps.c)
                            reports.append(_report(f"{tag}/gradient/dd{j}_{i}/o{ell}", family,
                                                   "gradient", si, k, ell, vals, tol, cond, avail))
    return reports


def check_tangential(sys, rom, spec, tol: float = DEFAULT_TOL, seed: int = 0):
    """Value conditions of the modified frameworks (all orders zero)."""
    if _family(spec.framework) != "modified":
        raise ValueError("check_tangential handles General/SftInt/SttInt; use check_blockwise")
    if any(any(ps.ell) or any(ps.nu) for ps in spec.point_sets):
        raise ValueError("spec has derivative orders; use check_hermite")
    return check_conditions(sys, rom, spec, tol, seed)


def check_hermite(sys, rom, spec, tol: float = DEFAULT_TOL, seed: int = 0):
    """Derivative conditions for any framework, following the spec's orders."""
    return check_conditions(sys, rom, spec, tol, seed)


def check_blockwise(sys, rom, spec, tol: float = DEFAULT_TOL, seed: int = 0):
    """Blockwise (``BwtInt``) or full-matrix (``MtxInt``) conditions."""
    if spec.framework not in ("BwtInt", "MtxInt"):
        raise ValueError("check_blockwise needs framework BwtInt or MtxInt")
    return check_conditions(sys, rom, spec, tol, seed)


def summarize(reports) -> dict:
    """Counts per status."""
    out = {"pass": 0, "fail": 0, "ill-conditioned": 0, "skipped": 0}
    for r in reports:
        out[r.status] += 1
    out["total"] = len(reports)
    return out


def reports_to_json(reports) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2, sort_keys=True) + "\n"


def reports_table(reports) -> str:
    """Fixed-width human-readable table."""
    lines = [f"{'status':<16}{'rel_residual':>14}  id"]
    for r in reports:
        lines.append(f"{r.status:<16}{r.rel_residual:>14.3e}  {r.id}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# error metrics

def error_metrics(full_traj, red_traj, floor: float = 1e-14) -> dict:
    """Maximum pointwise relative output error over time.

    Times where the reference output norm is below ``floor`` are excluded.

    Returns
    -------
    dict
        ``err_sim`` (maximum) and ``pointwise`` (array, ``nan`` where
        excluded).
    """
    t1, t2 = np.asarray(full_traj.times), np.asarray(red_traj.times)
    if t1.shape != t2.shape or not np.allclose(t1, t2, rtol=0, atol=1e-12 * max(1.0, t1[-1])):
        raise ValueError("trajectories must share one time grid")
    y, yr = full_traj.outputs, red_traj.outputs
    if y.shape != yr.shape:
        raise ValueError("trajectories have different output dimensions")
    ny = np.linalg.norm(y, axis=1)
    mask = ny >= floor
    if not mask.any():
        raise ValueError("reference output is identically zero")
    pointwise = np.full(ny.shape, np.nan)
    pointwise[mask] = np.linalg.norm(y - yr, axis=1)[mask] / ny[mask]
    return {"err_sim": float(np.nanmax(pointwise)), "pointwise": pointwise}


@dataclass(frozen=True, eq=False)
class GridErrors:
    """Relative spectral-norm errors of ``G_1`` and ``G_2`` on the imaginary axis."""

    w1: np.ndarray
    err_g1: np.ndarray
    w2: np.ndarray | None
    err_g2: np.ndarray | None

    @property
    def max_g1(self) -> float:
        return float(np.max(self.err_g1))

    @property
    def max_g2(self) -> float:
        return float("nan") if self.err_g2 is None else float(np.max(self.err_g2))


def _lu(sys, s):
    K = sys.K(s)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        fac = sla.lu_factor(K, check_finite=False)
    d = np.abs(np.diag(fac[0]))
    if d.min() <= 1e-14 * d.max():
        raise SingularPointError(s)
    return fac


def _g1_and_bilinear(sys, omegas):
    """``G_1(i w)`` and ``[N_1(i w) X, ..., N_m(i w) X]`` with ``X = K^{-1} B``."""
    G1, NX = [], []
    for w in omegas:
        s = 1j * w
        X = sla.lu_solve(_lu(sys, s), sys.B(s), check_finite=False)
        G1.append(sys.C(s) @ X)
        NX.append(np.hstack([Nj(s) @ X for Nj in sys.N]))
    return G1, NX


def _g2_rows(sys, NX, omegas2):
    """``G_2(i w1, i w2)`` for all ``w1`` (rows of ``NX``) and ``w2``."""
    width = NX[0].shape[1]
    stacked = np.hstack(NX)
    out = np.empty((len(omegas2), len(NX)), dtype=object)
    for j2, w in enumerate(omegas2):
        s = 1j * w
        Y = sys.C(s) @ sla.lu_solve(_lu(sys, s), stacked, check_finite=False)
        for j1 in range(len(NX)):
            out[j2, j1] = Y[:, j1 * width:(j1 + 1) * width]
    return out


def grid_errors(sys, rom, omegas=None, omegas2=None, second: bool = True) -> GridErrors:
    """Relative errors of ``G_1`` and ``G_2`` on logarithmic grids.

    Defaults are 100 points in ``[1e-4, 1e4]`` for ``G_1`` and a
    ``50 x 50`` grid on the same interval for ``G_2``.  One LU per grid
    frequency is computed; ``G_2`` stacks all ``w1`` right-hand sides into
    one solve per ``w2``.
    """
    rom_sys = getattr(rom, "system", rom)
    w1 = np.logspace(-4, 4, 100) if omegas is None else np.asarray(omegas, dtype=float)
    G, _ = _g1_and_bilinear(sys, w1)
    Gr, _ = _g1_and_bilinear(rom_sys, w1)
    e1 = np.array([np.linalg.norm(a - b, 2) / max(np.linalg.norm(a, 2), _FLOOR) for a, b in zip(G, Gr)])
    if not second:
        return GridErrors(w1, e1, None, None)
    w2 = np.logspace(-4, 4, 50) if omegas2 is None else np.asarray(omegas2, dtype=float)
    _, NX = _g1_and_bilinear(sys, w2)
    _, NXr = _g1_and_bilinear(rom_sys, w2)
    F = _g2_rows(sys, NX, w2)
    Fr = _g2_rows(rom_sys, NXr, w2)
    e2 = np.empty((len(w2), len(w2)))
    for j1 in range(len(w2)):
        for j2 in range(len(w2)):
            a, b = F[j2, j1], Fr[j2, j1]
            e2[j1, j2] = np.linalg.norm(a - b, 2) / max(np.linalg.norm(a, 2), _FLOOR)
    return GridErrors(w1, e1, w2, e2)
