"""Trial and test bases for structured tangential interpolation.

Every framework is a special case of one construction: the forward chain of
:mod:`bilintang.transfer` is run at the points of a set, and its level
states (and their derivatives) are collected as basis directions.

=========  ================================  ========================
framework  right chain (V)                   left chain (W)
=========  ================================  ========================
General    scaled by ``d``, seeded by ``b``  scaled by ``delta``, ``c``
SftInt     scaled by ``1_m``                 scaled by ``1_m``
SttInt     scaled by ``b``                   scaled by ``b``
BwtInt     Kronecker, seeded by ``b``        Kronecker, seeded by ``c``
MtxInt     Kronecker, seeded by ``I_m``      Kronecker, seeded by ``I_p``
=========  ================================  ========================

The raw directions of all point sets are concatenated, realified when
conjugate point sets allow it, and orthonormalized with rank truncation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .transfer import Resolvent, left_chain, right_chain

__all__ = [
    "FRAMEWORKS",
    "PointSet",
    "InterpolationSpec",
    "DirectionRecord",
    "ReductionBases",
    "EmptyBasisError",
    "effective_scalings",
    "build_V_modified",
    "build_W_modified",
    "build_V_modified_hermite",
    "build_W_modified_hermite",
    "build_V_blockwise",
    "build_W_blockwise",
    "build_V_matrix",
    "build_W_matrix",
    "raw_directions",
    "assemble_bases",
]

FRAMEWORKS = ("MtxInt", "BwtInt", "SftInt", "SttInt", "General")
SIDES = ("both", "right", "left")
SPAN_TOL = 1e-8


class EmptyBasisError(ValueError):
    """Rank truncation removed every direction."""


def _vec(x, length, name):
    v = np.asarray(x, dtype=complex).reshape(-1)
    if v.shape != (length,):
        raise ValueError(f"{name} must have length {length}, got {v.shape[0]}")
    return v


@dataclass(frozen=True, eq=False)
class PointSet:
    """One interpolation point set.

    Parameters
    ----------
    sigma
        Right points ``sigma_1, ..., sigma_k``.
    b
        Right tangential direction (length ``m``).
    c
        Left tangential direction (length ``p``); may be ``None`` for runs
        that only build ``V``.
    varsigma
        Left points ``varsigma_1, ..., varsigma_kappa``; defaults to ``sigma``.
    d, delta
        Scaling vectors for the right (``k - 1``) and left (``kappa - 1``)
        chains.  Only used by the ``General`` framework.
    ell, nu
        Derivative orders for the right and left points; default zeros.
    """

    sigma: tuple
    b: np.ndarray
    c: np.ndarray | None = None
    varsigma: tuple | None = None
    d: tuple = ()
    delta: tuple | None = None
    ell: tuple | None = None
    nu: tuple | None = None

    def __post_init__(self):
        sig = tuple(complex(s) for s in np.atleast_1d(self.sigma))
        if not sig:
            raise ValueError("a point set needs at least one point")
        vs = sig if self.varsigma is None else tuple(complex(s) for s in np.atleast_1d(self.varsigma))
        if not vs:
            raise ValueError("a point set needs at least one left point")
        b = np.asarray(self.b, dtype=complex).reshape(-1)
        c = None if self.c is None else np.asarray(self.c, dtype=complex).reshape(-1)
        if not np.any(b):
            raise ValueError("right direction b must be nonzero")
        if c is not None and not np.any(c):
            raise ValueError("left direction c must be nonzero")
        d = tuple(np.asarray(x, dtype=complex).reshape(-1) for x in self.d)
        delta = d if self.delta is None and len(vs) == len(sig) else tuple(
            np.asarray(x, dtype=complex).reshape(-1) for x in (self.delta or ()))
        ell = (0,) * len(sig) if self.ell is None else tuple(int(x) for x in self.ell)
        nu = (ell if len(vs) == len(sig) else (0,) * len(vs)) if self.nu is None \
            else tuple(int(x) for x in self.nu)
        if len(ell) != len(sig) or len(nu) != len(vs) or min(ell + nu) < 0:
            raise ValueError("derivative orders must be nonnegative, one per point")
        for name, val in [("sigma", sig), ("varsigma", vs), ("b", b), ("c", c), ("d", d),
                          ("delta", delta), ("ell", ell), ("nu", nu)]:
            object.__setattr__(self, name, val)

    @property
    def k(self) -> int:
        return len(self.sigma)

    @property
    def kappa(self) -> int:
        return len(self.varsigma)

    @property
    def identical_points(self) -> bool:
        """Requirements of identical-point two-sided interpolation."""
        return (self.sigma == self.varsigma and self.ell == self.nu
                and len(self.d) == len(self.delta)
                and all(np.array_equal(x, y) for x, y in zip(self.d, self.delta)))

    def conjugate(self) -> "PointSet":
        conj = lambda seq: tuple(np.conj(x) for x in seq)  # noqa: E731
        return PointSet(conj(self.sigma), np.conj(self.b), None if self.c is None else np.conj(self.c),
                        conj(self.varsigma), conj(self.d), conj(self.delta), self.ell, self.nu)

    def is_conjugate_of(self, other: "PointSet") -> bool:
        o = other.conjugate()
        return (self.sigma == o.sigma and self.varsigma == o.varsigma
                and self.ell == o.ell and self.nu == o.nu
                and np.array_equal(self.b, o.b)
                and ((self.c is None and o.c is None)
                     or (self.c is not None and o.c is not None and np.array_equal(self.c, o.c)))
                and len(self.d) == len(o.d) and all(np.array_equal(x, y) for x, y in zip(self.d, o.d))
                and len(self.delta) == len(o.delta)
                and all(np.array_equal(x, y) for x, y in zip(self.delta, o.delta)))

    @property
    def is_real(self) -> bool:
        vecs = [self.b] + ([] if self.c is None else [self.c]) + list(self.d) + list(self.delta)
        return (all(s.imag == 0 for s in self.sigma + self.varsigma)
                and all(not np.any(v.imag) for v in vecs))

    def to_dict(self) -> dict:
        cpx = lambda z: [z.real, z.imag]  # noqa: E731
        vec = lambda v: None if v is None else [cpx(complex(x)) for x in v]  # noqa: E731
        return {
            "sigma": [cpx(s) for s in self.sigma], "varsigma": [cpx(s) for s in self.varsigma],
            "b": vec(self.b), "c": vec(self.c),
            "d": [vec(x) for x in self.d], "delta": [vec(x) for x in self.delta],
            "ell": list(self.ell), "nu": list(self.nu),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PointSet":
        cpx = lambda z: complex(z[0], z[1])  # noqa: E731
        vec = lambda v: None if v is None else np.array([cpx(x) for x in v])  # noqa: E731
        return cls(tuple(cpx(s) for s in data["sigma"]), vec(data["b"]), vec(data["c"]),
                   tuple(cpx(s) for s in data["varsigma"]),
                   tuple(vec(x) for x in data["d"]), tuple(vec(x) for x in data["delta"]),
                   tuple(data["ell"]), tuple(data["nu"]))


@dataclass(frozen=True, eq=False)
class InterpolationSpec:
    """Point sets plus framework choice for one reduction run.

    ``side`` selects two-sided projection (``"both"``) or one-sided
    projection with ``W = V`` (``"right"``) or ``V = W`` (``"left"``).
    ``max_order`` optionally compresses the orthonormalized basis to its
    leading singular directions, which gives up exact interpolation.
    """

    point_sets: tuple
    framework: str = "General"
    side: str = "both"
    tol: float = 1e-10
    realify: bool = True
    max_order: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "point_sets", tuple(self.point_sets))
        if not self.point_sets:
            raise ValueError("at least one point set is required")
        if self.framework not in FRAMEWORKS:
            raise ValueError(f"unknown framework {self.framework!r}; choose from {FRAMEWORKS}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        if self.side != "right" and any(ps.c is None for ps in self.point_sets):
            raise ValueError("left direction c is required unless side='right'")

    @property
    def one_sided(self) -> bool:
        return self.side != "both"

    @property
    def builds_V(self) -> bool:
        return self.side in ("both", "right")

    @property
    def builds_W(self) -> bool:
        return self.side in ("both", "left")

    def to_dict(self) -> dict:
        return {"framework": self.framework, "side": self.side, "tol": self.tol,
                "realify": self.realify, "max_order": self.max_order,
                "point_sets": [ps.to_dict() for ps in self.point_sets]}

    @classmethod
    def from_dict(cls, data: dict) -> "InterpolationSpec":
        return cls(tuple(PointSet.from_dict(x) for x in data["point_sets"]), data["framework"],
                   data["side"], float(data["tol"]), bool(data["realify"]), data.get("max_order"))


def effective_scalings(ps: PointSet, framework: str, m: int):
    """Scaling vectors ``(d, delta)`` that a framework uses for ``ps``."""
    if framework == "SftInt":
        one = np.ones(m, dtype=complex)
        return (one,) * (ps.k - 1), (one,) * (ps.kappa - 1)
    if framework == "SttInt":
        return (ps.b,) * (ps.k - 1), (ps.b,) * (ps.kappa - 1)
    if framework == "General":
        if len(ps.d) != ps.k - 1 or len(ps.delta) != ps.kappa - 1:
            raise ValueError("General framework needs k-1 right and kappa-1 left scalings")
        for x in ps.d + ps.delta:
            _vec(x, m, "scaling vector")
        return ps.d, ps.delta
    return None, None


# ---------------------------------------------------------------------------
# per-set builders

def _right_levels(sys, ps, framework, res=None, orders=None):
    d, _ = effective_scalings(ps, framework, sys.m)
    b = _vec(ps.b, sys.m, "b")
    orders = ps.ell if orders is None else orders
    if framework == "MtxInt":
        levels, _ = right_chain(sys, ps.sigma, np.eye(sys.m), "kron", None, orders, res, output=False)
    elif framework == "BwtInt":
        levels, _ = right_chain(sys, ps.sigma, b, "kron", None, orders, res, output=False)
    else:
        levels, _ = right_chain(sys, ps.sigma, b, "scaled", d, orders, res, output=False)
    return levels


def _left_levels(sys, ps, framework, res=None, orders=None):
    _, delta = effective_scalings(ps, framework, sys.m)
    if ps.c is None:
        raise ValueError("left direction c is required to build W")
    c = _vec(ps.c, sys.p, "c")
    orders = ps.nu if orders is None else orders
    if framework == "MtxInt":
        levels, _ = left_chain(sys, ps.varsigma, np.eye(sys.p), "kron", None, orders, res)
    elif framework == "BwtInt":
        levels, _ = left_chain(sys, ps.varsigma, c, "kron", None, orders, res)
    else:
        levels, _ = left_chain(sys, ps.varsigma, c, "scaled", delta, orders, res)
    # row blocks Y become columns Y^H
    return [[Y.conj().T for Y in lev] for lev in levels]


def build_V_modified(sys, ps: PointSet, framework: str = "General"):
    """Vectors ``v_1, ..., v_k`` of the modified right chain (orders ignored)."""
    levels = _right_levels(sys, ps, framework, orders=(0,) * ps.k)
    return [lev[0][:, 0] for lev in levels]


def build_W_modified(sys, ps: PointSet, framework: str = "General"):
    """Vectors ``w_1, ..., w_kappa`` of the modified left chain (orders ignored).

    ``w_1`` belongs to ``varsigma_kappa``; ``w_i`` to ``varsigma_{kappa-i+1}``.
    """
    levels = _left_levels(sys, ps, framework, orders=(0,) * ps.kappa)
    return [lev[0][:, 0] for lev in levels]


def build_V_modified_hermite(sys, ps: PointSet, framework: str = "General"):
    """``{(j, i): v_{j,i}}`` for levels ``j`` and orders ``i = 0..ell_j``."""
    levels = _right_levels(sys, ps, framework)
    return {(j, i): Y[:, 0] for j, lev in enumerate(levels, 1) for i, Y in enumerate(lev)}


def build_W_modified_hermite(sys, ps: PointSet, framework: str = "General"):
    """``{(i, q): w_{i,q}}`` for levels ``i`` and orders ``q = 0..nu_{kappa-i+1}``."""
    levels = _left_levels(sys, ps, framework)
    return {(i, q): Y[:, 0] for i, lev in enumerate(levels, 1) for q, Y in enumerate(lev)}


def build_V_blockwise(sys, ps: PointSet):
    """Blocks ``V_1, ..., V_k``; ``V_j`` has ``m**(j-1)`` columns.

    With derivative orders, each level contributes its highest-order
    derivative block; use :func:`raw_directions` for all of them.
    """
    return [lev[-1] for lev in _right_levels(sys, ps, "BwtInt")]


def build_W_blockwise(sys, ps: PointSet):
    """Blocks ``W_1, ..., W_kappa``; ``W_i`` has ``m**(i-1)`` columns."""
    return [lev[-1] for lev in _left_levels(sys, ps, "BwtInt")]


def build_V_matrix(sys, ps: PointSet):
    """Blocks ``V_1, ..., V_k``; ``V_j`` has ``m**j`` columns."""
    return [lev[-1] for lev in _right_levels(sys, ps, "MtxInt")]


def build_W_matrix(sys, ps: PointSet):
    """Blocks ``W_1, ..., W_kappa``; ``W_i`` has ``p * m**(i-1)`` columns."""
    return [lev[-1] for lev in _left_levels(sys, ps, "MtxInt")]


# ---------------------------------------------------------------------------
# assembly

@dataclass
class DirectionRecord:
    """Provenance of one raw basis direction.

    ``orders`` lists the derivative orders of the variables involved, in
    point order: ``sigma_1..sigma_level`` on the right and
    ``varsigma_{kappa-level+1}..varsigma_kappa`` on the left.
    """

    set: int
    side: str
    level: int
    orders: list
    col: int
    residual: float = float("nan")
    in_span: bool = False
    conjugate_of: int | None = None


def raw_directions(sys, spec: InterpolationSpec, side: str, res=None):
    """Raw (unorthogonalized) directions of all point sets for one side.

    Returns ``(columns, records)`` with one ``n``-vector per record.
    """
    res = Resolvent(sys) if res is None else res
    cols, recs = [], []
    for si, ps in enumerate(spec.point_sets):
        if side == "right":
            levels = _right_levels(sys, ps, spec.framework, res)
            full = list(ps.ell)
        else:
            levels = _left_levels(sys, ps, spec.framework, res)
            full = list(ps.nu)
        for lvl, lev in enumerate(levels, 1):
            for i, Y in enumerate(lev):
                if side == "right":
                    orders = full[: lvl - 1] + [i]
                else:
                    kap = ps.kappa
                    orders = [i] + full[kap - lvl + 1:]
                for col in range(Y.shape[1]):
                    cols.append(Y[:, col])
                    recs.append(DirectionRecord(si, side, lvl, orders, col))
    return cols, recs


def _conjugate_pairs(spec: InterpolationSpec):
    """Map ``partner -> primary`` for conjugate point sets, or ``None``.

    ``None`` means some complex set lacks a partner and realification is
    impossible.
    """
    partner = {}
    taken = set()
    sets = spec.point_sets
    for i, ps in enumerate(sets):
        if i in taken or ps.is_real:
            continue
        for j in range(i + 1, len(sets)):
            if j not in taken and sets[j].is_conjugate_of(ps):
                partner[j] = i
                taken.update((i, j))
                break
        else:
            return None
    return partner


def _side_basis(sys, spec, side, res, partner):
    """Orthonormal basis of one side plus provenance and raw-column map."""
    n = sys.n
    realify = partner is not None
    cols, recs = [], []
    for si, ps in enumerate(spec.point_sets):
        if realify and si in partner:
            continue
        sub = InterpolationSpec((ps,), spec.framework, "both" if ps.c is not None else "right")
        c, r = raw_directions(sys, sub, side, res)
        for rec in r:
            rec.set = si
        cols += c
        recs += r
    # directions of partner sets are conjugates of their primaries
    all_cols, all_recs = list(cols), list(recs)
    if realify:
        by_set = {}
        for c, r in zip(cols, recs):
            by_set.setdefault(r.set, []).append((c, r))
        for j, i in sorted(partner.items()):
            for c, r in by_set[i]:
                all_cols.append(np.conj(c))
                all_recs.append(DirectionRecord(j, side, r.level, list(r.orders), r.col, conjugate_of=i))
    if realify:
        raw = []
        for c, r in zip(cols, recs):
            if spec.point_sets[r.set].is_real:
                raw.append(c.real)
            else:
                raw += [c.real, c.imag]
        X = np.column_stack(raw) if raw else np.zeros((n, 0))
    else:
        X = np.column_stack(cols) if cols else np.zeros((n, 0), dtype=complex)
    raw_width = len(all_cols)
    norms = np.linalg.norm(X, axis=0)
    X = X[:, norms > 0] / norms[norms > 0]
    Q, keep = _kernels.mgs(X, spec.tol)
    if spec.max_order is not None and Q.shape[1] > spec.max_order:
        U, _, _ = np.linalg.svd(X, full_matrices=False)
        Q = U[:, : spec.max_order]
        keep = np.full(spec.max_order, -1, dtype=np.int64)
    return Q, keep, all_cols, all_recs, raw_width


def _mark_span(Q, cols, recs):
    for c, r in zip(cols, recs):
        nc = np.linalg.norm(c)
        if nc == 0:
            r.residual, r.in_span = 0.0, True
            continue
        resid = c - Q @ (Q.conj().T @ c)
        r.residual = float(np.linalg.norm(resid) / nc)
        r.in_span = bool(r.residual <= SPAN_TOL)


@dataclass(eq=False)
class ReductionBases:
    """Trial basis ``V``, test basis ``W`` and provenance of their directions.

    Attributes
    ----------
    V, W
        Column-orthonormal ``n x r`` matrices (real when realified).
    provenance
        :class:`DirectionRecord` list covering every raw direction on both
        sides, including conjugate partners.  ``in_span`` tells whether the
        direction survived truncation (residual at most ``1e-8``).
    sources_V, sources_W
        For each retained column, the index of the raw (realified) column
        it orthogonalizes; ``-1`` after SVD compression.
    info
        Widths before and after truncation and flags used.
    """

    V: np.ndarray
    W: np.ndarray
    provenance: list
    sources_V: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    sources_W: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    info: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return self.V.shape[1]

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.V) and np.isrealobj(self.W)

    def records(self, side: str | None = None, set_index: int | None = None):
        return [r for r in self.provenance
                if (side is None or r.side == side) and (set_index is None or r.set == set_index)]

    def provenance_dict(self) -> dict:
        return {
            "info": self.info,
            "sources_V": [int(x) for x in self.sources_V],
            "sources_W": [int(x) for x in self.sources_W],
            "directions": [asdict(r) for r in self.provenance],
        }

    @classmethod
    def from_dict(cls, V, W, data) -> "ReductionBases":
        recs = [DirectionRecord(**r) for r in data["directions"]]
        return cls(np.asarray(V), np.asarray(W), recs,
                   np.asarray(data["sources_V"], dtype=np.int64),
                   np.asarray(data["sources_W"], dtype=np.int64), dict(data["info"]))


def assemble_bases(sys, spec: InterpolationSpec, resolvent=None) -> ReductionBases:
    """Build and orthonormalize ``V`` and ``W`` for an interpolation spec.

    Raises
    ------
    EmptyBasisError
        If truncation leaves no direction.
    SingularPointError
        If ``K`` is singular at one of the points.
    """
    res = Resolvent(sys) if resolvent is None else resolvent
    partner = _conjugate_pairs(spec) if (spec.realify and sys.is_real) else None
    info = {"framework": spec.framework, "side": spec.side, "realified": partner is not None,
            "n_sets": len(spec.point_sets)}
    sides = {}
    for side, wanted in (("right", spec.builds_V), ("left", spec.builds_W)):
        if wanted:
            sides[side] = _side_basis(sys, spec, side, res, partner)
            info[f"raw_width_{side}"] = sides[side][4]
            info[f"rank_{side}"] = sides[side][0].shape[1]
    if "right" in sides and "left" in sides:
        r = min(sides["right"][0].shape[1], sides["left"][0].shape[1])
        V, sV = sides["right"][0][:, :r], sides["right"][1][:r]
        W, sW = sides["left"][0][:, :r], sides["left"][1][:r]
    elif "right" in sides:
        V, sV = sides["right"][0], sides["right"][1]
        W, sW = V, sV
    else:
        W, sW = sides["left"][0], sides["left"][1]
        V, sV = W, sW
    if V.shape[1] == 0:
        raise EmptyBasisError("rank truncation removed every basis direction")
    if np.iscomplexobj(V) != np.iscomplexobj(W):
        V, W = V.astype(complex), W.astype(complex)
    info["r"] = V.shape[1]
    provenance = []
    if "right" in sides:
        _mark_span(V, sides["right"][2], sides["right"][3])
        provenance += sides["right"][3]
    if "left" in sides:
        _mark_span(W, sides["left"][2], sides["left"][3])
        provenance += sides["left"][3]
    return ReductionBases(V, W, provenance, np.asarray(sV), np.asarray(sW), info)
