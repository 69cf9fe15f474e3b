"""Structured matrix-valued functions and bilinear system templates.

A :class:`MatrixFunction` is a finite sum ``sum_i w_i f_i(s) X_i`` of scalar
basis functions ``f_i`` from the span ``{1, s, s**2, exp(-tau*s)}`` times
constant coefficient matrices ``X_i``.  A :class:`StructuredBilinearSystem`
bundles the four functions ``C(s)``, ``K(s)``, ``B(s)`` and ``N_j(s)`` that
define the subsystem transfer functions of a structured bilinear system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

__all__ = [
    "ScalarBasis",
    "Term",
    "MatrixFunction",
    "StructuredBilinearSystem",
    "TemplateError",
    "monomial",
    "delay_exponential",
    "make_template",
    "first_order",
    "second_order",
    "time_delay",
    "TEMPLATE_TAGS",
]

TEMPLATE_TAGS = ("first_order", "second_order", "time_delay", "custom")


class TemplateError(ValueError):
    """Raised when coefficient matrices do not fit a system template."""


@dataclass(frozen=True)
class ScalarBasis:
    """Scalar basis function ``s**degree`` or ``exp(-tau*s)``."""

    kind: str
    degree: int = 0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind == "monomial":
            if not 0 <= self.degree <= 2:
                raise ValueError(f"monomial degree must be 0, 1 or 2, got {self.degree}")
        elif self.kind == "delay_exponential":
            if not self.tau > 0:
                raise ValueError(f"delay tau must be positive, got {self.tau}")
        else:
            raise ValueError(f"unknown scalar basis kind {self.kind!r}")

    def __call__(self, s):
        return self.derivative(s, 0)

    def derivative(self, s, order: int = 0):
        """Value of the ``order``-th derivative at ``s``."""
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        if self.kind == "monomial":
            d = self.degree
            if order > d:
                return 0.0
            coeff = factorial(d) // factorial(d - order)
            return coeff * s ** (d - order) if d > order else float(coeff)
        return (-self.tau) ** order * np.exp(-self.tau * s)

    def to_dict(self) -> dict:
        if self.kind == "monomial":
            return {"kind": "monomial", "degree": self.degree}
        return {"kind": "delay_exponential", "tau": self.tau}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalarBasis":
        if data["kind"] == "monomial":
            return cls("monomial", degree=int(data["degree"]))
        return cls("delay_exponential", tau=float(data["tau"]))


def monomial(degree: int) -> ScalarBasis:
    return ScalarBasis("monomial", degree=degree)


def delay_exponential(tau: float) -> ScalarBasis:
    return ScalarBasis("delay_exponential", tau=float(tau))


@dataclass(frozen=True, eq=False)
class Term:
    """One summand ``weight * basis(s) * matrix``.

    ``name`` labels the coefficient matrix (``"E"``, ``"A"``, ``"Np1"``...)
    so that templates can be serialized and round-tripped.
    """

    basis: ScalarBasis
    matrix: np.ndarray
    name: str
    weight: float = 1.0


class MatrixFunction:
    """Matrix-valued function of one complex variable.

    Parameters
    ----------
    terms
        Sequence of :class:`Term`.  All coefficient matrices must share one
        shape.
    shape
        ``(rows, cols)``; required when ``terms`` is empty, otherwise checked.
    """

    def __init__(self, terms, shape=None):
        terms = tuple(terms)
        for t in terms:
            mat = np.array(t.matrix)
            if mat.ndim != 2:
                raise TemplateError(f"coefficient {t.name!r} is not a matrix")
            mat.setflags(write=False)
            object.__setattr__(t, "matrix", mat)
        shapes = {t.matrix.shape for t in terms}
        if len(shapes) > 1:
            raise TemplateError(f"inconsistent coefficient shapes {sorted(shapes)}")
        if shape is None:
            if not terms:
                raise TemplateError("shape required for an empty MatrixFunction")
            shape = terms[0].matrix.shape
        shape = tuple(int(x) for x in shape)
        if shapes and shapes.pop() != shape:
            raise TemplateError(f"coefficients do not have shape {shape}")
        self.terms = terms
        self.shape = shape

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def is_real(self) -> bool:
        return all(np.isrealobj(t.matrix) for t in self.terms)

    @property
    def is_constant(self) -> bool:
        return all(t.basis.kind == "monomial" and t.basis.degree == 0 for t in self.terms)

    def __call__(self, s):
        return self.derivative(s, 0)

    def derivative(self, s, order: int = 0) -> np.ndarray:
        """Evaluate the ``order``-th derivative at ``s`` (complex result)."""
        out = np.zeros(self.shape, dtype=complex)
        for t in self.terms:
            coeff = t.weight * t.basis.derivative(s, order)
            if coeff != 0:
                out += coeff * t.matrix
        return out

    def max_nonzero_order(self) -> int | None:
        """Largest derivative order that can be nonzero (``None`` if unbounded)."""
        top = -1
        for t in self.terms:
            if t.basis.kind == "delay_exponential":
                return None
            top = max(top, t.basis.degree)
        return top

    def map(self, fn, shape) -> "MatrixFunction":
        """New function with every coefficient matrix replaced by ``fn(X)``."""
        return MatrixFunction(
            [Term(t.basis, fn(t.matrix), t.name, t.weight) for t in self.terms], shape
        )

    def coefficients(self) -> dict[str, np.ndarray]:
        return {t.name: t.matrix for t in self.terms}

    def __add__(self, other: "MatrixFunction") -> "MatrixFunction":
        if self.shape != other.shape:
            raise TemplateError("cannot add matrix functions of different shapes")
        return MatrixFunction(self.terms + other.terms, self.shape)

    def __repr__(self):
        parts = " + ".join(f"{t.weight:+g}*{_basis_str(t.basis)}*{t.name}" for t in self.terms)
        return f"MatrixFunction({self.shape[0]}x{self.shape[1]}: {parts or '0'})"


def _basis_str(b: ScalarBasis) -> str:
    if b.kind == "monomial":
        return ("1", "s", "s^2")[b.degree]
    return f"exp(-{b.tau:g}s)"


@dataclass(frozen=True, eq=False)
class StructuredBilinearSystem:
    """The quadruple ``C(s), K(s), B(s), [N_1(s), ..., N_m(s)]``.

    ``tau`` records the delay of a ``time_delay`` template (``None``
    otherwise); ``descriptor`` carries free-form generator metadata.
    """

    C: MatrixFunction
    K: MatrixFunction
    B: MatrixFunction
    N: tuple
    template_tag: str = "custom"
    tau: float | None = None
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(self.N))
        if self.template_tag not in TEMPLATE_TAGS:
            raise TemplateError(f"unknown template tag {self.template_tag!r}")
        n = self.K.rows
        if self.K.shape != (n, n):
            raise TemplateError(f"K must be square, got {self.K.shape}")
        if self.B.rows != n:
            raise TemplateError(f"B has {self.B.rows} rows, expected n = {n}")
        if self.C.cols != n:
            raise TemplateError(f"C has {self.C.cols} columns, expected n = {n}")
        m, p = self.B.cols, self.C.rows
        if min(n, m, p) < 1:
            raise TemplateError("dimensions n, m, p must be positive")
        if len(self.N) != m:
            raise TemplateError(f"expected m = {m} bilinear terms, got {len(self.N)}")
        for j, Nj in enumerate(self.N, 1):
            if Nj.shape != (n, n):
                raise TemplateError(f"N{j} has shape {Nj.shape}, expected {(n, n)}")
        seen = {}
        for role, fn in self.functions():
            for t in fn.terms:
                prev = seen.setdefault(t.name, role)
                if prev != role:
                    raise TemplateError(f"coefficient name {t.name!r} used in {prev} and {role}")

    @property
    def n(self) -> int:
        return self.K.rows

    @property
    def m(self) -> int:
        return self.B.cols

    @property
    def p(self) -> int:
        return self.C.rows

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.n, self.m, self.p

    @property
    def is_real(self) -> bool:
        return all(fn.is_real for _, fn in self.functions())

    def functions(self):
        """Yield ``(role, MatrixFunction)`` pairs; roles are C, K, B, N1..Nm."""
        yield "C", self.C
        yield "K", self.K
        yield "B", self.B
        for j, Nj in enumerate(self.N, 1):
            yield f"N{j}", Nj

    def coefficient_matrices(self) -> dict[str, np.ndarray]:
        """All named coefficient matrices (template inputs)."""
        out = {}
        for _, fn in self.functions():
            out.update(fn.coefficients())
        return out

    def scaled_N(self, s, d, order: int = 0) -> np.ndarray:
        """``sum_i d_i N_i^{(order)}(s)``."""
        d = np.asarray(d)
        if d.shape != (self.m,):
            raise ValueError(f"scaling vector must have length m = {self.m}")
        out = np.zeros((self.n, self.n), dtype=complex)
        for di, Ni in zip(d, self.N):
            if di != 0:
                out += di * Ni.derivative(s, order)
        return out

    def with_functions(self, C, K, B, N) -> "StructuredBilinearSystem":
        return StructuredBilinearSystem(C, K, B, tuple(N), self.template_tag, self.tau, dict(self.descriptor))

    def __repr__(self):
        return f"StructuredBilinearSystem({self.template_tag}, n={self.n}, m={self.m}, p={self.p})"


def _mat(x, name):
    a = np.array(x)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise TemplateError(f"{name} must be a matrix")
    return a


def _check(name, mat, shape):
    if mat.shape != shape:
        raise TemplateError(f"{name} has shape {mat.shape}, expected {shape}")


def _const(mat, name, weight=1.0):
    return MatrixFunction([Term(monomial(0), mat, name, weight)])


def first_order(E, A, N, B, C) -> StructuredBilinearSystem:
    """``E x' = A x + sum_j N_j x u_j + B u``, ``y = C x``; ``K(s) = sE - A``."""
    A = _mat(A, "A")
    n = A.shape[0]
    E = np.eye(n) if E is None else _mat(E, "E")
    B, C = _mat(B, "B"), _mat(C, "C")
    _check("A", A, (n, n))
    _check("E", E, (n, n))
    _check("B", B, (n, B.shape[1]))
    _check("C", C, (C.shape[0], n))
    N = [_mat(Nj, f"N{j}") for j, Nj in enumerate(N, 1)]
    if len(N) != B.shape[1]:
        raise TemplateError(f"expected {B.shape[1]} bilinear matrices, got {len(N)}")
    for j, Nj in enumerate(N, 1):
        _check(f"N{j}", Nj, (n, n))
    K = MatrixFunction([Term(monomial(1), E, "E"), Term(monomial(0), A, "A", -1.0)])
    return StructuredBilinearSystem(
        _const(C, "C"), K, _const(B, "B"),
        [_const(Nj, f"N{j}") for j, Nj in enumerate(N, 1)],
        "first_order",
    )


def second_order(M, D, K, Np, Nv, Bu, Cp, Cv=None) -> StructuredBilinearSystem:
    """``M q'' + D q' + K q = sum_j (Np_j q + Nv_j q') u_j + Bu u``, ``y = Cp q + Cv q'``."""
    M, D, K0 = _mat(M, "M"), _mat(D, "D"), _mat(K, "K")
    n = M.shape[0]
    Bu, Cp = _mat(Bu, "Bu"), _mat(Cp, "Cp")
    m, p = Bu.shape[1], Cp.shape[0]
    Cv = np.zeros((p, n)) if Cv is None else _mat(Cv, "Cv")
    for name, mat, shape in [("M", M, (n, n)), ("D", D, (n, n)), ("K", K0, (n, n)),
                             ("Bu", Bu, (n, m)), ("Cp", Cp, (p, n)), ("Cv", Cv, (p, n))]:
        _check(name, mat, shape)
    Np = [_mat(x, f"Np{j}") for j, x in enumerate(Np, 1)]
    Nv = [np.zeros((n, n)) for _ in range(m)] if Nv is None else [_mat(x, f"Nv{j}") for j, x in enumerate(Nv, 1)]
    if len(Np) != m or len(Nv) != m:
        raise TemplateError(f"expected {m} matrices in Np and Nv, got {len(Np)} and {len(Nv)}")
    for j in range(m):
        _check(f"Np{j + 1}", Np[j], (n, n))
        _check(f"Nv{j + 1}", Nv[j], (n, n))
    Kf = MatrixFunction([Term(monomial(2), M, "M"), Term(monomial(1), D, "D"), Term(monomial(0), K0, "K")])
    Cf = MatrixFunction([Term(monomial(0), Cp, "Cp"), Term(monomial(1), Cv, "Cv")])
    Nf = [
        MatrixFunction([Term(monomial(0), Np[j], f"Np{j + 1}"), Term(monomial(1), Nv[j], f"Nv{j + 1}")])
        for j in range(m)
    ]
    return StructuredBilinearSystem(Cf, Kf, _const(Bu, "Bu"), Nf, "second_order")


def time_delay(A, Ad, N, B, C, tau=1.0, E=None) -> StructuredBilinearSystem:
    """``E x' = A x + Ad x(t - tau) + sum_j N_j x u_j + B u``; ``K(s) = sE - A - exp(-tau s) Ad``."""
    A, Ad = _mat(A, "A"), _mat(Ad, "Ad")
    n = A.shape[0]
    E = np.eye(n) if E is None else _mat(E, "E")
    _check("Ad", Ad, (n, n))
    base = first_order(E, A, N, B, C)
    K = MatrixFunction(base.K.terms + (Term(delay_exponential(tau), Ad, "Ad", -1.0),), (n, n))
    return StructuredBilinearSystem(base.C, K, base.B, base.N, "time_delay", float(tau))


_TEMPLATES = {"first_order": first_order, "second_order": second_order, "time_delay": time_delay}


def make_template(tag: str, *args, **kwargs) -> StructuredBilinearSystem:
    """Build a system from a template tag and its coefficient matrices.

    >>> sys = make_template("first_order", E=None, A=[[-1.0]], N=[[[1.0]]], B=[[1.0]], C=[[1.0]])
    >>> complex(sys.K(0.0)[0, 0])
    (1+0j)
    """
    try:
        factory = _TEMPLATES[tag]
    except KeyError:
        raise TemplateError(f"unknown template {tag!r}; choose from {sorted(_TEMPLATES)}") from None
    return factory(*args, **kwargs)
