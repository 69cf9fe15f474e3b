"""Structure-preserving Petrov-Galerkin projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .structures import StructuredBilinearSystem
from .subspaces import ReductionBases

__all__ = ["ReducedModel", "project", "project_matrices"]


@dataclass(frozen=True, eq=False)
class ReducedModel:
    """Reduced system together with the bases that produced it."""

    system: StructuredBilinearSystem
    bases: ReductionBases
    parent_dims: tuple

    @property
    def r(self) -> int:
        return self.system.n


def project_matrices(sys: StructuredBilinearSystem, V, W) -> StructuredBilinearSystem:
    """Project coefficient matrices term by term.

    ``K`` and ``N_j`` coefficients ``X`` become ``W^H X V``, ``B``
    coefficients ``W^H X`` and ``C`` coefficients ``X V``; the scalar basis
    functions are untouched, so the template is preserved.
    """
    V, W = np.asarray(V), np.asarray(W)
    n = sys.n
    if V.ndim != 2 or W.ndim != 2 or V.shape[0] != n or W.shape[0] != n:
        raise ValueError(f"bases must have {n} rows")
    if V.shape[1] != W.shape[1]:
        raise ValueError(f"V and W widths differ ({V.shape[1]} vs {W.shape[1]})")
    r = V.shape[1]
    WH = W.conj().T
    K = sys.K.map(lambda X: WH @ X @ V, (r, r))
    B = sys.B.map(lambda X: WH @ X, (r, sys.m))
    C = sys.C.map(lambda X: X @ V, (sys.p, r))
    N = [Nj.map(lambda X: WH @ X @ V, (r, r)) for Nj in sys.N]
    return StructuredBilinearSystem(C, K, B, N, sys.template_tag, sys.tau,
                                    {**sys.descriptor, "reduced_from_n": n})


def project(sys: StructuredBilinearSystem, bases: ReductionBases) -> ReducedModel:
    """Reduced model ``(C V, W^H K V, W^H B, W^H N_j V)``."""
    return ReducedModel(project_matrices(sys, bases.V, bases.W), bases, sys.dims)
