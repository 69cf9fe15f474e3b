"""Serialization: Matrix Market bundles, CSV tables and JSON reports.

A system bundle is a directory holding one ``.mtx`` file per named
coefficient matrix and a ``system.json`` descriptor::

    {"format": "bilintang-system", "template_tag": ..., "tau": ...,
     "n": ..., "m": ..., "p": ...,
     "functions": {"K": [{"name": "E", "basis": {...}, "weight": 1.0,
                          "file": "E.mtx"}, ...], ...}}

All writers are deterministic: identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .structures import MatrixFunction, ScalarBasis, StructuredBilinearSystem, Term

__all__ = [
    "write_matrix",
    "read_matrix",
    "save_system",
    "load_system",
    "save_bases",
    "load_bases",
    "write_json",
    "read_json",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_grid_csv",
]

SYSTEM_FILE = "system.json"


def write_matrix(path, mat) -> None:
    """Write a dense matrix in Matrix Market coordinate format."""
    mat = np.asarray(mat)
    coo = sp.coo_matrix(mat)
    scipy.io.mmwrite(str(path), coo, precision=17, symmetry="general")


def read_matrix(path) -> np.ndarray:
    a = scipy.io.mmread(str(path))
    return a.toarray() if sp.issparse(a) else np.asarray(a)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def save_system(sys: StructuredBilinearSystem, directory) -> Path:
    """Write ``sys`` as a Matrix Market + JSON bundle into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    functions = {}
    for role, fn in sys.functions():
        entries = []
        for t in fn.terms:
            fname = f"{t.name}.mtx"
            write_matrix(out / fname, t.matrix)
            entries.append({"name": t.name, "basis": t.basis.to_dict(),
                            "weight": t.weight, "file": fname})
        functions[role] = {"shape": list(fn.shape), "terms": entries}
    n, m, p = sys.dims
    meta = {
        "format": "bilintang-system",
        "template_tag": sys.template_tag,
        "tau": sys.tau,
        "n": n, "m": m, "p": p,
        "descriptor": sys.descriptor,
        "functions": functions,
    }
    write_json(out / SYSTEM_FILE, meta)
    return out


def load_system(directory) -> StructuredBilinearSystem:
    """Inverse of :func:`save_system`."""
    src = Path(directory)
    meta = read_json(src / SYSTEM_FILE)
    if meta.get("format") != "bilintang-system":
        raise ValueError(f"{src / SYSTEM_FILE} is not a bilintang system descriptor")
    cache = {}

    def fn(role):
        spec = meta["functions"][role]
        terms = []
        for e in spec["terms"]:
            if e["file"] not in cache:
                cache[e["file"]] = read_matrix(src / e["file"])
            terms.append(Term(ScalarBasis.from_dict(e["basis"]), cache[e["file"]],
                              e["name"], float(e["weight"])))
        return MatrixFunction(terms, tuple(spec["shape"]))

    m = int(meta["m"])
    return StructuredBilinearSystem(
        fn("C"), fn("K"), fn("B"), [fn(f"N{j}") for j in range(1, m + 1)],
        meta["template_tag"], meta.get("tau"), meta.get("descriptor") or {},
    )


def save_bases(bases, directory) -> Path:
    """Write ``V.mtx``, ``W.mtx`` and ``provenance.json``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "V.mtx", bases.V)
    write_matrix(out / "W.mtx", bases.W)
    write_json(out / "provenance.json", bases.provenance_dict())
    return out


def load_bases(directory):
    from .subspaces import ReductionBases

    src = Path(directory)
    V = read_matrix(src / "V.mtx")
    W = read_matrix(src / "W.mtx")
    return ReductionBases.from_dict(V, W, read_json(src / "provenance.json"))


def write_trajectory_csv(path, traj) -> None:
    """CSV with header ``t,y1,...,yp``."""
    p = traj.outputs.shape[1]
    header = ",".join(["t"] + [f"y{i}" for i in range(1, p + 1)])
    data = np.column_stack([traj.times, traj.outputs])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def read_trajectory_csv(path):
    from .simulate import Trajectory

    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data[:, 0], data[:, 1:])


def write_grid_csv(path, w1, w2, relerr) -> None:
    """CSV with header ``w1,w2,relerr``; ``w2`` is empty for univariate grids."""
    lines = ["w1,w2,relerr"]
    if w2 is None:
        for a, e in zip(np.ravel(w1), np.ravel(relerr)):
            lines.append(f"{a:.17g},,{e:.17g}")
    else:
        E = np.asarray(relerr)
        for i, a in enumerate(w1):
            for j, b in enumerate(w2):
                lines.append(f"{a:.17g},{b:.17g},{E[i, j]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
