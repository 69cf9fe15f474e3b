"""Point-set recipes: ``± i logspace(a, b, count)`` and the experiment setups."""

from __future__ import annotations

import numpy as np

from .subspaces import InterpolationSpec, PointSet

__all__ = ["logspace_points", "random_direction", "logspace_point_sets", "RECIPES", "recipe_spec"]


def logspace_points(a: float, b: float, count: int, conjugate_pairs: bool = True):
    """``i * 10**linspace(a, b, count)``, each followed by its conjugate."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if a > b:
        raise ValueError(f"interval endpoints must satisfy a <= b, got {a} > {b}")
    omegas = np.logspace(a, b, count)
    pts = []
    for w in omegas:
        pts.append(1j * w)
        if conjugate_pairs:
            pts.append(-1j * w)
    return pts


def random_direction(rng, length: int) -> np.ndarray:
    """Normalized vector with entries uniform on ``[0, 1]``."""
    v = rng.random(length)
    return v / np.linalg.norm(v)


def logspace_point_sets(a, b, count, m, p, k=2, conjugate_pairs=True, seed=0, orders=None,
                        scalings=None):
    """One point set ``(s, ..., s)`` of length ``k`` per point ``s``.

    Conjugate partners share their (real) tangential directions.  With
    ``scalings`` given, every set uses ``d = delta = scalings`` (``k - 1``
    vectors); otherwise the framework decides.
    """
    rng = np.random.default_rng(seed)
    sets = []
    omegas = np.logspace(a, b, count)
    ell = None if orders is None else tuple(orders)
    d = () if scalings is None else tuple(scalings)
    for w in omegas:
        bv, cv = random_direction(rng, m), random_direction(rng, p)
        signs = (1, -1) if conjugate_pairs else (1,)
        for sgn in signs:
            s = sgn * 1j * w
            sets.append(PointSet((s,) * k, bv, cv, d=d, ell=ell))
    return sets


# family -> framework -> (a, b, count, side, max_order)
RECIPES = {
    "msd": {
        "MtxInt": (-4, 4, 2, "right", None),
        "BwtInt": (-4, 4, 4, "right", None),
        "SftInt": (-4, 4, 6, "right", None),
        "SttInt": (-4, 4, 6, "right", None),
    },
    "delay_rod": {
        "MtxInt": (0, 0, 1, "right", 36),
        "BwtInt": (-4, 4, 3, "both", None),
        "SftInt": (-4, 4, 9, "both", None),
        "SttInt": (-4, 4, 9, "both", None),
    },
}


def recipe_spec(family: str, framework: str, m: int, p: int, seed: int = 0) -> InterpolationSpec:
    """Interpolation spec of an experiment recipe (levels 1 and 2)."""
    try:
        a, b, count, side, max_order = RECIPES[family][framework]
    except KeyError:
        raise ValueError(f"no recipe for family {family!r} and framework {framework!r}") from None
    sets = logspace_point_sets(a, b, count, m, p, k=2, seed=seed)
    return InterpolationSpec(sets, framework, side, max_order=max_order)
