import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bilintang import _kernels


@given(st.integers(0, 1000), st.integers(1, 12), st.integers(1, 8), st.booleans())
def test_mgs_paths_agree(seed, n, w, cplx):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, w))
    if cplx:
        X = X + 1j * rng.standard_normal((n, w))
    Q1, k1 = _kernels.mgs_numpy(X)
    Q2, k2 = _kernels.mgs_numba(X)
    assert np.array_equal(k1, k2)
    assert np.allclose(Q1, Q2, atol=1e-13)
    assert Q1.shape[1] == min(n, w)
    assert np.linalg.norm(Q1.conj().T @ Q1 - np.eye(Q1.shape[1])) <= 1e-12


def test_mgs_drops_dependent_columns():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 2))
    X = np.column_stack([A[:, 0], A[:, 1], A[:, 0] + 2 * A[:, 1], rng.standard_normal(6)])
    Q, keep = _kernels.mgs(X)
    assert list(keep) == [0, 1, 3]


def test_environment_flag(monkeypatch):
    monkeypatch.setenv(_kernels.DISABLE_ENV, "1")
    assert not _kernels.use_numba()
    monkeypatch.delenv(_kernels.DISABLE_ENV)
    assert _kernels.use_numba() == (_kernels.njit is not None)


@pytest.mark.parametrize("lag", [0, 3])
def test_imex_paths_agree(lag):
    rng = np.random.default_rng(lag)
    n, m, p, steps = 7, 2, 3, 40
    ME = np.eye(n) * 0.9 + 0.01 * rng.standard_normal((n, n))
    MN = 0.05 * rng.standard_normal((m, n, n))
    MB, MAd, C = rng.standard_normal((n, m)), 0.1 * rng.standard_normal((n, n)), rng.standard_normal((p, n))
    U = rng.standard_normal((steps, m))
    a = _kernels.imex_numpy(ME, MN, MB, MAd, C, U, 0.01, lag, 0.0)
    b = _kernels.imex_numba(ME, MN, MB, MAd, C, U, 0.01, lag, 0.0)
    assert np.allclose(a, b, rtol=0, atol=1e-13)
    assert not np.any(a[0])
