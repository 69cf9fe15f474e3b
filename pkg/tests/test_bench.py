import numpy as np
import pytest

from bilintang.bench import FAMILIES, make_delay_rod, make_family, make_heat2d, make_msd, random_system
from bilintang.simulate import linear_parts


class TestMSD:
    def test_dimensions(self):
        assert make_msd(50).dims == (50, 2, 2)

    def test_scalings(self):
        sys = make_msd(11)
        c = sys.coefficient_matrices()
        K = c["K"]
        # N_p1 = -S1 K S1 with S1 = diag(linspace(0.2, 0, n))
        s1 = np.linspace(0.2, 0.0, 11)
        assert np.allclose(c["Np1"], -np.diag(s1) @ K @ np.diag(s1))
        assert c["Np1"][0, 0] == -0.2 * K[0, 0] * 0.2 and not np.any(c["Np1"][-1])

    @pytest.mark.parametrize("n", [6, 50, 200])
    def test_definiteness(self, n):
        c = make_msd(n).coefficient_matrices()
        for name in ("M", "D", "K"):
            X = c[name]
            assert np.array_equal(X, X.T)
            assert np.linalg.eigvalsh(X).min() > 0

    def test_io_operators(self):
        c = make_msd(10).coefficient_matrices()
        assert np.array_equal(c["Bu"][:, 0], np.eye(10)[0]) and np.array_equal(c["Bu"][:, 1], -np.eye(10)[9])
        assert np.array_equal(c["Cp"], np.eye(10)[[1, 4]])
        assert not np.any(c["Cv"]) and not np.any(c["Nv1"]) and not np.any(c["Nv2"])
        assert len(c) == 10

    def test_too_small(self):
        with pytest.raises(ValueError):
            make_msd(5)


class TestDelayRod:
    def test_structure(self):
        sys = make_delay_rod(100)
        assert sys.dims == (100, 5, 2) and sys.template_tag == "time_delay"
        c = sys.coefficient_matrices()
        Ad = c["Ad"]
        assert np.count_nonzero(Ad - np.diag(np.diag(Ad))) == 0
        assert 0 <= np.diag(Ad).min() and np.diag(Ad).max() <= 2
        assert np.allclose(sys.K(0.0), -c["A"] - Ad)

    @pytest.mark.parametrize("n", [20, 100, 400])
    def test_linear_part_stable(self, n):
        A = make_delay_rod(n).coefficient_matrices()["A"]
        assert np.linalg.eigvals(A).real.max() < 0

    def test_sections(self):
        c = make_delay_rod(20, m=5, p=2).coefficient_matrices()
        assert np.array_equal(c["B"].sum(axis=0), np.full(5, 4.0))
        assert np.allclose(c["C"].sum(axis=1), 1.0)
        assert np.array_equal(c["N3"], -np.diag(c["B"][:, 2]))

    def test_divisibility(self):
        with pytest.raises(ValueError):
            make_delay_rod(101)


class TestHeat2D:
    def test_sizes_and_bilinear_terms(self):
        sys = make_heat2d(8, 8)
        assert sys.dims == (64, 7, 6)
        c = sys.coefficient_matrices()
        for i in range(1, 7):
            N = c[f"N{i}"]
            assert np.count_nonzero(N - np.diag(np.diag(N))) == 0
            assert np.diag(N).max() <= 0 and np.any(N)
        assert not np.any(c["N7"])

    def test_negative_definite(self):
        A = make_heat2d(8, 8).coefficient_matrices()["A"]
        assert np.linalg.eigvalsh((A + A.T) / 2).max() < 0

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            make_heat2d(3, 8)


def test_make_family_unknown():
    with pytest.raises(ValueError, match="msd, delay_rod, heat2d"):
        make_family("steel")
    assert set(FAMILIES) == {"msd", "delay_rod", "heat2d"}


def test_descriptor_recorded():
    d = make_family("delay_rod", 50).descriptor
    assert d["family"] == "delay_rod" and d["n"] == 50 and d["parameters"]["tau"] == 1.0


def test_random_system_deterministic():
    a, b = random_system(6, 2, 1, "time_delay", seed=3), random_system(6, 2, 1, "time_delay", seed=3)
    for (_, x), (_, y) in zip(a.coefficient_matrices().items(), b.coefficient_matrices().items()):
        assert np.array_equal(x, y)
    assert linear_parts(a)[2] is not None
