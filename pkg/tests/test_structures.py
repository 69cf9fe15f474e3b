import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bilintang.structures import (
    MatrixFunction, ScalarBasis, StructuredBilinearSystem, TemplateError, Term,
    delay_exponential, first_order, make_template, monomial, second_order, time_delay,
)

complex_points = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


def one(x=1.0):
    return np.array([[x]])


def quadratic():
    return MatrixFunction([Term(monomial(2), one(), "M"), Term(monomial(1), one(), "D"),
                           Term(monomial(0), one(), "K")])


def mixed_function(seed=0):
    rng = np.random.default_rng(seed)
    return MatrixFunction([
        Term(monomial(0), rng.standard_normal((3, 2)), "X0"),
        Term(monomial(1), rng.standard_normal((3, 2)), "X1", -0.5),
        Term(monomial(2), rng.standard_normal((3, 2)), "X2"),
        Term(delay_exponential(0.7), rng.standard_normal((3, 2)), "Xd", 2.0),
    ])


class TestScalarBasis:
    def test_monomial_degree_limit(self):
        with pytest.raises(ValueError):
            monomial(3)

    def test_delay_needs_positive_tau(self):
        with pytest.raises(ValueError):
            delay_exponential(0.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ScalarBasis("rational")

    def test_falling_factorial(self):
        assert monomial(2).derivative(3.0, 1) == 6.0
        assert monomial(2).derivative(5.0, 2) == 2.0
        assert monomial(2).derivative(5.0, 3) == 0.0

    def test_exponential_derivative(self):
        assert np.isclose(delay_exponential(1.0).derivative(0.0, 2), 1.0)
        assert np.isclose(delay_exponential(2.0).derivative(0.5, 3), -8 * np.exp(-1.0))

    def test_dict_round_trip(self):
        for b in (monomial(0), monomial(2), delay_exponential(0.25)):
            assert ScalarBasis.from_dict(b.to_dict()) == b


class TestMatrixFunction:
    def test_constant(self):
        f = MatrixFunction([Term(monomial(0), np.eye(2), "I")])
        assert f.is_constant
        assert np.array_equal(f(7 + 3j), np.eye(2))

    def test_first_order_pencil_at_zero(self):
        sys = first_order(one(), one(-1.0), [one(0.0)], one(), one())
        assert sys.K(0.0)[0, 0] == 1.0

    def test_quadratic_value(self):
        assert quadratic()(2.0)[0, 0] == 7.0

    def test_derivative_examples(self):
        f = MatrixFunction([Term(monomial(2), one(), "M")])
        assert f.derivative(3.0, 1)[0, 0] == 6.0
        assert f.derivative(1.5 + 2j, 3)[0, 0] == 0.0
        g = MatrixFunction([Term(delay_exponential(1.0), one(), "Ad")])
        assert np.isclose(g.derivative(0.0, 2)[0, 0], 1.0)

    def test_shape_mismatch(self):
        with pytest.raises(TemplateError):
            MatrixFunction([Term(monomial(0), np.eye(2), "a"), Term(monomial(1), np.eye(3), "b")])

    def test_empty_needs_shape(self):
        with pytest.raises(TemplateError):
            MatrixFunction([])
        assert MatrixFunction([], (2, 3))(1.0).shape == (2, 3)

    def test_coefficients_are_read_only(self):
        f = quadratic()
        with pytest.raises(ValueError):
            f.terms[0].matrix[0, 0] = 5.0

    def test_max_nonzero_order(self):
        assert quadratic().max_nonzero_order() == 2
        assert mixed_function().max_nonzero_order() is None

    @given(complex_points, st.integers(0, 3))
    def test_derivative_matches_central_difference(self, s, order):
        f = mixed_function()
        h = 1e-6 * max(1.0, abs(s))
        fd = (f.derivative(s + h, order) - f.derivative(s - h, order)) / (2 * h)
        exact = f.derivative(s, order + 1)
        assert np.linalg.norm(fd - exact) <= 1e-6 * max(1.0, np.linalg.norm(exact))

    @given(complex_points)
    def test_linear_in_coefficients(self, s):
        f, g = mixed_function(0), mixed_function(1)
        lhs, rhs = (f + g)(s), f(s) + g(s)
        assert np.linalg.norm(lhs - rhs) <= 1e-14 * max(1.0, np.linalg.norm(rhs))


class TestTemplates:
    def test_round_trip_first_order(self, rng):
        E, A, B, C = rng.random((3, 3)), rng.random((3, 3)), rng.random((3, 2)), rng.random((1, 3))
        N = [rng.random((3, 3)) for _ in range(2)]
        coeffs = first_order(E, A, N, B, C).coefficient_matrices()
        for name, mat in {"E": E, "A": A, "B": B, "C": C, "N1": N[0], "N2": N[1]}.items():
            assert np.array_equal(coeffs[name], mat)

    def test_second_order_pencil(self, rng):
        M, D, K = (rng.random((4, 4)) for _ in range(3))
        sys = second_order(M, D, K, [rng.random((4, 4))], None, rng.random((4, 1)), rng.random((2, 4)))
        s = 0.3 + 1.1j
        assert np.allclose(sys.K(s), s**2 * M + s * D + K)
        assert sys.template_tag == "second_order"
        assert set(sys.coefficient_matrices()) == {"M", "D", "K", "Np1", "Nv1", "Bu", "Cp", "Cv"}

    def test_second_order_velocity_output(self, rng):
        Cp, Cv = rng.random((1, 3)), rng.random((1, 3))
        sys = second_order(np.eye(3), np.eye(3), np.eye(3), [np.eye(3)], [2 * np.eye(3)],
                           np.ones((3, 1)), Cp, Cv)
        assert np.allclose(sys.C(2.0), Cp + 2.0 * Cv)
        assert np.allclose(sys.N[0](2.0), np.eye(3) + 4.0 * np.eye(3))

    def test_time_delay_scalar(self):
        sys = time_delay(one(0.0), one(0.0), [one()], one(), one(), tau=1.0)
        assert np.isclose(sys.K(1.0)[0, 0], 1.0)
        assert sys.tau == 1.0

    def test_time_delay_pencil(self, rng):
        A, Ad = rng.random((3, 3)), rng.random((3, 3))
        sys = time_delay(A, Ad, [np.eye(3)], np.ones((3, 1)), np.ones((1, 3)), tau=0.5)
        s = 1 + 2j
        assert np.allclose(sys.K(s), s * np.eye(3) - A - np.exp(-0.5 * s) * Ad)

    def test_shape_error_names_matrix(self):
        with pytest.raises(TemplateError, match="N1"):
            first_order(None, np.eye(3), [np.eye(2)], np.ones((3, 1)), np.ones((1, 3)))
        with pytest.raises(TemplateError, match="E"):
            first_order(np.eye(2), np.eye(3), [np.eye(3)], np.ones((3, 1)), np.ones((1, 3)))

    def test_bilinear_count_must_equal_m(self):
        with pytest.raises(TemplateError):
            first_order(None, np.eye(2), [np.eye(2)], np.ones((2, 2)), np.ones((1, 2)))

    def test_make_template_unknown_tag(self):
        with pytest.raises(TemplateError):
            make_template("descriptor")

    def test_system_shape_checks(self):
        sys = first_order(None, np.eye(2), [np.eye(2)], np.ones((2, 1)), np.ones((1, 2)))
        bad_C = MatrixFunction([Term(monomial(0), np.ones((1, 3)), "C")])
        with pytest.raises(TemplateError):
            StructuredBilinearSystem(bad_C, sys.K, sys.B, sys.N, "custom")

    def test_scaled_N(self):
        sys = first_order(None, np.eye(2), [np.eye(2), 2 * np.eye(2)], np.ones((2, 2)), np.ones((1, 2)))
        assert np.array_equal(sys.scaled_N(0.0, [1.0, 1.0]), 3 * np.eye(2))
        assert np.array_equal(sys.scaled_N(0.0, [1.0, 0.0]), np.eye(2))
        assert not np.any(sys.scaled_N(0.0, [0.0, 0.0]))
