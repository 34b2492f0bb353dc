import numpy as np
import pytest

from maxrank.core.errors import DimensionMismatch, SpectrumError
from maxrank.core.linalg import FieldTag, Tensor3, Tolerances, numerical_rank, random_tensor
from maxrank.core.spectrum import (
    DetEvaluator,
    PolynomialF,
    det_polynomial_on_plane,
    distinct_in_field,
    eigenvalues,
    find_singular_combination,
    max_span_rank,
    pencil_spectrum,
    polynomial_roots,
    real_roots,
)


def test_eigenvalues_of_rotation_are_complex():
    values = eigenvalues([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(sorted(values, key=lambda v: v.imag), [-1j, 1j], atol=1e-12)


def test_pencil_spectrum_distinct_over_real(tol):
    spectrum = pencil_spectrum(np.eye(3), np.diag([1.0, 2.0, 3.0]), tol)
    assert spectrum.field is FieldTag.REAL
    assert spectrum.margin == pytest.approx(1.0)
    assert distinct_in_field(spectrum, tol)


def test_pencil_spectrum_complex_roots_fail_over_real(tol):
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert not distinct_in_field(pencil_spectrum(np.eye(2), rotation, tol), tol)
    assert distinct_in_field(pencil_spectrum(np.eye(2), rotation, tol, field=FieldTag.COMPLEX), tol)


def test_pencil_spectrum_repeated_root(tol):
    assert not pencil_spectrum(np.eye(2), np.eye(2), tol).is_distinct(tol)


def test_pencil_spectrum_singular_leading_matrix(tol):
    with pytest.raises(SpectrumError):
        pencil_spectrum(np.zeros((2, 2)), np.eye(2), tol)
    with pytest.raises(DimensionMismatch):
        pencil_spectrum(np.eye(2), np.eye(3), tol)


def test_polynomial_roots(tol):
    # (t - 1)(t - 2)(t^2 + 1)
    P = PolynomialF(np.polynomial.polynomial.polyfromroots([1, 2, 1j, -1j]).real)
    assert len(polynomial_roots(P, tol)) == 4
    np.testing.assert_allclose(real_roots(P, tol), [1.0, 2.0], atol=1e-9)


def test_polynomial_degree_trims_noise():
    P = PolynomialF(np.array([1.0, 2.0, 1e-15]))
    assert P.degree(1e-9) == 1
    assert PolynomialF(np.zeros(3)).degree() == -1


def test_det_polynomial_on_line(rng):
    T = random_tensor((3, 3, 2), seed=11)
    P = det_polynomial_on_plane(T, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    A1, A2 = T.array
    for t in rng.uniform(-2, 2, size=5):
        assert P(t) == pytest.approx(np.linalg.det(A1 + t * A2), rel=1e-8, abs=1e-10)


def test_det_evaluator_on_plane(skew_example_real, rng):
    det = det_polynomial_on_plane(skew_example_real, list(np.eye(3)))
    assert isinstance(det, DetEvaluator)
    for x, y, z in rng.uniform(-1, 1, size=(10, 3)):
        assert det(x, y, z).real == pytest.approx((x * x + y * y + z * z) ** 2, rel=1e-9)
    with pytest.raises(DimensionMismatch):
        det(1.0, 2.0)


def test_det_polynomial_needs_square():
    with pytest.raises(DimensionMismatch):
        det_polynomial_on_plane(random_tensor((2, 3, 2), seed=0), [np.ones(2), np.ones(2)])


def test_singular_combination_absent_over_real(skew_example_real, tol):
    assert find_singular_combination(skew_example_real, tol, budget=64, rng=1) is None


def test_singular_combination_present_over_complex(skew_example_complex, tol):
    coeffs = find_singular_combination(skew_example_complex, tol, budget=64, rng=1)
    assert coeffs is not None
    M = np.tensordot(coeffs, skew_example_complex.array, axes=(0, 0))
    assert np.max(np.abs(M)) > 0
    assert numerical_rank(M, tol) < 4


def test_singular_combination_odd_real(tol):
    # an odd-degree real determinant polynomial always has a real root
    T = random_tensor((3, 3, 3), FieldTag.REAL, seed=4)
    coeffs = find_singular_combination(T, tol, rng=4)
    assert coeffs is not None
    assert numerical_rank(np.tensordot(coeffs, T.array, axes=(0, 0)), tol) < 3


def test_singular_slice_found_directly(tol):
    T = Tensor3.from_slices([np.eye(2), np.diag([1.0, 0.0])])
    coeffs = find_singular_combination(T, tol)
    np.testing.assert_allclose(coeffs, [0.0, 1.0])


def test_zero_tensor_has_no_singular_member(tol):
    assert find_singular_combination(Tensor3.zeros((2, 2, 3)), tol) is None


def test_max_span_rank(tol):
    rank_one = [np.outer([1.0, 2.0, 0.0], [0.0, 1.0, 1.0]), np.outer([0.0, 1.0, 1.0], [1.0, 0.0, 0.0])]
    T = Tensor3.from_slices(rank_one)
    r, coeffs = max_span_rank(T, tol, rng=0)
    assert r == 2
    assert numerical_rank(np.tensordot(coeffs, T.array, axes=(0, 0)), tol) == 2
    assert max_span_rank(random_tensor((3, 5, 3), seed=0), Tolerances(), rng=0)[0] == 3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_singular_combination_always_present_over_complex(n, tol):
    for seed in range(34):
        T = random_tensor((n, n, 3), FieldTag.COMPLEX, seed=1000 * n + seed)
        coeffs = find_singular_combination(T, tol, rng=seed)
        assert coeffs is not None, seed
        M = np.tensordot(coeffs, T.array, axes=(0, 0))
        assert np.max(np.abs(M)) > 0
        assert numerical_rank(M, tol) < n
