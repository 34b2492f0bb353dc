import numpy as np
import pytest

from maxrank.core.errors import EpsilonExhausted, PreconditionError
from maxrank.core.linalg import FieldTag, Tolerances, numerical_rank, random_matrix
from maxrank.core.perturb import (
    EpsilonCandidate,
    epsilon_search,
    perturb_to_distinct,
    perturb_with_anchor,
    variant_b_applicable,
)
from maxrank.core.spectrum import pencil_spectrum


def _check_distinct(A, B, pert, field, tol):
    spectrum = pencil_spectrum(A + pert.X, B + pert.Y, tol, field=field)
    assert numerical_rank(A + pert.X, tol) == A.shape[0]
    assert spectrum.margin > tol.margin_tol
    assert spectrum.is_distinct(tol)


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_perturb_to_distinct_random(n, field, rng, tol):
    A = random_matrix(rng, (n, n), field)
    B = random_matrix(rng, (n, n), field)
    pert = perturb_to_distinct(A, B, tol=tol, field=field)
    assert np.count_nonzero(pert.X - np.diag(np.diag(pert.X))) == 0
    _check_distinct(A, B, pert, field, tol)


def test_perturb_fixes_singular_pair(tol):
    A = np.zeros((3, 3))
    B = np.zeros((3, 3))
    pert = perturb_to_distinct(A, B, tol=tol, field=FieldTag.REAL)
    _check_distinct(A, B, pert, FieldTag.REAL, tol)


def test_preserved_cell_stays_exactly_zero(rng, tol):
    A = random_matrix(rng, (4, 4))
    B = random_matrix(rng, (4, 4))
    A[3, 3] = 1.0
    pert = perturb_to_distinct(A, B, preserved=[3], tol=tol, field=FieldTag.REAL)
    assert pert.X[3, 3] == 0
    assert pert.Y[3, 3] == 0
    assert pert.preserved == frozenset({3})
    _check_distinct(A, B, pert, FieldTag.REAL, tol)


def test_preserved_pair_variant_b(rng, tol):
    A = random_matrix(rng, (4, 4))
    B = random_matrix(rng, (4, 4))
    A[3, 3] = B[3, 3] = 0.0
    A[2, 3], A[3, 2] = 1.0, 1.0
    B[2, 3], B[3, 2] = 2.0, -1.0
    assert variant_b_applicable(A, B, tol)
    pert = perturb_to_distinct(A, B, preserved=[2, 3], tol=tol, field=FieldTag.REAL)
    assert np.all(np.diag(pert.X)[2:] == 0)
    assert np.all(np.diag(pert.Y)[2:] == 0)
    _check_distinct(A, B, pert, FieldTag.REAL, tol)


def test_variant_b_needs_distinct_ratios(tol):
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    B = np.array([[0.0, 2.0], [2.0, 0.0]])
    assert not variant_b_applicable(A, B, tol)
    B[1, 0] = -2.0
    assert variant_b_applicable(A, B, tol)


def test_singular_preserved_block_is_rejected(tol):
    A = np.eye(3)
    A[2, 2] = 0.0
    with pytest.raises(PreconditionError):
        perturb_to_distinct(A, np.eye(3), preserved=[2], tol=tol)


def test_anchored_perturbation(rng, tol):
    n = 4
    A = random_matrix(rng, (n, n))
    B = random_matrix(rng, (n, n))
    a = np.array([1.0, -2.0, 0.5, 3.0])
    b = np.array([2.0, 1.0, -1.0, 0.25])
    pert = perturb_with_anchor(A, B, a, b, tol=tol)
    np.testing.assert_allclose((A + pert.X) @ pert.p, a, atol=1e-7)
    np.testing.assert_allclose((B + pert.Y) @ pert.p, b, atol=1e-7)
    assert pencil_spectrum(A + pert.X, B + pert.Y, tol).is_distinct(tol)


def test_anchor_with_zero_entry_is_rejected(rng, tol):
    A = random_matrix(rng, (3, 3))
    with pytest.raises(PreconditionError):
        perturb_with_anchor(A, A, [1.0, 0.0, 1.0], [1.0, 2.0, 3.0], tol=tol)


def test_anchor_ratios_must_differ(rng, tol):
    A = random_matrix(rng, (3, 3))
    B = random_matrix(rng, (3, 3))
    a = np.array([1.0, 2.0, -1.0])
    with pytest.raises(PreconditionError, match="pairwise distinct"):
        perturb_with_anchor(A, B, a, 3.0 * a, tol=tol)
    pert = perturb_with_anchor(A, B, a, 3.0 * a, tol=tol, distinct=False)
    np.testing.assert_allclose((B + pert.Y) @ pert.p, 3.0 * a, rtol=1e-8)


def test_tiny_anchors_hold_relatively(rng, tol):
    n = 3
    A = random_matrix(rng, (n, n))
    B = random_matrix(rng, (n, n))
    a = 1e-7 * np.array([1.0, -2.0, 0.5])
    b = 1e-7 * np.array([2.0, 1.0, -1.0])
    pert = perturb_with_anchor(A, B, a, b, tol=tol)
    for lhs, rhs in (((A + pert.X) @ pert.p, a), ((B + pert.Y) @ pert.p, b)):
        assert np.linalg.norm(lhs - rhs) <= tol.residual_tol * np.linalg.norm(rhs)


def test_epsilon_search_exhausts():
    tol = Tolerances(eps_floor=1e-3)
    with pytest.raises(EpsilonExhausted) as excinfo:
        epsilon_search(lambda eps: EpsilonCandidate(nonsingular=False), tol)
    assert 0 < excinfo.value.last_epsilon < 1e-2


def test_epsilon_search_accepts_first_qualifying():
    assert epsilon_search(lambda eps: EpsilonCandidate(nonsingular=eps < 0.3), Tolerances()) == 0.25
