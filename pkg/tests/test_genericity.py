from itertools import combinations

import numpy as np
import pytest

from maxrank.core.errors import GenericityExhausted, PreconditionError
from maxrank.core.genericity import (
    GenericityRequest,
    generic_support_merge,
    merge_sequence,
    randomize_nonvanishing,
    unipotent_column_eliminator,
)
from maxrank.core.linalg import FieldTag, numerical_rank, support


def test_merge_sequence_order():
    assert list(merge_sequence(6)) == [1, -1, 2, -2, 3, -3]


def test_randomize_nonvanishing_meets_every_predicate(field, tol):
    v = np.array([1.0, 0.0, 0.0, 0.0])
    w = np.array([0.0, 0.0, 1.0, 0.0])
    M = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    req = GenericityRequest(dim=4, vectors=(v,), covectors=(w,), rank2_left=(M,), seed=3, field=field)
    P = randomize_nonvanishing(req, tol)
    P_inv = np.linalg.inv(P)

    assert numerical_rank(P, tol) == 4
    assert np.all(np.abs(P @ v) > 0)
    assert np.all(np.abs(w @ P_inv) > 0)
    N = P @ M
    for i, j in combinations(range(4), 2):
        assert abs(N[i, 0] * N[j, 1] - N[j, 0] * N[i, 1]) > 0


def test_randomize_nonvanishing_is_seeded(tol):
    req = GenericityRequest(dim=3, vectors=(np.ones(3),), seed=9)
    np.testing.assert_array_equal(randomize_nonvanishing(req, tol), randomize_nonvanishing(req, tol))


def test_randomize_rejects_bad_request(tol):
    with pytest.raises(PreconditionError):
        randomize_nonvanishing(GenericityRequest(dim=2, vectors=(np.zeros(2),)), tol)
    with pytest.raises(PreconditionError):
        randomize_nonvanishing(GenericityRequest(dim=2, rank2_left=(np.ones((2, 2)),)), tol)


def test_randomize_exhausts_on_impossible_request(tol):
    with pytest.raises(GenericityExhausted):
        randomize_nonvanishing(GenericityRequest(dim=2, vectors=(np.ones(2),)), tol, max_attempts=0)


def test_generic_support_merge(tol):
    A1 = np.array([[1.0, 0.0], [1.0, 0.0]])
    A2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    t, merged = generic_support_merge(A1, A2, tol)
    assert t == -1.0
    assert support(merged, tol).issuperset(support(A1, tol))
    assert support(merged, tol).issuperset(support(A2, tol))


def test_generic_support_merge_exhausts(tol):
    # cell k cancels exactly at the k-th candidate t
    A1 = -np.array([list(merge_sequence())], dtype=float)
    A2 = np.ones_like(A1)
    with pytest.raises(GenericityExhausted):
        generic_support_merge(A1, A2, tol)


def test_unipotent_column_eliminator(rng, tol):
    M = rng.standard_normal((3, 4))
    M[:, 1] = 2.0 * M[:, 2] - M[:, 3]
    V, j = unipotent_column_eliminator(M, tol)
    assert j == 1
    np.testing.assert_allclose((M @ V)[:, j], 0.0, atol=1e-10)
    np.testing.assert_allclose(np.diag(V), 1.0)
    np.testing.assert_allclose(np.triu(V, 1), 0.0)


def test_unipotent_column_eliminator_independent(tol):
    with pytest.raises(PreconditionError):
        unipotent_column_eliminator(np.eye(3), tol)


def test_unipotent_eliminates_zero_last_column(tol):
    M = np.array([[1.0, 0.0], [0.0, 0.0]])
    V, j = unipotent_column_eliminator(M, tol)
    assert j == 1
    np.testing.assert_array_equal(V, np.eye(2))


def test_support_merge_keeps_the_pair_span(rng, tol):
    for _ in range(20):
        A1 = rng.standard_normal((3, 4)) * (rng.random((3, 4)) < 0.6)
        A2 = rng.standard_normal((3, 4)) * (rng.random((3, 4)) < 0.6)
        t, merged = generic_support_merge(A1, A2, tol)
        np.testing.assert_allclose(merged - t * A2, A1, atol=1e-12)
        before = np.stack([A1.ravel(), A2.ravel()])
        after = np.stack([merged.ravel(), A2.ravel()])
        assert numerical_rank(after, tol) == numerical_rank(before, tol)
        assert numerical_rank(np.vstack([before, after]), tol) == numerical_rank(before, tol)
