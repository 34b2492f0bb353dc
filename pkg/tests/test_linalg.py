import numpy as np
import pytest
from scipy.stats import ortho_group, unitary_group

from maxrank.core.errors import DimensionMismatch, FieldMismatch, PreconditionError
from maxrank.core.linalg import (
    EquivalenceTransform,
    FieldTag,
    Tensor3,
    Tolerances,
    apply_equivalence,
    apply_slice_mixing,
    diag_pattern,
    flattening_rank_lower_bound,
    normal_form_slice,
    numerical_rank,
    permute_modes,
    random_matrix,
    random_tensor,
    support,
    transpose_tensor,
    unfold,
)
from maxrank.models.decomposition import Decomposition, make_term


def test_field_tag_parse():
    assert FieldTag.parse("REAL") is FieldTag.REAL
    assert FieldTag.parse(FieldTag.COMPLEX) is FieldTag.COMPLEX
    with pytest.raises(FieldMismatch):
        FieldTag.parse("quaternion")


def test_real_tensor_rejects_complex_entries():
    with pytest.raises(FieldMismatch):
        Tensor3(np.ones((1, 2, 2)) * 1j, FieldTag.REAL)


def test_real_tensor_drops_rounding_imaginary_part():
    T = Tensor3(np.ones((1, 2, 2)) + 1e-14j, FieldTag.REAL)
    assert T.array.dtype == np.float64
    assert not np.any(T.slices.imag)


def test_tensor_rejects_nan():
    with pytest.raises(FieldMismatch):
        Tensor3(np.full((1, 2, 2), np.nan))


def test_tensor_dims_and_cube_layout():
    T = Tensor3.from_slices([np.arange(6).reshape(2, 3), np.ones((2, 3))])
    assert T.dims == (2, 3, 2)
    cube = T.to_cube()
    assert cube.shape == (2, 3, 2)
    assert cube[1, 2, 0] == 5
    assert Tensor3.from_cube(cube).equals(T)


def test_from_slices_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        Tensor3.from_slices([np.ones((2, 2)), np.ones((2, 3))])


def test_tensor_is_immutable():
    T = Tensor3.zeros((2, 2, 1))
    with pytest.raises(ValueError):
        T.slices[0, 0, 0] = 1.0
    arr = T.array
    arr[0, 0, 0] = 1.0
    assert T.is_zero()


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError):
        Tolerances(rank_tol=0.0)
    tol = Tolerances().with_overrides(residual_tol=1e-6, rank_tol=None)
    assert tol.residual_tol == 1e-6
    assert tol.rank_tol == Tolerances().rank_tol
    assert Tolerances.from_dict(tol.to_dict()) == tol


def test_numerical_rank(rng, tol):
    u = rng.standard_normal((5, 2))
    v = rng.standard_normal((2, 4))
    assert numerical_rank(u @ v, tol) == 2
    assert numerical_rank(np.zeros((3, 3)), tol) == 0
    assert numerical_rank(np.eye(3), tol) == 3


def test_support_is_relative(tol):
    M = np.array([[1.0, 1e-12], [0.0, 2.0]])
    pattern = support(M, tol)
    assert (0, 0) in pattern
    assert (0, 1) not in pattern
    assert len(pattern) == 2


def test_normal_form_slice(field, tol):
    T = random_tensor((3, 4, 3), field, seed=1)
    # rank-2 third slice
    arr = T.array
    arr[2] = np.outer(arr[2][:, 0], arr[2][0]) + np.outer(arr[2][:, 1], arr[2][1])
    T = Tensor3(arr, field)

    T1, E, r = normal_form_slice(T, 2, tol)
    assert r == 2
    np.testing.assert_allclose(T1.slice(2), diag_pattern(3, 4, 2))
    np.testing.assert_allclose(apply_equivalence(T, E).array, T1.array, atol=1e-10)


def test_pull_back_through_equivalence(rng, tol):
    L = rng.standard_normal((2, 2)) + 2 * np.eye(2)
    R = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    E = EquivalenceTransform.from_pair(L, R, tol)
    term = make_term(rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal(2))
    T = Tensor3(term.slices())

    image = apply_equivalence(T, E)
    D = Decomposition((make_term(L @ term.a, R.T @ term.b, term.c),), (2, 3, 2))
    np.testing.assert_allclose(D.reconstruct_array(), image.array, atol=1e-12)
    np.testing.assert_allclose(D.pull_back(E).reconstruct_array(), T.array, atol=1e-12)


def test_singular_factor_is_rejected(tol):
    with pytest.raises(PreconditionError):
        EquivalenceTransform.from_pair(np.ones((2, 2)), np.eye(2), tol)


def test_transpose_is_a_mode_permutation(field):
    T = random_tensor((2, 3, 4), field, seed=3)
    assert permute_modes(T, (1, 0, 2)).equals(transpose_tensor(T))
    assert permute_modes(T, (2, 0, 1)).dims == (4, 2, 3)
    with pytest.raises(DimensionMismatch):
        permute_modes(T, (0, 0, 1))


def test_slice_mixing_and_unmix(rng):
    T = random_tensor((2, 2, 3), seed=5)
    R = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    D = Decomposition(
        tuple(make_term(np.eye(2)[i], np.eye(2)[j], T.to_cube()[i, j]) for i in range(2) for j in range(2)),
        (2, 2, 3),
    )
    mixed = apply_slice_mixing(T, R)
    mixed_terms = Decomposition(tuple(make_term(t.a, t.b, R @ t.c) for t in D.terms), (2, 2, 3))
    np.testing.assert_allclose(mixed_terms.reconstruct_array(), mixed.array, atol=1e-12)
    np.testing.assert_allclose(mixed_terms.unmix(R).reconstruct_array(), T.array, atol=1e-12)


def test_unfold_shapes():
    T = random_tensor((2, 3, 4), seed=0)
    assert unfold(T, 0).shape == (2, 12)
    assert unfold(T, 1).shape == (3, 8)
    assert unfold(T, 2).shape == (4, 6)
    with pytest.raises(ValueError):
        unfold(T, 3)


def test_flattening_lower_bound_generic(tol):
    assert flattening_rank_lower_bound(random_tensor((2, 2, 4), seed=2), tol) == 4
    assert flattening_rank_lower_bound(random_tensor((3, 3, 3), seed=2), tol) == 3


def test_random_tensor_is_seeded(field):
    a = random_tensor((2, 3, 2), field, seed=7)
    b = random_tensor((2, 3, 2), field, seed=7)
    assert a.equals(b)
    assert np.all(np.abs(a.array.real) <= 1.0)


def _low_rank_tensor(rng, dims, terms, field):
    m, n, p = dims
    out = np.zeros((p, m, n), dtype=field.dtype)
    for _ in range(terms):
        a, b, c = (random_matrix(rng, (d,), field) for d in (m, n, p))
        out = out + np.einsum('k,i,j->kij', c, a, b)
    return Tensor3(out, field)


def test_equivalence_preserves_flattening_ranks(field, tol):
    rng = np.random.default_rng(77)
    for _ in range(100):
        dims = tuple(int(d) for d in rng.integers(1, 5, size=3))
        T = _low_rank_tensor(rng, dims, int(rng.integers(1, 5)), field)
        m, n, p = dims
        L = random_matrix(rng, (m, m), field) + 6 * np.eye(m)
        R = random_matrix(rng, (n, n), field) + 6 * np.eye(n)
        mix = random_matrix(rng, (p, p), field) + 6 * np.eye(p)
        image = apply_slice_mixing(apply_equivalence(T, EquivalenceTransform.from_pair(L, R, tol)), mix)
        assert flattening_rank_lower_bound(image, tol) == flattening_rank_lower_bound(T, tol)


@pytest.mark.parametrize("rank", [0, 1, 3, 5])
def test_numerical_rank_ignores_unitary_factors(rank, field, tol):
    rng = np.random.default_rng(rank)
    group = ortho_group if field is FieldTag.REAL else unitary_group
    M = random_matrix(rng, (6, rank), field) @ random_matrix(rng, (rank, 5), field)
    Q = group.rvs(6, random_state=rng)
    U = group.rvs(5, random_state=rng)
    assert numerical_rank(M, tol) == rank
    assert numerical_rank(Q @ M, tol) == rank
    assert numerical_rank(M @ U, tol) == rank
    assert numerical_rank(Q @ M @ U, tol) == rank
