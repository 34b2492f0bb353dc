import numpy as np
import pytest

from maxrank.core.certify import Verdict, relative_residual, verify
from maxrank.core.errors import NoSingularMember, PreconditionError
from maxrank.core.linalg import FieldTag, Tensor3, random_tensor
from maxrank.plugins.general_p.client import GeneralPPlugin, decompose_general_p
from maxrank.plugins.nonsquare_3.client import Nonsquare3Plugin, decompose_nonsquare_3
from maxrank.plugins.square_3.client import Square3Plugin, decompose_square_3
from maxrank.plugins.trivial.client import TrivialPlugin, decompose_trivial


@pytest.mark.parametrize("dims", [(1, 1, 1), (2, 3, 6), (3, 3, 9), (4, 2, 3)])
def test_trivial_is_exact(dims, field, tol):
    T = random_tensor(dims, field, seed=1)
    D = decompose_trivial(T)
    m, n, p = dims
    assert len(D) == min(m * n, m * p, n * p)
    assert relative_residual(T, D) < 1e-14


def test_trivial_skips_zero_fibers():
    cube = np.zeros((2, 2, 4))
    cube[0, 1, :] = [1.0, 2.0, 3.0, 4.0]
    D = decompose_trivial(Tensor3.from_cube(cube))
    assert len(D) == 1
    assert D.claimed_bound == 4


@pytest.mark.parametrize(
    "dims,limit",
    [((2, 2, 3), 4), ((3, 3, 5), 9), ((3, 4, 3), 7), ((3, 3, 4), 8), ((5, 3, 2), 6)],
)
def test_general_p_limits(dims, limit, field, tol):
    T = random_tensor(dims, field, seed=11)
    D = decompose_general_p(T, tol, seed=11)
    assert D.claimed_bound == limit
    assert len(D) <= limit
    assert relative_residual(T, D) < tol.residual_tol


def test_general_p_single_slice(tol):
    T = random_tensor((3, 4, 1), seed=2)
    D = decompose_general_p(T, tol)
    assert len(D) == 3
    assert relative_residual(T, D) < 1e-10


def test_general_p_zero_tensor(tol):
    D = decompose_general_p(Tensor3.zeros((3, 3, 4)), tol)
    assert len(D) == 0


@pytest.mark.parametrize("n", [2, 3, 5])
def test_square_3_bound(n, field, tol):
    if field is FieldTag.REAL and n % 2 == 0:
        pytest.skip("a random real span may have no singular member")
    T = random_tensor((n, n, 3), field, seed=n)
    D = decompose_square_3(T, tol, seed=n)
    assert len(D) <= 2 * n - 1
    assert verify(T, D, tol).verdict is Verdict.CERTIFIED


def test_square_3_complex_skew_example(skew_example_complex, tol):
    D = decompose_square_3(skew_example_complex, tol, seed=3)
    assert len(D) <= 7
    assert relative_residual(skew_example_complex, D) < tol.residual_tol


def test_square_3_real_skew_example_has_no_singular_member(skew_example_real, tol):
    with pytest.raises(NoSingularMember):
        decompose_square_3(skew_example_real, tol, seed=3, budget=32)


def test_square_3_uses_singular_hint(rng, tol):
    A1, A2 = rng.uniform(-1, 1, (2, 4, 4))
    A3 = np.outer(rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4))
    T = Tensor3.from_slices([A1, A2, A3])
    D = decompose_square_3(T, tol, seed=0, singular=[0.0, 0.0, 1.0], budget=0)
    assert len(D) <= 7
    assert relative_residual(T, D) < tol.residual_tol


@pytest.mark.parametrize("dims", [(2, 3, 3), (3, 5, 3), (4, 6, 3), (5, 3, 3)])
def test_nonsquare_3_bound(dims, field, tol):
    T = random_tensor(dims, field, seed=sum(dims))
    D = decompose_nonsquare_3(T, tol, seed=5)
    assert len(D) <= dims[0] + dims[1] - 1
    assert verify(T, D, tol).verdict is Verdict.CERTIFIED


def test_nonsquare_3_low_span_rank(rng, tol):
    # three rank-one slices span matrices of rank at most 3 < m
    slices = [np.outer(rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 6)) for _ in range(3)]
    T = Tensor3.from_slices(slices)
    D = decompose_nonsquare_3(T, tol, seed=5)
    assert len(D) <= 9
    assert relative_residual(T, D) < tol.residual_tol


def test_nonsquare_3_rejects_square(tol):
    with pytest.raises(PreconditionError):
        decompose_nonsquare_3(random_tensor((3, 3, 3), seed=0), tol)


def test_plugins_read_their_options(tol):
    T = random_tensor((3, 4, 3), seed=9)
    plugin = Nonsquare3Plugin({'span_samples': 8, 'search_budget': 8, 'max_attempts': 16})
    assert plugin.claimed_bound(T.dims, FieldTag.REAL) == 6
    outcome = plugin.execute({'tensor': T, 'tol': tol, 'seed': 9})
    assert outcome['status']['success']
    assert len(outcome['decomposition']) <= 6


def test_execute_wraps_method_errors(skew_example_real, tol):
    outcome = Square3Plugin({'search_budget': 8}).execute({'tensor': skew_example_real, 'tol': tol, 'seed': 1})
    assert not outcome['status']['success']
    assert outcome['status']['error'] == 'NoSingularMember'
    assert outcome['decomposition'] is None


def test_claimed_bounds():
    assert TrivialPlugin().claimed_bound((2, 3, 6), FieldTag.REAL) == 6
    assert GeneralPPlugin().claimed_bound((4, 4, 4), FieldTag.REAL) == 11
    assert Square3Plugin().claimed_bound((5, 5, 3), FieldTag.COMPLEX) == 9
