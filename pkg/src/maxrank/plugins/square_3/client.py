"""
Square-3 Method - 2n - 1 terms from a singular member of the slice span

The singular combination is rotated into the third slice and brought to
Diag(E_r, O); after merging supports so that supp(A1) covers supp(A2) the
tensor falls into one of four cases:

1. A1 has a cell in the lower-right (n-r) x (n-r) block: move it to the
   corner and split with one preserved cell.
2. A column (row) beyond r vanishes: drop it, n x (n-1) x 3 is handled by
   the general method.
3. Some column (row) beyond r carries an independent pair: conjugate the
   leading block so the last two indices can be preserved.
4. Every pair is dependent: columns and rows beyond r are rank-one terms
   and the r x r x 3 core recurses.
"""
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from ...core.bounds import square_3_bound
from ...core.decomposer.blocks import permutation_transform, rotate_into_last_slice, swapped
from ...core.decomposer.lemmas import DEFAULT_SPREADS, conjugate_to_condition_b, decompose_use_ab
from ...core.errors import DimensionMismatch, MaxRankError, NoSingularMember
from ...core.genericity import DEFAULT_MAX_ATTEMPTS, generic_support_merge, unipotent_column_eliminator
from ...core.linalg import (
    DEFAULT_TOLERANCES,
    EquivalenceTransform,
    FieldTag,
    Tensor3,
    Tolerances,
    apply_equivalence,
    apply_slice_mixing,
    as_rng,
    diag_pattern,
    max_abs,
    normal_form_slice,
    numerical_rank,
    support,
    transpose_tensor,
)
from ...core.spectrum import DEFAULT_SEARCH_BUDGET, find_singular_combination
from ...models.decomposition import Decomposition, make_term
from ...utils import get_debugger
from ..base import MethodPlugin
from ..general_p.client import decompose_general_p


def merge_mixing(t: float, dtype: Any) -> np.ndarray:
    """Slice mixing A1 <- A1 + t A2"""
    R = np.eye(3, dtype=dtype)
    R[0, 1] = t
    return R


def with_slice(T: Tensor3, k: int, value: np.ndarray) -> Tensor3:
    arr = T.array
    arr[k] = value
    return Tensor3(arr, T.field)


def clear_block(T: Tensor3, rows: slice, cols: slice, slices: Sequence[int] = (0, 1)) -> Tensor3:
    arr = T.array
    for k in slices:
        arr[k][rows, cols] = 0
    return Tensor3(arr, T.field)


def rank_one_pair(u1: np.ndarray, u2: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """(u, (alpha1, alpha2)) with u_i = alpha_i u for a dependent pair, None when both vanish"""
    base = u1 if np.linalg.norm(u1) >= np.linalg.norm(u2) else u2
    norm2 = np.vdot(base, base)
    if norm2 == 0:
        return None
    alphas = np.array([np.vdot(base, u1) / norm2, np.vdot(base, u2) / norm2])
    return base, alphas


def independent_pair(A1: np.ndarray, A2: np.ndarray, index: Sequence[int], rows: int, tol: Tolerances) -> Optional[int]:
    """First column j in `index` with (A1[:rows, j], A2[:rows, j]) of rank two"""
    for j in index:
        if numerical_rank(np.column_stack([A1[:rows, j], A2[:rows, j]]), tol) == 2:
            return j
    return None


def condition_b_split(
    T: Tensor3,
    r: int,
    j: int,
    tol: Tolerances,
    rng: np.random.Generator,
    spreads: Sequence[float],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """
    Column j >= r of an m x n x 3 tensor with A3 = Diag(E_r, O) carries an
    independent pair; bring it to column r, conjugate the leading
    (r+1) x (r+1) blocks, move indices r-1, r to the end of the leading
    m x m block and split with two preserved cells.
    """
    m, n, _ = T.dims
    swap = permutation_transform(list(range(m)), swapped(n, r, j))
    T1 = apply_equivalence(T, swap)
    A = T1.array
    P = conjugate_to_condition_b(A[0][:r + 1, :r + 1], A[1][:r + 1, :r + 1], tol, rng, max_attempts, field=T.field)

    P_inv = sla.inv(P)
    left = sla.block_diag(P, np.eye(m - r))
    right = sla.block_diag(P_inv, np.eye(n - r))
    conj = EquivalenceTransform(left, right, sla.block_diag(P_inv, np.eye(m - r)), sla.block_diag(P, np.eye(n - r)))
    T2 = with_slice(apply_equivalence(T1, conj), 2, diag_pattern(m, n, r, T.field.dtype))

    order = [k for k in range(m) if k not in (r - 1, r)] + [r - 1, r]
    move = permutation_transform(order, order + list(range(m, n)))
    T3 = apply_equivalence(T2, move)

    split = decompose_use_ab(T3, tol, variant="b", spreads=spreads)
    return split.pull_back(move).pull_back(conj).pull_back(swap)


def singular_core_decomposition(
    core: Tensor3,
    tol: Tolerances,
    rng: np.random.Generator,
    budget: int,
    spreads: Sequence[float],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """r x r x 3 core: recurse with A1 as the singular hint, else the general method"""
    hint = np.array([1.0, 0.0, 0.0], dtype=core.field.dtype)
    try:
        return decompose_square_3(core, tol, rng, singular=hint, budget=budget, spreads=spreads,
                                 max_attempts=max_attempts)
    except MaxRankError as exc:
        get_debugger().debug("square_3", "Core recursion failed", size=core.dims[0], error=type(exc).__name__)
        arr = core.array
        nonzero = [k for k in range(3) if np.any(arr[k])]
        if not nonzero:
            return Decomposition.empty(core.dims, core.field)
        sub = decompose_general_p(Tensor3(arr[nonzero], core.field), tol, rng, spreads)
        return sub.embedded(core.dims, slices=nonzero).tagged(notes=[f"fallback:{type(exc).__name__}"])


def dependent_border_split(
    T: Tensor3,
    r: int,
    tol: Tolerances,
    rng: np.random.Generator,
    budget: int,
    spreads: Sequence[float],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """
    All pairs beyond r are dependent: eliminate a column of A1[:r, :r+1],
    then the r x r core plus one term per column and per row beyond r.
    """
    n = T.dims[0]
    A = T.array
    V, col = unipotent_column_eliminator(A[0][:r, :r + 1], tol)
    big = sla.block_diag(V, np.eye(n - r - 1))
    elim = EquivalenceTransform(np.eye(n), big, np.eye(n), sla.inv(big))
    T1 = apply_equivalence(T, elim)
    A = T1.array

    core = Tensor3(A[:, :r, :r], T.field)
    result = singular_core_decomposition(core, tol, rng, budget, spreads, max_attempts).embedded((n, n, 3), rows=range(r), cols=range(r))

    border = []
    unit = np.eye(n)
    for j in range(r, n):
        pair = rank_one_pair(A[0][:r, j], A[1][:r, j])
        if pair is not None:
            u, alphas = pair
            border.append(make_term(np.concatenate([u, np.zeros(n - r)]), unit[j], [alphas[0], alphas[1], 0.0]))
    for i in range(r, n):
        pair = rank_one_pair(A[0][i, :r], A[1][i, :r])
        if pair is not None:
            w, betas = pair
            border.append(make_term(unit[i], np.concatenate([w, np.zeros(n - r)]), [betas[0], betas[1], 0.0]))

    result = result.combined(Decomposition(tuple(border), (n, n, 3), T.field, ("border",)))
    get_debugger().debug("square_3", "Core and border split", n=n, r=r, eliminated=col, border=len(border))
    return result.pull_back(elim)


def square_cases(
    T: Tensor3,
    r: int,
    tol: Tolerances,
    rng: np.random.Generator,
    budget: int,
    spreads: Sequence[float],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """n x n x 3 with A3 = Diag(E_r, O), 1 <= r < n and supp(A1) covering supp(A2)"""
    n = T.dims[0]
    debugger = get_debugger()
    A1 = T.slice(0)
    supp = support(A1, tol) if max_abs(A1) else None
    cells = supp.cells if supp is not None else frozenset()

    corner = [(i, j) for (i, j) in cells if i >= r and j >= r]
    if corner:
        i, j = max(corner, key=lambda c: abs(A1[c]))
        move = permutation_transform(swapped(n, i, n - 1), swapped(n, j, n - 1))
        debugger.debug("square_3", "Corner cell case", n=n, r=r, cell=f"{i},{j}")
        return decompose_use_ab(apply_equivalence(T, move), tol, variant="a", spreads=spreads).pull_back(move)

    T = clear_block(T, slice(r, n), slice(r, n))
    A = T.array

    for j in range(r, n):
        if not any((i, j) in cells for i in range(n)):
            keep = [k for k in range(n) if k != j]
            debugger.debug("square_3", "Zero column case", n=n, r=r, column=j)
            sub = decompose_general_p(Tensor3(A[:, :, keep], T.field), tol, rng, spreads)
            return sub.embedded((n, n, 3), cols=keep)
    for i in range(r, n):
        if not any((i, j) in cells for j in range(n)):
            keep = [k for k in range(n) if k != i]
            debugger.debug("square_3", "Zero row case", n=n, r=r, row=i)
            sub = decompose_general_p(Tensor3(A[:, keep, :], T.field), tol, rng, spreads)
            return sub.embedded((n, n, 3), rows=keep)

    j = independent_pair(A[0], A[1], range(r, n), r, tol)
    if j is not None:
        debugger.debug("square_3", "Independent column pair case", n=n, r=r, column=j)
        return condition_b_split(T, r, j, tol, rng, spreads, max_attempts)
    i = independent_pair(A[0].T, A[1].T, range(r, n), r, tol)
    if i is not None:
        debugger.debug("square_3", "Independent row pair case", n=n, r=r, row=i)
        return condition_b_split(transpose_tensor(T), r, i, tol, rng, spreads, max_attempts).transposed()

    return dependent_border_split(T, r, tol, rng, budget, spreads, max_attempts)


def _valid_hint(T: Tensor3, coeffs: Optional[np.ndarray], tol: Tolerances) -> bool:
    if coeffs is None:
        return False
    M = np.tensordot(np.asarray(coeffs), T.array, axes=(0, 0))
    return max_abs(M) > tol.support_tol * max_abs(T.array) and numerical_rank(M, tol) < T.dims[0]


def decompose_square_3(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: Any = None,
    singular: Optional[Any] = None,
    budget: int = DEFAULT_SEARCH_BUDGET,
    spreads: Sequence[float] = DEFAULT_SPREADS,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """
    At most 2n - 1 terms for an n x n x 3 tensor whose span has a nonzero singular member.

    Args:
        singular: Coefficients of a known singular member; searched for when
            missing or not singular

    Raises:
        NoSingularMember: no singular member was supplied or found
    """
    m, n, p = T.dims
    if p != 3 or m != n:
        raise DimensionMismatch(f"Expected an n x n x 3 tensor, got {T.dims}")
    bound = square_3_bound(n)
    rng = as_rng(seed)

    if T.is_zero():
        return Decomposition.empty(T.dims, T.field, ("square_3",)).tagged(bound=bound)
    if n == 1:
        term = make_term([1.0], [1.0], T.array[:, 0, 0])
        return Decomposition((term,), T.dims, T.field, ("square_3",), claimed_bound=1)

    coeffs = None if singular is None else T.field.coerce(np.asarray(singular).ravel(), rel_tol=1e-8)
    if not _valid_hint(T, coeffs, tol):
        coeffs = find_singular_combination(T, tol, budget, rng)
    if coeffs is None:
        raise NoSingularMember(f"No nonzero singular member found in the span of the {n}x{n}x3 slices")

    T1, R = rotate_into_last_slice(T, coeffs)
    T2, E, r = normal_form_slice(T1, 2, tol)
    if r == 0 or r == n:
        raise NoSingularMember(f"Combination has rank {r}, expected 0 < r < {n}")

    t, _ = generic_support_merge(T2.slice(0), T2.slice(1), tol)
    R2 = merge_mixing(t, T.field.dtype)
    T3 = apply_slice_mixing(T2, R2)
    T3 = with_slice(T3, 2, diag_pattern(n, n, r, T.field.dtype))

    result = square_cases(T3, r, tol, rng, budget, spreads, max_attempts)
    return result.unmix(R2).pull_back(E).unmix(R).tagged("square_3", bound=bound)


class Square3Plugin(MethodPlugin):
    """n x n x 3; fails with NoSingularMember when the span has no singular member"""

    def __init__(self, config=None):
        super().__init__(config)
        self.name = "square_3"

    def claimed_bound(self, dims: Sequence[int], field: FieldTag) -> int:
        return square_3_bound(dims[0])

    def decompose(self, T: Tensor3, tol: Tolerances = DEFAULT_TOLERANCES, seed: Any = None) -> Decomposition:
        budget = int(self._option('search_budget', DEFAULT_SEARCH_BUDGET))
        spreads = tuple(self._option('retry_spreads', DEFAULT_SPREADS))
        max_attempts = int(self._option('max_attempts', DEFAULT_MAX_ATTEMPTS))
        return decompose_square_3(T, tol, seed, budget=budget, spreads=spreads, max_attempts=max_attempts)
