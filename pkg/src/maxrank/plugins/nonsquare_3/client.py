"""
Non-square-3 Method - m + n - 1 terms for m x n x 3 with m < n

A member of maximal rank r in the slice span is rotated into the third
slice and brought to Diag(E_r, O). The lower-right block of the other
slices is then zero (otherwise a member of larger rank exists and the
setup restarts with it). After the support merge:

a. a column beyond r vanishes: m x (n-1) x 3 by the general method;
b. every tail column j >= m carries a dependent pair: eliminate one column
   of the leading m x (m+1) block, the m x m core goes to the square
   method and each tail column is one term;
c. r = m and a tail column carries an independent pair: a generic
   conjugation makes that column an anchor of the perturbed pencil;
d. r < m: a vanishing row beyond r goes to the general method, otherwise
   the last two leading indices are preserved as in the square case.
"""
from typing import Any, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from ...core.bounds import nonsquare_3_bound
from ...core.certify import relative_residual
from ...core.decomposer.blocks import decompose_diagonal_tensor, rotate_into_last_slice
from ...core.decomposer.lemmas import DEFAULT_SPREADS, eliminate_anchored_columns
from ...core.errors import DimensionMismatch, EpsilonExhausted, GenericityExhausted, PreconditionError, SpectrumError
from ...core.genericity import (
    DEFAULT_MAX_ATTEMPTS,
    MERGE_CANDIDATES,
    GenericityRequest,
    generic_support_merge,
    merge_sequence,
    randomize_nonvanishing,
    unipotent_column_eliminator,
)
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
from ...core.perturb import perturb_with_anchor
from ...core.spectrum import DEFAULT_SEARCH_BUDGET, max_span_rank
from ...models.decomposition import Decomposition, make_term
from ...utils import get_debugger
from ..base import MethodPlugin
from ..general_p.client import decompose_general_p
from ..square_3.client import (
    clear_block,
    condition_b_split,
    independent_pair,
    merge_mixing,
    rank_one_pair,
    singular_core_decomposition,
    with_slice,
)

# Redraws of the anchoring conjugator, and the share of residual_tol a split may use
ANCHOR_REDRAWS = 8
ANCHOR_RESIDUAL_SHARE = 0.01
# Full reruns with the advanced generator when the assembled split is inaccurate
NONSQUARE_RUNS = 3


def _block_is_zero(T: Tensor3, r: int, tol: Tolerances) -> bool:
    scale = max(max_abs(T.array), 1.0)
    return all(max_abs(T.slice(k)[r:, r:]) <= tol.support_tol * scale for k in (0, 1))


def _rank_raising_direction(T: Tensor3, r: int, tol: Tolerances) -> np.ndarray:
    """d with rank(sum d_k A_k) > r, found along A3 + t A_k"""
    for k in (0, 1):
        for t in merge_sequence():
            if numerical_rank(T.slice(2) + t * T.slice(k), tol) > r:
                d = np.zeros(3, dtype=T.field.dtype)
                d[2] = 1.0
                d[k] = t
                return d
    raise GenericityExhausted(f"No member of rank above {r} along the third slice", attempts=2 * MERGE_CANDIDATES)


def prepare(
    T: Tensor3,
    tol: Tolerances,
    rng: np.random.Generator,
    samples: int,
) -> Tuple[Tensor3, EquivalenceTransform, np.ndarray, np.ndarray, int]:
    """
    Bring an m x n x 3 tensor to A3 = Diag(E_r, O) with r maximal in the span,
    a zero lower-right block in A1, A2 and supp(A1) covering supp(A2).

    Returns:
        (tensor, equivalence, first mixing, merge mixing, r)
    """
    m, n, _ = T.dims
    r, coeffs = max_span_rank(T, tol, rng, samples)
    for _ in range(m + 1):
        T1, R = rotate_into_last_slice(T, coeffs)
        T2, E, r = normal_form_slice(T1, 2, tol)
        t, _ = generic_support_merge(T2.slice(0), T2.slice(1), tol)
        R2 = merge_mixing(t, T.field.dtype)
        T3 = with_slice(apply_slice_mixing(T2, R2), 2, diag_pattern(m, n, r, T.field.dtype))
        if r == m or _block_is_zero(T3, r, tol):
            return clear_block(T3, slice(r, m), slice(r, n)), E, R, R2, r
        d = _rank_raising_direction(T3, r, tol)
        coeffs = (R2 @ R).T @ d
        get_debugger().debug("nonsquare_3", "Span rank raised", r=r)
    raise GenericityExhausted("Span rank estimate did not settle", attempts=m + 1)


def _anchored_pieces(T: Tensor3, j: int, P: np.ndarray, tol: Tolerances) -> Tuple[Decomposition, float]:
    """Pencil with anchored column j plus the diagonal remainder, after conjugating by P"""
    m, n, _ = T.dims
    P_inv = sla.inv(P)
    right = sla.block_diag(P_inv, np.eye(n - m))
    conj = EquivalenceTransform(P, right, P_inv, sla.block_diag(P, np.eye(n - m)))
    T1 = with_slice(apply_equivalence(T, conj), 2, diag_pattern(m, n, m, T.field.dtype))
    B1, B2, _ = T1.array

    pert = perturb_with_anchor(B1[:, :m], B2[:, :m], B1[:, j], B2[:, j], tol, field=T.field)
    tail = np.zeros((m, n - m), dtype=T.field.dtype)
    pencil = eliminate_anchored_columns(
        B1 + np.hstack([pert.X, tail]), B2 + np.hstack([pert.Y, tail]), [(j, pert.p)], tol, field=T.field
    ).embedded((m, n, 3), slices=[0, 1])
    remainder = decompose_diagonal_tensor(
        [np.hstack([-pert.X, tail]), np.hstack([-pert.Y, tail]), diag_pattern(m, n, m, T.field.dtype)],
        tol,
        field=T.field,
    )
    return pencil.combined(remainder).pull_back(conj), pert.epsilon


def anchored_split(
    T: Tensor3,
    j: int,
    tol: Tolerances,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    redraws: int = ANCHOR_REDRAWS,
) -> Decomposition:
    """
    r = m and column j >= m with an independent pair (a, b).

    A conjugator whose split reconstructs T with a residual above
    ANCHOR_RESIDUAL_SHARE * residual_tol is redrawn; after `redraws` draws
    the most accurate split within residual_tol is kept.

    Raises:
        GenericityExhausted: no conjugator in `redraws` draws gave an accurate split
    """
    m, n, _ = T.dims
    A = T.array
    a, b = A[0][:, j], A[1][:, j]
    request = GenericityRequest(dim=m, vectors=(a,), rank2_left=(np.column_stack([a, b]),), seed=rng, field=T.field)
    debugger = get_debugger()
    limit = ANCHOR_RESIDUAL_SHARE * tol.residual_tol
    best: Optional[Tuple[float, Decomposition]] = None

    for attempt in range(1, redraws + 1):
        P = randomize_nonvanishing(request, tol, max_attempts)
        try:
            result, epsilon = _anchored_pieces(T, j, P, tol)
        except (EpsilonExhausted, SpectrumError, PreconditionError) as exc:
            debugger.debug("nonsquare_3", "Anchored split failed, redrawing", attempt=attempt, error=type(exc).__name__)
            continue
        residual = relative_residual(T, result)
        if residual <= limit:
            debugger.debug("nonsquare_3", "Anchored column split", m=m, n=n, column=j, epsilon=epsilon,
                           attempt=attempt)
            return result
        if best is None or residual < best[0]:
            best = (residual, result)
        debugger.debug("nonsquare_3", "Anchored split inaccurate, redrawing", attempt=attempt, residual=residual)

    if best is not None and best[0] <= tol.residual_tol:
        return best[1]
    raise GenericityExhausted(f"No accurate anchored split of column {j} in {redraws} draws", attempts=redraws)


def dependent_tail_split(
    T: Tensor3,
    tol: Tolerances,
    rng: np.random.Generator,
    budget: int,
    spreads: Sequence[float],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """Every tail column j >= m carries a dependent pair"""
    m, n, _ = T.dims
    V, col = unipotent_column_eliminator(T.slice(0)[:, :m + 1], tol)
    big = sla.block_diag(V, np.eye(n - m - 1))
    elim = EquivalenceTransform(np.eye(m), big, np.eye(m), sla.inv(big))
    A = apply_equivalence(T, elim).array

    core = Tensor3(A[:, :, :m], T.field)
    result = singular_core_decomposition(core, tol, rng, budget, spreads, max_attempts).embedded((m, n, 3), cols=range(m))

    unit = np.eye(n)
    tail = []
    for j in range(m, n):
        pair = rank_one_pair(A[0][:, j], A[1][:, j])
        if pair is not None:
            u, alphas = pair
            tail.append(make_term(u, unit[j], [alphas[0], alphas[1], 0.0]))

    result = result.combined(Decomposition(tuple(tail), (m, n, 3), T.field, ("border",)))
    get_debugger().debug("nonsquare_3", "Core and tail split", m=m, n=n, eliminated=col, tail=len(tail))
    return result.pull_back(elim)


def nonsquare_cases(
    T: Tensor3,
    r: int,
    tol: Tolerances,
    rng: np.random.Generator,
    budget: int,
    spreads: Sequence[float],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    m, n, _ = T.dims
    debugger = get_debugger()
    A = T.array
    cells = support(A[0], tol).cells

    for j in range(r, n):
        if not any((i, j) in cells for i in range(m)):
            keep = [k for k in range(n) if k != j]
            debugger.debug("nonsquare_3", "Zero column case", m=m, n=n, r=r, column=j)
            return decompose_general_p(Tensor3(A[:, :, keep], T.field), tol, rng, spreads).embedded((m, n, 3), cols=keep)

    j = independent_pair(A[0], A[1], range(m, n), m, tol)
    if j is None:
        return dependent_tail_split(T, tol, rng, budget, spreads, max_attempts)

    if r == m:
        return anchored_split(T, j, tol, rng, max_attempts)

    for i in range(r, m):
        if not any((i, k) in cells for k in range(n)):
            keep = [k for k in range(m) if k != i]
            debugger.debug("nonsquare_3", "Zero row case", m=m, n=n, r=r, row=i)
            return decompose_general_p(Tensor3(A[:, keep, :], T.field), tol, rng, spreads).embedded((m, n, 3), rows=keep)

    debugger.debug("nonsquare_3", "Independent tail pair case", m=m, n=n, r=r, column=j)
    return condition_b_split(T, r, j, tol, rng, spreads, max_attempts)


def decompose_nonsquare_3(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: Any = None,
    samples: int = DEFAULT_SEARCH_BUDGET,
    budget: int = DEFAULT_SEARCH_BUDGET,
    spreads: Sequence[float] = DEFAULT_SPREADS,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Decomposition:
    """
    At most m + n - 1 terms for an m x n x 3 tensor with m != n.

    Tensors with m > n are transposed first.

    Raises:
        PreconditionError: the tensor is square
    """
    m, n, p = T.dims
    if p != 3:
        raise DimensionMismatch(f"Expected three slices, got {p}")
    if m == n:
        raise PreconditionError("Square tensors belong to the square method")
    if m > n:
        flipped = decompose_nonsquare_3(transpose_tensor(T), tol, seed, samples, budget, spreads, max_attempts)
        return flipped.transposed()

    bound = nonsquare_3_bound(m, n)
    if T.is_zero():
        return Decomposition.empty(T.dims, T.field, ("nonsquare_3",)).tagged(bound=bound)

    rng = as_rng(seed)
    for run in range(1, NONSQUARE_RUNS + 1):
        T1, E, R, R2, r = prepare(T, tol, rng, samples)
        result = nonsquare_cases(T1, r, tol, rng, budget, spreads, max_attempts)
        result = result.unmix(R2).pull_back(E).unmix(R).tagged("nonsquare_3", bound=bound)
        residual = relative_residual(T, result)
        if residual <= tol.residual_tol:
            break
        get_debugger().warn("nonsquare_3", "Split misses the residual tolerance, rerunning", run=run, residual=residual)
    return result


class Nonsquare3Plugin(MethodPlugin):
    """m x n x 3 with m < n"""

    def __init__(self, config=None):
        super().__init__(config)
        self.name = "nonsquare_3"

    def claimed_bound(self, dims: Sequence[int], field: FieldTag) -> int:
        return nonsquare_3_bound(dims[0], dims[1])

    def decompose(self, T: Tensor3, tol: Tolerances = DEFAULT_TOLERANCES, seed: Any = None) -> Decomposition:
        samples = int(self._option('span_samples', DEFAULT_SEARCH_BUDGET))
        budget = int(self._option('search_budget', DEFAULT_SEARCH_BUDGET))
        spreads = tuple(self._option('retry_spreads', DEFAULT_SPREADS))
        max_attempts = int(self._option('max_attempts', DEFAULT_MAX_ATTEMPTS))
        return decompose_nonsquare_3(T, tol, seed, samples, budget, spreads, max_attempts)
