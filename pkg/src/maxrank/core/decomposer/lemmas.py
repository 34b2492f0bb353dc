"""
Lemmas - Three-slice reductions shared by the square and non-square methods

decompose_use_ab splits (A1; A2; (D, O)) into a perturbed pencil plus a
diagonal remainder. conjugate_to_condition_b prepares two slices so that
their last two indices can be left unperturbed. eliminate_anchored_columns
removes columns that are fixed combinations of the leading block.
"""
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionMismatch, EpsilonExhausted, GenericityExhausted, PreconditionError
from ..genericity import GenericityRequest, merge_sequence, randomize_nonvanishing, DEFAULT_MAX_ATTEMPTS
from ..linalg import (
    DEFAULT_TOLERANCES,
    EquivalenceTransform,
    FieldTag,
    Tensor3,
    Tolerances,
    as_rng,
    max_abs,
    numerical_rank,
    support,
)
from ..perturb import perturb_to_distinct, variant_b_applicable
from .blocks import decompose_diagonal_tensor, decompose_pencil_tail
from ...models.decomposition import Decomposition
from ...utils import get_debugger


DEFAULT_SPREADS = (1.0, 2.0, 4.0)


def perturb_with_retries(
    A: np.ndarray,
    B: np.ndarray,
    preserved: Iterable[int],
    tol: Tolerances,
    field: FieldTag,
    spreads: Sequence[float] = DEFAULT_SPREADS,
):
    """perturb_to_distinct, retried with wider target spreads on EpsilonExhausted"""
    preserved = tuple(preserved)
    last: Optional[EpsilonExhausted] = None
    for spread in spreads:
        try:
            return perturb_to_distinct(A, B, preserved, tol, field=field, spread=spread)
        except EpsilonExhausted as exc:
            get_debugger().debug("perturb", "Retrying with wider targets", spread=spread, epsilon=exc.last_epsilon)
            last = exc
    raise last


def decompose_use_ab(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    variant: Optional[str] = None,
    spreads: Sequence[float] = DEFAULT_SPREADS,
) -> Decomposition:
    """
    At most m + n - 1 terms for an m x n x 3 tensor with A3 = (D, O), D[m-1, m-1] = 0.

    The leading m x m blocks of A1, A2 must allow preserving index m-1
    (variant "a": A1[m-1, m-1] != 0) or indices m-2, m-1 (variant "b").
    The pencil (A1 + (X, O); A2 + (Y, O)) gives at most n terms and the
    diagonal remainder (-X; -Y; D) at most m - 1.

    Raises:
        PreconditionError: shape, A3 pattern or variant conditions fail
    """
    m, n, p = T.dims
    if p != 3:
        raise DimensionMismatch(f"Expected three slices, got {p}")
    if m > n:
        raise PreconditionError(f"Needs m <= n, got {m}x{n}")
    bound = m + n - 1
    if T.is_zero():
        return Decomposition.empty(T.dims, T.field, ("use_ab",)).tagged(bound=bound)

    A1, A2, A3 = T.array
    scale = max(max_abs(A3), 1.0)
    off = A3.copy()
    off[np.arange(m), np.arange(m)] = 0
    if max_abs(off) > tol.support_tol * scale:
        raise PreconditionError("Third slice must have the shape (D, O) with D diagonal")
    d = np.diag(A3[:, :m]).copy()
    if abs(d[m - 1]) > tol.support_tol * scale:
        raise PreconditionError("Third slice must vanish at the last diagonal cell")
    d[m - 1] = 0

    L1, L2 = A1[:, :m], A2[:, :m]
    if variant in (None, "a") and (m - 1, m - 1) in support(L1, tol):
        preserved, chosen = (m - 1,), "a"
    elif variant in (None, "b") and variant_b_applicable(L1, L2, tol):
        preserved, chosen = (m - 2, m - 1), "b"
    else:
        raise PreconditionError(f"Leading blocks satisfy neither preservation variant (requested {variant or 'any'})")

    pert = perturb_with_retries(L1, L2, preserved, tol, T.field, spreads)
    pencil = decompose_pencil_tail(L1 + pert.X, A1[:, m:], L2 + pert.Y, A2[:, m:], tol, field=T.field)
    pencil = pencil.embedded((m, n, 3), slices=[0, 1])

    D = np.zeros((m, n), dtype=T.field.dtype)
    D[np.arange(m), np.arange(m)] = d
    zero_tail = np.zeros((m, n - m), dtype=T.field.dtype)
    remainder = decompose_diagonal_tensor(
        [np.hstack([-pert.X, zero_tail]), np.hstack([-pert.Y, zero_tail]), D], tol, field=T.field
    )

    get_debugger().debug("decomposer", "Pencil split with preserved cells", m=m, n=n, variant=chosen,
                         pencil_terms=len(pencil), diagonal_terms=len(remainder))
    return pencil.combined(remainder).tagged(f"use_ab({chosen})", bound=bound)


def _conjugated(A: np.ndarray, P: np.ndarray) -> np.ndarray:
    big = sla.block_diag(P, np.eye(A.shape[0] - P.shape[0]))
    big_inv = sla.block_diag(sla.inv(P), np.eye(A.shape[0] - P.shape[0]))
    return big @ A @ big_inv


def _border_ratio(u: np.ndarray, v: np.ndarray) -> complex:
    """kappa with v = kappa u for rank-deficient (u, v), u != 0"""
    return complex(np.vdot(u, v) / np.vdot(u, u))


def border_pencil_nonvanishing(A1: np.ndarray, A2: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """
    Whether every t A1 + A2 has a nonzero last row or last column.

    Either border pair of rank two settles it; otherwise a2 = ka a1 and
    b2 = kb b1 and the only bad t would be -ka = -kb.
    """
    k = A1.shape[0] - 1
    a1, a2 = A1[:k, k], A2[:k, k]
    b1, b2 = A1[k, :k], A2[k, :k]
    if numerical_rank(np.column_stack([a1, a2]), tol) == 2:
        return True
    if numerical_rank(np.column_stack([b1, b2]), tol) == 2:
        return True
    kappa_a = _border_ratio(a1, a2)
    kappa_b = _border_ratio(b1, b2)
    size = max(1.0, abs(kappa_a), abs(kappa_b))
    return abs(kappa_a - kappa_b) > tol.margin_tol * size


def _independent_columns_case(
    A1: np.ndarray,
    A2: np.ndarray,
    rng: np.random.Generator,
    tol: Tolerances,
    field: FieldTag,
) -> Optional[np.ndarray]:
    k = A1.shape[0] - 1
    a1, a2 = A1[:k, k], A2[:k, k]
    b1 = A1[k, :k]
    request = GenericityRequest(
        dim=k,
        vectors=(a1,),
        covectors=(b1,),
        rank2_left=(np.column_stack([a1, a2]),),
        seed=rng,
        field=field,
    )
    Q1 = randomize_nonvanishing(request, tol)
    if variant_b_applicable(_conjugated(A1, Q1), _conjugated(A2, Q1), tol):
        return Q1

    # the shear moves the a-ratio and leaves the b-ratio alone
    for t in merge_sequence():
        Q2 = np.eye(k, dtype=Q1.dtype)
        Q2[k - 1, k - 2] = t
        P = Q2 @ Q1
        if variant_b_applicable(_conjugated(A1, P), _conjugated(A2, P), tol):
            return P
    return None


def conjugate_to_condition_b(
    A1: Any,
    A2: Any,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: Any = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    field: Optional[Any] = None,
) -> np.ndarray:
    """
    (n-1) x (n-1) matrix P such that Diag(P, 1) A_i Diag(P, 1)^{-1} allow preserving the last two indices.

    Preconditions: A_i[n-1, n-1] = 0, the last row and column of A1 are
    nonzero and no t A1 + A2 has both its last row and column zero.

    Raises:
        PreconditionError: a precondition fails
        GenericityExhausted: no draw satisfied the condition
    """
    A1 = np.atleast_2d(np.asarray(A1))
    A2 = np.atleast_2d(np.asarray(A2))
    n = A1.shape[0]
    if A1.shape != (n, n) or A2.shape != A1.shape:
        raise DimensionMismatch(f"Expected two square matrices of equal size, got {A1.shape} and {A2.shape}")
    if n < 2:
        raise PreconditionError("Needs n >= 2")
    tag = FieldTag.parse(field) if field is not None else (
        FieldTag.COMPLEX if np.iscomplexobj(A1) or np.iscomplexobj(A2) else FieldTag.REAL
    )

    k = n - 1
    corner = (k, k)
    if corner in support(A1, tol) or corner in support(A2, tol):
        raise PreconditionError("Last diagonal cell must vanish in both slices")
    if max_abs(A1[:k, k]) == 0 or max_abs(A1[k, :k]) == 0:
        raise PreconditionError("Last row and last column of the first slice must be nonzero")
    if not border_pencil_nonvanishing(A1, A2, tol):
        raise PreconditionError("Some combination t A1 + A2 has zero last row and column")

    rank_a = numerical_rank(np.column_stack([A1[:k, k], A2[:k, k]]), tol)
    rank_b = numerical_rank(np.column_stack([A1[k, :k], A2[k, :k]]), tol)
    rng = as_rng(seed)
    debugger = get_debugger()

    for attempt in range(1, max_attempts + 1):
        if rank_a == 2:
            P = _independent_columns_case(A1, A2, rng, tol, tag)
        elif rank_b == 2:
            Pt = _independent_columns_case(A1.T, A2.T, rng, tol, tag)
            P = None if Pt is None else sla.inv(Pt).T
        else:
            request = GenericityRequest(dim=k, vectors=(A1[:k, k],), covectors=(A1[k, :k],), seed=rng, field=tag)
            P = randomize_nonvanishing(request, tol)

        if P is not None and variant_b_applicable(_conjugated(A1, P), _conjugated(A2, P), tol):
            case = "columns" if rank_a == 2 else "rows" if rank_b == 2 else "rank-one"
            debugger.debug("decomposer", "Conjugated towards preserved pair", n=n, case=case, attempt=attempt)
            return P

    raise GenericityExhausted("No conjugator produced a preservable last pair", attempts=max_attempts)


def eliminate_anchored_columns(
    A1: Any,
    A2: Any,
    anchors: Sequence[Tuple[int, Any]],
    tol: Tolerances = DEFAULT_TOLERANCES,
    field: Optional[Any] = None,
) -> Decomposition:
    """
    At most n - s terms for the m x n x 2 tensor (A1; A2) with s anchored columns.

    Each anchor (j, p) has j >= m and column j of A_i equal to
    A_i[:, :m] @ p. The upper unipotent V with V[:m, j] = -p clears those
    columns, the rest is a pencil with tail, and b-vectors are mapped back
    by V^{-T}.

    Raises:
        PreconditionError: an anchor does not reproduce its column
    """
    A1 = np.atleast_2d(np.asarray(A1))
    A2 = np.atleast_2d(np.asarray(A2))
    m, n = A1.shape
    if A2.shape != A1.shape:
        raise DimensionMismatch(f"Slices differ in shape: {A1.shape} vs {A2.shape}")
    if m > n:
        raise PreconditionError(f"Needs m <= n, got {m}x{n}")
    tag = FieldTag.parse(field) if field is not None else (
        FieldTag.COMPLEX if np.iscomplexobj(A1) or np.iscomplexobj(A2) else FieldTag.REAL
    )

    V = np.eye(n, dtype=tag.dtype)
    cleared: List[int] = []
    for j, p in anchors:
        j = int(j)
        p = np.asarray(p).ravel()
        if j < m or j >= n or j in cleared:
            raise PreconditionError(f"Anchor column {j} must be a distinct index in [{m}, {n})")
        if p.shape != (m,):
            raise DimensionMismatch(f"Anchor vector has shape {p.shape}, expected ({m},)")
        for A in (A1, A2):
            if np.linalg.norm(A[:, :m] @ p - A[:, j]) > tol.residual_tol * max(np.linalg.norm(A), 1.0):
                raise PreconditionError(f"Anchor vector does not reproduce column {j}")
        V[:m, j] = -p
        cleared.append(j)

    B1 = A1 @ V
    B2 = A2 @ V
    B1[:, cleared] = 0
    B2[:, cleared] = 0
    kept = [j for j in range(n) if j not in cleared]

    pencil = decompose_pencil_tail(B1[:, :m], B1[:, kept[m:]], B2[:, :m], B2[:, kept[m:]], tol, field=tag)
    pencil = pencil.embedded((m, n, 2), cols=kept)
    E = EquivalenceTransform(np.eye(m), V, np.eye(m), sla.inv(V))
    return pencil.pull_back(E).tagged("anchored_columns", bound=n - len(cleared))
