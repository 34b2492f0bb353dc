"""
Genericity - Random conjugators, support merging and unipotent eliminators

Generic-position arguments ("a product of nonzero polynomials is nonzero")
become sample-and-verify loops: every predicate of a request is checked on
the drawn matrix, never assumed.
"""
from dataclasses import dataclass, field as dataclass_field
from itertools import combinations
from typing import Any, Iterator, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, GenericityExhausted, PreconditionError
from .linalg import (
    DEFAULT_TOLERANCES,
    FieldTag,
    Tolerances,
    as_rng,
    max_abs,
    numerical_rank,
    random_matrix,
    support,
)
from ..utils import get_debugger


DEFAULT_MAX_ATTEMPTS = 64
MERGE_CANDIDATES = 32


@dataclass(frozen=True, eq=False)
class GenericityRequest:
    """
    Predicates a random nonsingular dim x dim matrix P must satisfy.

    - vectors: every entry of P @ v nonzero
    - covectors: every entry of w^T @ P^{-1} nonzero
    - rank2_left: every 2-minor of P @ M nonzero (M is dim x 2)
    - rank2_right: every 2-minor of M^T @ P^{-1} nonzero (M is dim x 2)
    """

    dim: int
    vectors: Sequence[np.ndarray] = dataclass_field(default_factory=tuple)
    covectors: Sequence[np.ndarray] = dataclass_field(default_factory=tuple)
    rank2_left: Sequence[np.ndarray] = dataclass_field(default_factory=tuple)
    rank2_right: Sequence[np.ndarray] = dataclass_field(default_factory=tuple)
    seed: Any = None
    field: FieldTag = FieldTag.REAL

    def validate(self, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        for v in list(self.vectors) + list(self.covectors):
            v = np.asarray(v)
            if v.shape != (self.dim,):
                raise DimensionMismatch(f"Request vector has shape {v.shape}, expected ({self.dim},)")
            if max_abs(v) == 0:
                raise PreconditionError("Request contains a zero vector")
        for M in list(self.rank2_left) + list(self.rank2_right):
            M = np.asarray(M)
            if M.shape != (self.dim, 2):
                raise DimensionMismatch(f"Request matrix has shape {M.shape}, expected ({self.dim}, 2)")
            if numerical_rank(M, tol) < 2:
                raise PreconditionError("Request matrix does not have rank 2")


def _all_nonzero(values: np.ndarray, tol: Tolerances) -> bool:
    scale = max_abs(values)
    return scale > 0 and bool(np.all(np.abs(values) > tol.support_tol * scale))


def _row_minors(N: np.ndarray) -> np.ndarray:
    """All 2x2 minors of an k x 2 matrix taken over row pairs"""
    if N.shape[0] < 2:
        return np.zeros(0)
    pairs = np.array(list(combinations(range(N.shape[0]), 2)))
    i, j = pairs[:, 0], pairs[:, 1]
    return N[i, 0] * N[j, 1] - N[j, 0] * N[i, 1]


def _passes(P: np.ndarray, P_inv: np.ndarray, req: GenericityRequest, tol: Tolerances) -> bool:
    for v in req.vectors:
        if not _all_nonzero(P @ np.asarray(v), tol):
            return False
    for w in req.covectors:
        if not _all_nonzero(np.asarray(w) @ P_inv, tol):
            return False
    for M in req.rank2_left:
        minors = _row_minors(P @ np.asarray(M))
        if minors.size and not _all_nonzero(minors, tol):
            return False
    for M in req.rank2_right:
        minors = _row_minors(P_inv.T @ np.asarray(M))
        if minors.size and not _all_nonzero(minors, tol):
            return False
    return True


def randomize_nonvanishing(
    req: GenericityRequest,
    tol: Tolerances = DEFAULT_TOLERANCES,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> np.ndarray:
    """
    Draw a nonsingular P passing every predicate of `req`.

    Entries are uniform on [-1, 1] (real and imaginary parts independently
    under COMPLEX). Every draw is re-verified.

    Raises:
        PreconditionError: the request itself is invalid
        GenericityExhausted: max_attempts draws failed
    """
    req.validate(tol)
    rng = as_rng(req.seed)
    tag = FieldTag.parse(req.field)

    for attempt in range(1, max_attempts + 1):
        P = random_matrix(rng, (req.dim, req.dim), tag)
        if numerical_rank(P, tol) < req.dim:
            continue
        P_inv = sla.inv(P)
        if _passes(P, P_inv, req, tol):
            get_debugger().debug("genericity", "Generic conjugator accepted", dim=req.dim, attempt=attempt)
            return P

    raise GenericityExhausted(f"No generic {req.dim}x{req.dim} matrix in {max_attempts} draws", attempts=max_attempts)


def merge_sequence(count: int = MERGE_CANDIDATES) -> Iterator[int]:
    """1, -1, 2, -2, 3, ... (count values)"""
    for k in range(count):
        magnitude = k // 2 + 1
        yield magnitude if k % 2 == 0 else -magnitude


def generic_support_merge(A1: Any, A2: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[float, np.ndarray]:
    """
    First t in 1, -1, 2, -2, ... with supp(A1 + t A2) covering supp(A1) and supp(A2).

    Raises:
        GenericityExhausted: no candidate among the first 32 works
    """
    A1 = np.asarray(A1)
    A2 = np.asarray(A2)
    if A1.shape != A2.shape:
        raise DimensionMismatch(f"Support merge needs equal shapes, got {A1.shape} and {A2.shape}")

    wanted = support(A1, tol).cells | support(A2, tol).cells
    for t in merge_sequence():
        merged = A1 + t * A2
        if support(merged, tol).cells >= wanted:
            return float(t), merged

    raise GenericityExhausted("Support merge cancelled a cell for every candidate t", attempts=MERGE_CANDIDATES)


def unipotent_column_eliminator(M: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[np.ndarray, int]:
    """
    Lower unipotent V and column j with column j of M @ V zero.

    j is the first column that is a combination of the later columns;
    V is the identity with column j replaced by e_j - sum_{k>j} c_k e_k.

    Raises:
        PreconditionError: the columns of M are independent
    """
    M = np.atleast_2d(np.asarray(M))
    r, s = M.shape
    scale = max_abs(M)
    cutoff = max(tol.support_tol, tol.rank_tol) * (scale or 1.0)

    for j in range(s):
        rest = M[:, j + 1:]
        if rest.shape[1] == 0:
            coeffs = np.zeros(0, dtype=M.dtype)
        else:
            if numerical_rank(M[:, j:], tol) > numerical_rank(rest, tol):
                continue
            coeffs = sla.lstsq(rest, M[:, j])[0]

        V = np.eye(s, dtype=np.result_type(M.dtype, coeffs.dtype))
        V[j + 1:, j] = -coeffs
        if max_abs((M @ V)[:, j]) <= cutoff:
            get_debugger().debug("genericity", "Column eliminated", rows=r, cols=s, column=j)
            return V, j

    raise PreconditionError(f"Columns of the {r}x{s} matrix are independent")
