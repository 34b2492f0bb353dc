"""
General-p Method - Pair the slices, perturb each pair to a distinct pencil

For an n x m x p tensor with n <= m the last slice is brought to
Diag(E_r, O); every pair of the remaining slices gets diagonal X, Y making
its leading n x n pencil diagonalizable, and the diagonal leftovers
(-X, -Y, ..., Diag(E_r, O)) cost at most n more terms. With p even the
unpaired slice is split by SVD, after subtracting a singularizing diagonal
when the slices are square.
"""
from typing import Any, Sequence

import numpy as np

from ...core.bounds import general_p_bound
from ...core.decomposer.blocks import (
    decompose_diagonal_tensor,
    decompose_matrix,
    decompose_pencil_tail,
    singularizing_diagonal,
)
from ...core.decomposer.lemmas import DEFAULT_SPREADS, perturb_with_retries
from ...core.linalg import (
    DEFAULT_TOLERANCES,
    FieldTag,
    Tensor3,
    Tolerances,
    normal_form_slice,
    transpose_tensor,
)
from ...models.decomposition import Decomposition
from ...utils import get_debugger
from ..base import MethodPlugin


def decompose_general_p(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: Any = None,
    spreads: Sequence[float] = DEFAULT_SPREADS,
) -> Decomposition:
    """
    At most n + m(p-1)/2 terms (odd p), 2n + m(p-2)/2 (even p) or
    n(p+2)/2 - 1 (even p, n = m) for an n x m x p tensor.

    Tensors with more rows than columns are transposed first.

    Raises:
        EpsilonExhausted: a slice pair could not be perturbed at any spread
    """
    rows, cols, p = T.dims
    if rows > cols:
        return decompose_general_p(transpose_tensor(T), tol, seed, spreads).transposed()

    n, m = rows, cols
    debugger = get_debugger()
    if T.is_zero():
        return Decomposition.empty(T.dims, T.field, ("general_p",)).tagged(bound=general_p_bound(n, m, p))

    if p == 1:
        return decompose_matrix(T.slice(0), tol, field=T.field).tagged("general_p", bound=n)

    T1, E, r = normal_form_slice(T, p - 1, tol)
    slices = T1.array
    dtype = T.field.dtype
    tail = np.zeros((n, m - n), dtype=dtype)

    parts = []
    leftovers = [np.zeros((n, m), dtype=dtype) for _ in range(p)]
    leftovers[p - 1] = slices[p - 1]

    for k in range(0, 2 * ((p - 1) // 2), 2):
        l = k + 1
        L1, L2 = slices[k][:, :n], slices[l][:, :n]
        pert = perturb_with_retries(L1, L2, (), tol, T.field, spreads)
        pencil = decompose_pencil_tail(L1 + pert.X, slices[k][:, n:], L2 + pert.Y, slices[l][:, n:], tol, field=T.field)
        parts.append(pencil.embedded((n, m, p), slices=[k, l]))
        leftovers[k] = np.hstack([-pert.X, tail])
        leftovers[l] = np.hstack([-pert.Y, tail])

    notes = []
    refined = False
    if p % 2 == 0:
        u = p - 2
        B = slices[u]
        if n == m:
            D = singularizing_diagonal(B, tol)
            if D is None:
                notes.append("refinement:unavailable")
            else:
                B = B - D
                leftovers[u] = D
                refined = True
        parts.append(decompose_matrix(B, tol, field=T.field).embedded((n, m, p), slices=[u]))

    result = decompose_diagonal_tensor(leftovers, tol, field=T.field)
    for part in parts:
        result = part.combined(result)

    bound = general_p_bound(n, m, p, refined=refined or p % 2 == 1)
    debugger.debug("general_p", "Slices paired", n=n, m=m, p=p, r=r, terms=len(result), bound=bound)
    return result.pull_back(E).tagged("general_p", bound=bound, notes=notes)


class GeneralPPlugin(MethodPlugin):
    """Any number of slices; expects rows <= cols"""

    def __init__(self, config=None):
        super().__init__(config)
        self.name = "general_p"

    def claimed_bound(self, dims: Sequence[int], field: FieldTag) -> int:
        return general_p_bound(*dims)

    def decompose(self, T: Tensor3, tol: Tolerances = DEFAULT_TOLERANCES, seed: Any = None) -> Decomposition:
        spreads = tuple(self._option('retry_spreads', DEFAULT_SPREADS))
        return decompose_general_p(T, tol, seed, spreads)
