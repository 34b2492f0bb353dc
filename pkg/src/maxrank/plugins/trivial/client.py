"""Trivial Method - One term per fiber along the two smallest modes"""
from typing import Any, Sequence

import numpy as np

from ...core.bounds import trivial_bound
from ...core.linalg import DEFAULT_TOLERANCES, FieldTag, Tensor3, Tolerances
from ...models.decomposition import Decomposition, make_term
from ..base import MethodPlugin


def decompose_trivial(T: Tensor3) -> Decomposition:
    """
    At most min(mn, mp, np) terms.

    Over the mode pair with the smallest product, every nonzero fiber of the
    remaining mode becomes unit (x) unit (x) fiber.
    """
    m, n, p = T.dims
    cube = T.to_cube()
    eye_m, eye_n, eye_p = np.eye(m), np.eye(n), np.eye(p)
    sizes = {"mn": m * n, "mp": m * p, "np": n * p}
    pair = min(sizes, key=sizes.get)

    terms = []
    if pair == "mn":
        for i in range(m):
            for j in range(n):
                if np.any(cube[i, j, :]):
                    terms.append(make_term(eye_m[i], eye_n[j], cube[i, j, :]))
    elif pair == "mp":
        for i in range(m):
            for k in range(p):
                if np.any(cube[i, :, k]):
                    terms.append(make_term(eye_m[i], cube[i, :, k], eye_p[k]))
    else:
        for j in range(n):
            for k in range(p):
                if np.any(cube[:, j, k]):
                    terms.append(make_term(cube[:, j, k], eye_n[j], eye_p[k]))

    return Decomposition(tuple(terms), T.dims, T.field, ("trivial", f"fibers:{pair}"), claimed_bound=sizes[pair])


class TrivialPlugin(MethodPlugin):
    """Always applicable"""

    def __init__(self, config=None):
        super().__init__(config)
        self.name = "trivial"

    def claimed_bound(self, dims: Sequence[int], field: FieldTag) -> int:
        return trivial_bound(dims)

    def decompose(self, T: Tensor3, tol: Tolerances = DEFAULT_TOLERANCES, seed: Any = None) -> Decomposition:
        return decompose_trivial(T)
