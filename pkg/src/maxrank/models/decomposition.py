"""
Decomposition - Rank-one terms and the certificate object built from them

Every routine returns terms in the coordinates of the tensor it was handed;
the mapping helpers below carry them back through equivalence transforms,
slice mixings, transposes, mode permutations and embeddings.
"""
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Any, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from ..core.errors import DimensionMismatch
from ..core.linalg import EquivalenceTransform, FieldTag


# Rounding noise allowed in the imaginary part of real-field term vectors
IMAG_SLACK = 1e-8


@dataclass(frozen=True, eq=False)
class RankOneTerm:
    """a (x) b (x) c, adding c[k] * outer(a, b) to slice k"""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def slices(self) -> np.ndarray:
        return np.einsum('k,i,j->kij', self.c, self.a, self.b)

    def vectors(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.a, self.b, self.c


def make_term(a: Any, b: Any, c: Any) -> RankOneTerm:
    return RankOneTerm(np.asarray(a).ravel(), np.asarray(b).ravel(), np.asarray(c).ravel())


@dataclass(frozen=True, eq=False)
class Decomposition:
    """
    Rank-one terms of an m x n x p tensor with their provenance.

    method is the chain of routines that produced the terms, notes carries
    fallbacks taken on the way ("fallback:NoSingularMember").
    """

    terms: Tuple[RankOneTerm, ...]
    dims: Tuple[int, int, int]
    field: FieldTag = FieldTag.REAL
    method: Tuple[str, ...] = ()
    claimed_bound: int = 0
    seed: Optional[int] = None
    notes: Tuple[str, ...] = dataclass_field(default_factory=tuple)

    def __post_init__(self):
        tag = FieldTag.parse(self.field)
        dims = tuple(int(d) for d in self.dims)
        kept = []
        for idx, term in enumerate(self.terms):
            vecs = tuple(tag.coerce(np.asarray(v).ravel(), rel_tol=IMAG_SLACK) for v in term.vectors())
            shape = tuple(v.shape[0] for v in vecs)
            if shape != dims:
                raise DimensionMismatch(f"Term {idx} has vector lengths {shape}, expected {dims}")
            kept.append(RankOneTerm(*vecs))
        object.__setattr__(self, "terms", tuple(kept))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "field", tag)
        object.__setattr__(self, "method", tuple(self.method))
        object.__setattr__(self, "notes", tuple(self.notes))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @classmethod
    def empty(cls, dims: Sequence[int], field: FieldTag = FieldTag.REAL, method: Iterable[str] = ()) -> "Decomposition":
        return cls((), tuple(dims), field, tuple(method))

    def _remap(self, dims: Sequence[int], fn) -> "Decomposition":
        terms = tuple(RankOneTerm(*fn(t.a, t.b, t.c)) for t in self.terms)
        return replace(self, terms=terms, dims=tuple(dims))

    def tagged(self, *tags: str, bound: Optional[int] = None, notes: Iterable[str] = ()) -> "Decomposition":
        """Prepend method tags, optionally set the claimed bound, append notes"""
        return replace(
            self,
            method=tuple(tags) + self.method,
            claimed_bound=self.claimed_bound if bound is None else int(bound),
            notes=self.notes + tuple(notes),
        )

    def with_seed(self, seed: Optional[int]) -> "Decomposition":
        return replace(self, seed=seed)

    def combined(self, other: "Decomposition") -> "Decomposition":
        """Terms of a decomposition of the sum of both tensors"""
        if tuple(other.dims) != self.dims:
            raise DimensionMismatch(f"Cannot combine decompositions of shapes {self.dims} and {other.dims}")
        method = self.method + tuple(m for m in other.method if m not in self.method)
        return Decomposition(
            terms=self.terms + other.terms,
            dims=self.dims,
            field=self.field.join(other.field),
            method=method,
            claimed_bound=self.claimed_bound + other.claimed_bound,
            seed=self.seed if self.seed is not None else other.seed,
            notes=self.notes + other.notes,
        )

    def pull_back(self, E: EquivalenceTransform) -> "Decomposition":
        """Terms of T from terms of left . T . right"""
        m = E.left.shape[1]
        n = E.right.shape[0]

        def fn(a, b, c):
            a2, b2 = E.pull_back(a, b)
            return a2, b2, c

        return self._remap((m, n, self.dims[2]), fn)

    def unmix(self, R: np.ndarray) -> "Decomposition":
        """Terms of T from terms of apply_slice_mixing(T, R)"""
        R_inv = sla.inv(np.asarray(R))
        return self._remap(self.dims, lambda a, b, c: (a, b, R_inv @ c))

    def transposed(self) -> "Decomposition":
        m, n, p = self.dims
        return self._remap((n, m, p), lambda a, b, c: (b, a, c))

    def unpermuted(self, order: Sequence[int]) -> "Decomposition":
        """Terms of T from terms of permute_modes(T, order)"""
        order = tuple(order)
        dims = [0, 0, 0]
        for i, mode in enumerate(order):
            dims[mode] = self.dims[i]

        def fn(a, b, c):
            vecs = [None, None, None]
            for i, v in enumerate((a, b, c)):
                vecs[order[i]] = v
            return tuple(vecs)

        return self._remap(dims, fn)

    def embedded(
        self,
        dims: Sequence[int],
        rows: Optional[Sequence[int]] = None,
        cols: Optional[Sequence[int]] = None,
        slices: Optional[Sequence[int]] = None,
    ) -> "Decomposition":
        """
        Place the terms inside a larger tensor.

        rows/cols/slices list the target index of each source index; other
        entries of the term vectors are zero.
        """
        m, n, p = (int(d) for d in dims)
        index = [
            np.arange(self.dims[0]) if rows is None else np.asarray(rows),
            np.arange(self.dims[1]) if cols is None else np.asarray(cols),
            np.arange(self.dims[2]) if slices is None else np.asarray(slices),
        ]

        def fn(a, b, c):
            out = []
            for v, idx, size in zip((a, b, c), index, (m, n, p)):
                full = np.zeros(size, dtype=v.dtype)
                full[idx] = v
                out.append(full)
            return tuple(out)

        return self._remap((m, n, p), fn)

    def reconstruct_array(self) -> np.ndarray:
        """(p, m, n) sum of all terms"""
        m, n, p = self.dims
        out = np.zeros((p, m, n), dtype=self.field.dtype)
        for term in self.terms:
            out = out + term.slices()
        return out
