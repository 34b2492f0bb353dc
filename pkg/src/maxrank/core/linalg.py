"""
Linear Algebra - Field tags, tensors, equivalence transforms, rank and support

Indices are 0-based throughout: a SupportPattern of the 3x3 identity is
{(0, 0), (1, 1), (2, 2)} and slice k means frontal slice A_{k+1}.

A tensor stores its p frontal m x n slices as one complex128 array of shape
(p, m, n). Under FieldTag.REAL the imaginary part is exactly zero and
`Tensor3.array` hands out a float64 copy, so real inputs never pick up
complex rounding.
"""
from dataclasses import dataclass, field, replace, asdict
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, FieldMismatch, PreconditionError


class FieldTag(str, Enum):
    """Ground field of a tensor or matrix"""

    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64) if self is FieldTag.REAL else np.dtype(np.complex128)

    @classmethod
    def parse(cls, value: Any) -> "FieldTag":
        if isinstance(value, FieldTag):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise FieldMismatch(f"Unknown field tag: {value!r}") from None

    def coerce(self, values: Any, rel_tol: float = 1e-10) -> np.ndarray:
        """
        Convert `values` to this field's dtype.

        Under REAL, imaginary parts up to rel_tol x max|entry| are dropped;
        anything larger is a FieldMismatch.
        """
        arr = np.asarray(values)
        if not np.all(np.isfinite(arr)):
            raise FieldMismatch("Entries must be finite (no NaN/Inf)")

        if self is FieldTag.COMPLEX:
            return arr.astype(np.complex128)

        if np.iscomplexobj(arr):
            scale = float(np.max(np.abs(arr))) if arr.size else 0.0
            worst = float(np.max(np.abs(arr.imag))) if arr.size else 0.0
            if worst > rel_tol * max(scale, 1.0):
                raise FieldMismatch(f"Complex entries under real field tag (max |imag| = {worst:.3e})")
            arr = arr.real
        return arr.astype(np.float64)

    def join(self, other: "FieldTag") -> "FieldTag":
        """Smallest field containing both"""
        return FieldTag.COMPLEX if FieldTag.COMPLEX in (self, other) else FieldTag.REAL


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds standing in for exact zero tests"""

    rank_tol: float = 1e-9
    support_tol: float = 1e-10
    residual_tol: float = 1e-8
    margin_tol: float = 1e-6
    eps_floor: float = 1e-8

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (value > 0):
                raise ValueError(f"Tolerance {name} must be strictly positive, got {value}")
        if not self.rank_tol < 1:
            raise ValueError(f"rank_tol must be < 1, got {self.rank_tol}")

    def with_overrides(self, **overrides: Optional[float]) -> "Tolerances":
        """Copy with the non-None overrides applied"""
        kept = {k: float(v) for k, v in overrides.items() if v is not None}
        return replace(self, **kept)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "Tolerances":
        if not data:
            return cls()
        known = {k: float(v) for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True, eq=False)
class Tensor3:
    """
    An m x n x p tensor as p frontal slices.

    Args:
        slices: array-like of shape (p, m, n)
        field: Ground field
    """

    slices: np.ndarray
    field: FieldTag = FieldTag.REAL

    def __post_init__(self):
        tag = FieldTag.parse(self.field)
        data = tag.coerce(self.slices)
        if data.ndim != 3 or 0 in data.shape:
            raise DimensionMismatch(f"Tensor slices must have shape (p, m, n) with positive sizes, got {data.shape}")
        stored = data.astype(np.complex128)
        stored.setflags(write=False)
        object.__setattr__(self, "slices", stored)
        object.__setattr__(self, "field", tag)

    @classmethod
    def from_slices(cls, slices: Iterable[Any], field: Any = FieldTag.REAL) -> "Tensor3":
        mats = [np.atleast_2d(np.asarray(s)) for s in slices]
        if not mats:
            raise DimensionMismatch("A tensor needs at least one slice")
        shape = mats[0].shape
        for k, mat in enumerate(mats):
            if mat.shape != shape:
                raise DimensionMismatch(f"Slice {k} has shape {mat.shape}, expected {shape}")
        return cls(np.stack(mats), FieldTag.parse(field))

    @classmethod
    def from_cube(cls, cube: Any, field: Any = FieldTag.REAL) -> "Tensor3":
        """Build from an (m, n, p) array indexed T[i, j, k]"""
        cube = np.asarray(cube)
        if cube.ndim != 3:
            raise DimensionMismatch(f"Expected a 3-way array, got shape {cube.shape}")
        return cls(np.moveaxis(cube, 2, 0), FieldTag.parse(field))

    @classmethod
    def zeros(cls, dims: Sequence[int], field: Any = FieldTag.REAL) -> "Tensor3":
        m, n, p = (int(d) for d in dims)
        return cls(np.zeros((p, m, n)), FieldTag.parse(field))

    @property
    def dims(self) -> Tuple[int, int, int]:
        p, m, n = self.slices.shape
        return (m, n, p)

    @property
    def array(self) -> np.ndarray:
        """Writable (p, m, n) copy in the field's dtype"""
        if self.field is FieldTag.REAL:
            return self.slices.real.copy()
        return self.slices.copy()

    def slice(self, k: int) -> np.ndarray:
        return self.array[k]

    def to_cube(self) -> np.ndarray:
        """(m, n, p) copy indexed T[i, j, k]"""
        return np.moveaxis(self.array, 0, 2).copy()

    def norm(self) -> float:
        return float(np.linalg.norm(self.slices.ravel()))

    def is_zero(self) -> bool:
        return not np.any(self.slices)

    def equals(self, other: "Tensor3") -> bool:
        return (
            isinstance(other, Tensor3)
            and self.field is other.field
            and self.slices.shape == other.slices.shape
            and bool(np.array_equal(self.slices, other.slices))
        )


@dataclass(frozen=True)
class SupportPattern:
    """Cells whose entry exceeds threshold_used x max|entry|"""

    cells: FrozenSet[Tuple[int, int]]
    threshold_used: float
    shape: Tuple[int, int] = (0, 0)

    def __contains__(self, cell: Tuple[int, int]) -> bool:
        return tuple(cell) in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def issuperset(self, other: "SupportPattern") -> bool:
        return self.cells >= other.cells


@dataclass(frozen=True, eq=False)
class EquivalenceTransform:
    """
    Slice-wise change of basis T -> left . T . right.

    Inverses are cached for square factors; `pull_back` maps a rank-one term
    of the transformed tensor to a term of the source tensor.
    """

    left: np.ndarray
    right: np.ndarray
    left_inverse: Optional[np.ndarray] = field(default=None)
    right_inverse: Optional[np.ndarray] = field(default=None)

    @classmethod
    def identity(cls, m: int, n: int, dtype: Any = np.float64) -> "EquivalenceTransform":
        return cls(np.eye(m, dtype=dtype), np.eye(n, dtype=dtype), np.eye(m, dtype=dtype), np.eye(n, dtype=dtype))

    @classmethod
    def from_pair(
        cls,
        left: np.ndarray,
        right: np.ndarray,
        tol: Tolerances = DEFAULT_TOLERANCES,
    ) -> "EquivalenceTransform":
        """Build a transform from two nonsingular square factors"""
        left = np.asarray(left)
        right = np.asarray(right)
        return cls(left, right, checked_inverse(left, tol), checked_inverse(right, tol))

    @property
    def is_square(self) -> bool:
        return self.left_inverse is not None and self.right_inverse is not None

    def then(self, other: "EquivalenceTransform") -> "EquivalenceTransform":
        """Apply self first, then other"""
        left = other.left @ self.left
        right = self.right @ other.right
        left_inv = right_inv = None
        if self.is_square and other.is_square:
            left_inv = self.left_inverse @ other.left_inverse
            right_inv = other.right_inverse @ self.right_inverse
        return EquivalenceTransform(left, right, left_inv, right_inv)

    def inverse(self) -> "EquivalenceTransform":
        if not self.is_square:
            raise PreconditionError("Only square equivalence transforms can be inverted")
        return EquivalenceTransform(self.left_inverse, self.right_inverse, self.left, self.right)

    def pull_back(self, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map term vectors (a', b') of left.T.right back to (a, b) of T"""
        if not self.is_square:
            raise PreconditionError("pull_back needs a square transform")
        return self.left_inverse @ a, self.right_inverse.T @ b


def max_abs(values: Any) -> float:
    arr = np.asarray(values)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def checked_inverse(M: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Inverse of a square matrix that is nonsingular at rank_tol"""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"Inverse needs a square matrix, got shape {M.shape}")
    if numerical_rank(M, tol) < M.shape[0]:
        raise PreconditionError("Matrix is singular at rank_tol")
    return sla.inv(M)


def diag_pattern(m: int, n: int, r: int, dtype: Any = np.float64) -> np.ndarray:
    """The m x n matrix Diag(E_r, O)"""
    out = np.zeros((m, n), dtype=dtype)
    idx = np.arange(min(r, m, n))
    out[idx, idx] = 1
    return out


def apply_equivalence(T: Tensor3, E: EquivalenceTransform) -> Tensor3:
    """Slice-wise left . A_k . right"""
    m, n, _ = T.dims
    if E.left.ndim != 2 or E.left.shape[1] != m:
        raise DimensionMismatch(f"Left factor has shape {E.left.shape}, needs {m} columns")
    if E.right.ndim != 2 or E.right.shape[0] != n:
        raise DimensionMismatch(f"Right factor has shape {E.right.shape}, needs {n} rows")
    out = np.einsum('ij,kjl,lm->kim', E.left, T.array, E.right)
    return Tensor3(out, T.field)


def transpose_tensor(T: Tensor3) -> Tensor3:
    """(A_1^T; ...; A_p^T)"""
    return Tensor3(np.swapaxes(T.array, 1, 2), T.field)


def permute_modes(T: Tensor3, order: Sequence[int]) -> Tensor3:
    """
    Reorder the three modes: output mode i is input mode order[i].

    permute_modes(T, (1, 0, 2)) is transpose_tensor(T).
    """
    order = tuple(int(o) for o in order)
    if sorted(order) != [0, 1, 2]:
        raise DimensionMismatch(f"Mode order must be a permutation of (0, 1, 2), got {order}")
    return Tensor3.from_cube(np.transpose(T.to_cube(), order), T.field)


def apply_slice_mixing(T: Tensor3, R: np.ndarray) -> Tensor3:
    """Replace slices by A'_k = sum_l R[k, l] A_l"""
    R = np.asarray(R)
    p = T.dims[2]
    if R.ndim != 2 or R.shape[1] != p:
        raise DimensionMismatch(f"Mixing matrix has shape {R.shape}, needs {p} columns")
    return Tensor3(np.einsum('kl,lij->kij', R, T.array), T.field)


def numerical_rank(M: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Number of singular values above rank_tol x the largest one"""
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0
    s = sla.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol.rank_tol * s[0]))


def support(M: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> SupportPattern:
    M = np.atleast_2d(np.asarray(M))
    scale = max_abs(M)
    if scale == 0:
        return SupportPattern(frozenset(), tol.support_tol, M.shape)
    rows, cols = np.nonzero(np.abs(M) > tol.support_tol * scale)
    cells = frozenset((int(i), int(j)) for i, j in zip(rows, cols))
    return SupportPattern(cells, tol.support_tol, M.shape)


def normal_form_slice(
    T: Tensor3,
    k: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[Tensor3, EquivalenceTransform, int]:
    """
    Bring slice k to Diag(E_r, O) by an equivalence transform.

    With A_k = U S V^H, left = Diag(1/s_1..1/s_r, 1..1) U^H and right = V.
    The transformed slice k is snapped to the exact pattern; the dropped
    part is below rank_tol relative to the largest singular value.

    Returns:
        (P.T.Q, (P, Q), r)
    """
    m, n, p = T.dims
    if not 0 <= k < p:
        raise IndexError(f"Slice index {k} out of range for {p} slices")

    A = T.slice(k)
    r = numerical_rank(A, tol)
    target = diag_pattern(m, n, r, A.dtype)

    if np.array_equal(A, target):
        return T, EquivalenceTransform.identity(m, n, A.dtype), r

    U, s, Vh = sla.svd(A)
    scale = np.ones(m)
    scale[:r] = 1.0 / s[:r]
    left = (scale[:, None] * U.conj().T).astype(A.dtype)
    right = Vh.conj().T.astype(A.dtype)
    left_inv = (U * (1.0 / scale)[None, :]).astype(A.dtype)
    right_inv = Vh.astype(A.dtype)
    E = EquivalenceTransform(left, right, left_inv, right_inv)

    arr = np.einsum('ij,kjl,lm->kim', left, T.array, right)
    arr[k] = target
    return Tensor3(arr, T.field), E, r


def unfold(T: Tensor3, mode: int) -> np.ndarray:
    """
    Flattening along one mode.

    mode 0: m x np matrix (A_1, ..., A_p); mode 1: n x mp matrix
    (A_1^T, ..., A_p^T); mode 2: p x mn matrix of vectorized slices.
    """
    arr = T.array
    if mode == 0:
        return np.hstack(list(arr))
    if mode == 1:
        return np.hstack([a.T for a in arr])
    if mode == 2:
        return arr.reshape(arr.shape[0], -1)
    raise ValueError(f"Mode must be 0, 1 or 2, got {mode}")


def flattening_rank_lower_bound(T: Tensor3, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    return max(numerical_rank(unfold(T, mode), tol) for mode in range(3))


def as_rng(seed: Any = None) -> np.random.Generator:
    """Pass a Generator through; anything else seeds a new one"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_matrix(rng: np.random.Generator, shape: Sequence[int], field: FieldTag = FieldTag.REAL) -> np.ndarray:
    """Entries uniform on [-1, 1]; under COMPLEX real and imaginary parts independently"""
    out = rng.uniform(-1.0, 1.0, size=tuple(shape))
    if FieldTag.parse(field) is FieldTag.COMPLEX:
        out = out + 1j * rng.uniform(-1.0, 1.0, size=tuple(shape))
    return out


def random_tensor(dims: Sequence[int], field: Any = FieldTag.REAL, seed: Any = None) -> Tensor3:
    m, n, p = (int(d) for d in dims)
    tag = FieldTag.parse(field)
    return Tensor3(random_matrix(as_rng(seed), (p, m, n), tag), tag)
