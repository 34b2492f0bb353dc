"""
Spectrum - Eigenvalues, pencil spectra and determinant polynomials on the slice span

Univariate determinant polynomials are recovered by interpolation at
Chebyshev points and their roots come from the companion matrix
(numpy.polynomial). Singular span members are searched on lines through
pairs of slices first, then on seeded random sections.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.polynomial.chebyshev as cheb
import numpy.polynomial.polynomial as poly
import scipy.linalg as sla

from .errors import DimensionMismatch, SpectrumError
from .linalg import (
    DEFAULT_TOLERANCES,
    FieldTag,
    Tensor3,
    Tolerances,
    as_rng,
    max_abs,
    numerical_rank,
    random_matrix,
)
from ..utils import get_debugger


DEFAULT_SEARCH_BUDGET = 64


@dataclass(frozen=True, eq=False)
class PolynomialF:
    """Univariate polynomial, coefficients in ascending degree"""

    coefficients: np.ndarray
    field: FieldTag = FieldTag.REAL

    def __post_init__(self):
        tag = FieldTag.parse(self.field)
        coeffs = np.atleast_1d(tag.coerce(self.coefficients))
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "field", tag)

    def degree(self, rel_tol: float = 0.0) -> int:
        """Index of the last coefficient above rel_tol x max|coefficient| (-1 for zero)"""
        scale = max_abs(self.coefficients)
        if scale == 0:
            return -1
        big = np.nonzero(np.abs(self.coefficients) > rel_tol * scale)[0]
        return int(big[-1])

    def __call__(self, t: Any) -> Any:
        return poly.polyval(t, self.coefficients)


@dataclass(frozen=True)
class PencilSpectrum:
    eigenvalues: Tuple[complex, ...]
    margin: float
    max_imag: float
    field: FieldTag

    def is_distinct(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return distinct_in_field(self, tol)


@dataclass(frozen=True, eq=False)
class DetEvaluator:
    """Black-box x -> det(sum_i x_i M_i) for a multivariate section of the span"""

    matrices: Tuple[np.ndarray, ...]

    def __call__(self, *coords: Any) -> complex:
        if len(coords) != len(self.matrices):
            raise DimensionMismatch(f"Expected {len(self.matrices)} coordinates, got {len(coords)}")
        M = sum(c * A for c, A in zip(coords, self.matrices))
        return complex(np.linalg.det(M))


def _require_square(M: np.ndarray, what: str = "Matrix") -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {M.shape}")


def _data_field(*mats: np.ndarray) -> FieldTag:
    return FieldTag.COMPLEX if any(np.iscomplexobj(M) for M in mats) else FieldTag.REAL


def _margin(values: np.ndarray) -> float:
    if values.size < 2:
        return float("inf")
    gaps = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(gaps, np.inf)
    return float(np.min(gaps))


def eigenvalues(M: Any) -> np.ndarray:
    """Eigenvalues of a square matrix as a complex array"""
    M = np.atleast_2d(np.asarray(M))
    _require_square(M)
    try:
        values = sla.eigvals(M)
    except (sla.LinAlgError, ValueError) as exc:
        raise SpectrumError(f"Eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise SpectrumError("Eigen solver returned non-finite values")
    return values.astype(np.complex128)


def pencil_spectrum(
    X: Any,
    Y: Any,
    tol: Tolerances = DEFAULT_TOLERANCES,
    field: Optional[FieldTag] = None,
) -> PencilSpectrum:
    """
    Roots of det(lambda X - Y), i.e. the eigenvalues of X^{-1} Y.

    Args:
        X: Nonsingular leading matrix
        Y: Trailing matrix of the same size
        field: Field the distinctness is judged over; inferred from the data when omitted
    """
    X = np.atleast_2d(np.asarray(X))
    Y = np.atleast_2d(np.asarray(Y))
    _require_square(X, "Leading matrix")
    if Y.shape != X.shape:
        raise DimensionMismatch(f"Pencil matrices differ in shape: {X.shape} vs {Y.shape}")
    if numerical_rank(X, tol) < X.shape[0]:
        raise SpectrumError("Leading matrix of the pencil is singular")

    values = eigenvalues(sla.solve(X, Y))
    tag = FieldTag.parse(field) if field is not None else _data_field(X, Y)
    return PencilSpectrum(
        eigenvalues=tuple(complex(v) for v in values),
        margin=_margin(values),
        max_imag=float(np.max(np.abs(values.imag))) if values.size else 0.0,
        field=tag,
    )


def distinct_in_field(spectrum: PencilSpectrum, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Pairwise separated, and under REAL also numerically real"""
    if not spectrum.margin > tol.margin_tol:
        return False
    if spectrum.field is FieldTag.REAL:
        return spectrum.max_imag < tol.margin_tol
    return True


def _combine(T: Tensor3, coeffs: Any) -> np.ndarray:
    return np.tensordot(np.asarray(coeffs), T.array, axes=(0, 0))


def det_polynomial_on_plane(
    T: Tensor3,
    coeff_dirs: Sequence[Any],
) -> Union[PolynomialF, DetEvaluator]:
    """
    Determinant along a line or a plane of the slice span.

    With two directions c0, c1 the result is the polynomial
    t -> det(M0 + t M1), M_i = sum_k c_i[k] A_k, interpolated at n+1
    Chebyshev points. With three directions an evaluator of
    det(x M0 + y M1 + z M2) is returned.
    """
    m, n, p = T.dims
    if m != n:
        raise DimensionMismatch(f"Determinants need square slices, got {m}x{n}")
    dirs = [np.asarray(c) for c in coeff_dirs]
    for c in dirs:
        if c.shape != (p,):
            raise DimensionMismatch(f"Coefficient direction has shape {c.shape}, expected ({p},)")

    mats = [_combine(T, c) for c in dirs]
    if len(mats) == 3:
        return DetEvaluator(tuple(mats))
    if len(mats) != 2:
        raise ValueError(f"Expected 2 or 3 coefficient directions, got {len(mats)}")

    M0, M1 = mats
    nodes = cheb.chebpts1(n + 1)
    values = np.array([np.linalg.det(M0 + t * M1) for t in nodes])
    vander = poly.polyvander(nodes, n)
    coeffs = np.linalg.solve(vander, values)

    tag = T.field.join(_data_field(*mats))
    return PolynomialF(coeffs if tag is FieldTag.COMPLEX else coeffs.real, tag)


def polynomial_roots(P: PolynomialF, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Companion-matrix roots after trimming numerically zero leading coefficients"""
    deg = P.degree(tol.rank_tol)
    if deg < 1:
        return np.zeros(0, dtype=np.complex128)
    return poly.polyroots(P.coefficients[:deg + 1]).astype(np.complex128)


def real_roots(P: PolynomialF, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    roots = polynomial_roots(P, tol)
    return np.sort(roots[np.abs(roots.imag) < tol.margin_tol].real)


def _is_singular_member(M: np.ndarray, scale: float, tol: Tolerances) -> bool:
    if max_abs(M) <= tol.support_tol * scale:
        return False
    return numerical_rank(M, tol) < M.shape[0]


def _line_roots(M0: np.ndarray, M1: np.ndarray, field: FieldTag, tol: Tolerances) -> List[complex]:
    """Candidate t with det(M0 + t M1) = 0, from interpolation and the pencil (M0, -M1)"""
    n = M0.shape[0]
    nodes = cheb.chebpts1(n + 1)
    values = np.array([np.linalg.det(M0 + t * M1) for t in nodes])
    coeffs = np.linalg.solve(poly.polyvander(nodes, n), values)
    candidates = list(polynomial_roots(PolynomialF(coeffs, FieldTag.COMPLEX), tol))

    try:
        pencil = sla.eigvals(M0, -M1)
        candidates.extend(v for v in pencil if np.isfinite(v))
    except (sla.LinAlgError, ValueError):
        pass

    if field is FieldTag.REAL:
        return [complex(t.real) for t in candidates if abs(t.imag) < tol.margin_tol]
    return [complex(t) for t in candidates]


def find_singular_combination(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    budget: int = DEFAULT_SEARCH_BUDGET,
    rng: Any = None,
) -> Optional[np.ndarray]:
    """
    Coefficient vector c != 0 with sum_k c_k A_k nonzero and singular.

    Searches single slices, then lines A_k + t A_l, then `budget` random
    lines of the span. Returns None when nothing is found.
    """
    m, n, p = T.dims
    if m != n:
        raise DimensionMismatch(f"Singular members need square slices, got {m}x{n}")

    debugger = get_debugger()
    slices = T.array
    scale = max_abs(slices)
    if scale == 0:
        return None

    for k in range(p):
        if _is_singular_member(slices[k], scale, tol):
            coeffs = np.zeros(p, dtype=T.field.dtype)
            coeffs[k] = 1
            debugger.debug("spectrum", "Singular slice found", slice=k)
            return coeffs

    def try_line(c0: np.ndarray, c1: np.ndarray) -> Optional[np.ndarray]:
        M0, M1 = _combine(T, c0), _combine(T, c1)
        for t in _line_roots(M0, M1, T.field, tol):
            coeffs = c0 + (t if T.field is FieldTag.COMPLEX else t.real) * c1
            if _is_singular_member(_combine(T, coeffs), scale, tol):
                return coeffs / np.linalg.norm(coeffs)
        return None

    basis = np.eye(p, dtype=T.field.dtype)
    for k, l in combinations(range(p), 2):
        found = try_line(basis[k], basis[l])
        if found is not None:
            debugger.debug("spectrum", "Singular member on slice line", slices=f"{k},{l}")
            return found

    rng = as_rng(rng)
    for attempt in range(budget if p > 1 else 0):
        c0 = random_matrix(rng, (p,), T.field)
        c1 = random_matrix(rng, (p,), T.field)
        found = try_line(c0, c1)
        if found is not None:
            debugger.debug("spectrum", "Singular member on random section", attempt=attempt)
            return found

    debugger.debug("spectrum", "No singular member found", n=n, p=p, field=T.field.value, budget=budget)
    return None


def max_span_rank(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    rng: Any = None,
    samples: int = DEFAULT_SEARCH_BUDGET,
) -> Tuple[int, np.ndarray]:
    """
    Estimate max{rank M : M in span(A_1..A_p)} with a maximizing coefficient vector.

    Tries the slices, pairwise sums and `samples` random combinations, then
    greedily adds basis directions while the rank keeps growing.
    """
    m, n, p = T.dims
    cap = min(m, n)
    dtype = T.field.dtype
    basis = np.eye(p, dtype=dtype)

    candidates: List[np.ndarray] = list(basis)
    candidates.extend(basis[k] + basis[l] for k, l in combinations(range(p), 2))
    rng = as_rng(rng)
    candidates.extend(random_matrix(rng, (p,), T.field) for _ in range(samples))

    best_rank, best = -1, basis[0]
    for coeffs in candidates:
        r = numerical_rank(_combine(T, coeffs), tol)
        if r > best_rank:
            best_rank, best = r, coeffs
        if best_rank == cap:
            return best_rank, best

    improved = True
    while improved and best_rank < cap:
        improved = False
        for k in range(p):
            for t in (1.0, -1.0, 0.5):
                trial = best + t * basis[k]
                r = numerical_rank(_combine(T, trial), tol)
                if r > best_rank:
                    best_rank, best, improved = r, trial, True
    return best_rank, best
