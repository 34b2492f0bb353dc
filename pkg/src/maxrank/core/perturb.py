"""
Perturb - Diagonal perturbations that give a pencil n distinct eigenvalues

Two constructions:
- perturb_to_distinct: add diagonal X, Y to (A, B) so that det(lambda(A+X) - (B+Y))
  has n distinct roots in the field, optionally leaving a principal block of
  preserved indices untouched.
- perturb_with_anchor: the same with a prescribed vector p and right-hand
  sides a, b so that (A+X)p = a and (B+Y)p = b.

Both shrink epsilon by halving from 1 until the spectrum qualifies. Inputs are
normalized by their largest entry first, so epsilon is dimensionless.
"""
from dataclasses import dataclass
from typing import Any, Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, EpsilonExhausted, PreconditionError, SpectrumError
from .linalg import DEFAULT_TOLERANCES, FieldTag, Tolerances, max_abs, support
from .spectrum import PencilSpectrum, distinct_in_field, pencil_spectrum
from ..utils import get_debugger


@dataclass(frozen=True, eq=False)
class DiagonalPerturbation:
    """
    Diagonal X, Y with X[i, i] = Y[i, i] = 0 for every preserved index.

    targets lists the preserved block's eigenvalues followed by the fresh
    values placed on the remaining indices.
    """

    X: np.ndarray
    Y: np.ndarray
    epsilon: float
    targets: Tuple[complex, ...]
    preserved: FrozenSet[int]


@dataclass(frozen=True, eq=False)
class AnchoredPerturbation:
    """Diagonal X, Y and p = epsilon * ones with (A+X)p = a and (B+Y)p = b"""

    X: np.ndarray
    Y: np.ndarray
    p: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class EpsilonCandidate:
    """
    Outcome of one candidate epsilon.

    A candidate without a spectrum only asks for a nonsingular leading matrix.
    """

    nonsingular: bool
    spectrum: Optional[PencilSpectrum] = None

    def qualifies(self, tol: Tolerances) -> bool:
        if not self.nonsingular:
            return False
        return self.spectrum is None or distinct_in_field(self.spectrum, tol)


def _assess(X: np.ndarray, Y: np.ndarray, tol: Tolerances, field: FieldTag, distinct: bool = True) -> EpsilonCandidate:
    try:
        spectrum = pencil_spectrum(X, Y, tol, field=field)
    except SpectrumError:
        return EpsilonCandidate(nonsingular=False)
    return EpsilonCandidate(nonsingular=True, spectrum=spectrum if distinct else None)


def epsilon_search(candidate: Callable[[float], EpsilonCandidate], tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Largest epsilon in 1, 1/2, 1/4, ... >= eps_floor whose candidate qualifies.

    Raises:
        EpsilonExhausted: no epsilon down to eps_floor qualified
    """
    eps = 1.0
    last = eps
    while eps >= tol.eps_floor:
        if candidate(eps).qualifies(tol):
            return eps
        last = eps
        eps /= 2.0
    raise EpsilonExhausted(f"No epsilon >= {tol.eps_floor:g} gave a qualifying pencil", last_epsilon=last)


def _square_pair(A: Any, B: Any) -> Tuple[np.ndarray, np.ndarray]:
    A = np.atleast_2d(np.asarray(A))
    B = np.atleast_2d(np.asarray(B))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"Pencil matrices must be square, got {A.shape}")
    if B.shape != A.shape:
        raise DimensionMismatch(f"Pencil matrices differ in shape: {A.shape} vs {B.shape}")
    return A, B


def _field_of(field: Optional[Any], *mats: np.ndarray) -> FieldTag:
    if field is not None:
        return FieldTag.parse(field)
    return FieldTag.COMPLEX if any(np.iscomplexobj(M) for M in mats) else FieldTag.REAL


def _fresh_targets(count: int, avoid: Sequence[complex], spread: float) -> List[float]:
    """First `count` values of 1..n, half-integers, then larger integers, kept 0.25 away from `avoid`"""
    n = count + len(avoid)
    pool = [float(k) for k in range(1, n + 1)]
    pool += [k + 0.5 for k in range(0, n + 1)]
    pool += [float(k) for k in range(n + 1, 2 * n + 4)]

    chosen: List[float] = []
    for value in pool:
        scaled = spread * value
        if all(abs(scaled - e) > 0.25 * spread for e in avoid) and scaled not in chosen:
            chosen.append(scaled)
        if len(chosen) == count:
            break
    return chosen


def perturb_to_distinct(
    A: Any,
    B: Any,
    preserved: Iterable[int] = (),
    tol: Tolerances = DEFAULT_TOLERANCES,
    field: Optional[Any] = None,
    spread: float = 1.0,
) -> DiagonalPerturbation:
    """
    Diagonal X, Y making the pencil (A+X, B+Y) have n distinct roots in the field.

    With preserved indices S (0-based), A restricted to S must be nonsingular
    and its pencil with B restricted to S must already have distinct roots;
    X and Y then vanish on S and scale as 1/eps^2 elsewhere. Without
    preserved indices X = I/eps and Y = Diag(targets)/eps.

    Args:
        spread: Multiplier on the fresh target values (retries use 2, 4)

    Raises:
        PreconditionError: the preserved block does not qualify
        EpsilonExhausted: no epsilon down to eps_floor worked
    """
    A, B = _square_pair(A, B)
    n = A.shape[0]
    tag = _field_of(field, A, B)
    keep = sorted({int(i) for i in preserved})
    if any(i < 0 or i >= n for i in keep):
        raise DimensionMismatch(f"Preserved indices {keep} out of range for size {n}")

    debugger = get_debugger()
    scale = max(max_abs(A), max_abs(B)) or 1.0
    order = keep + [i for i in range(n) if i not in keep]
    An = (A / scale)[np.ix_(order, order)]
    Bn = (B / scale)[np.ix_(order, order)]
    r = len(keep)

    block_eigs: Tuple[complex, ...] = ()
    if r:
        try:
            block = pencil_spectrum(An[:r, :r], Bn[:r, :r], tol, field=tag)
        except SpectrumError as exc:
            raise PreconditionError(f"Preserved block is singular: {exc}") from exc
        if not distinct_in_field(block, tol):
            raise PreconditionError("Preserved block pencil has no distinct roots in the field")
        block_eigs = block.eigenvalues

    fresh = _fresh_targets(n - r, block_eigs, spread)
    D = np.zeros(n)
    D[r:] = fresh
    J = np.zeros(n)
    J[r:] = 1.0

    def build(eps: float) -> Tuple[np.ndarray, np.ndarray]:
        power = 1.0 if r == 0 else 2.0
        return np.diag(J) / eps ** power, np.diag(D) / eps ** power

    def candidate(eps: float) -> EpsilonCandidate:
        X, Y = build(eps)
        return _assess(An + X, Bn + Y, tol, tag)

    eps = epsilon_search(candidate, tol)
    Xn, Yn = build(eps)

    inverse = np.argsort(order)
    X = scale * Xn[np.ix_(inverse, inverse)]
    Y = scale * Yn[np.ix_(inverse, inverse)]
    X = X.astype(tag.dtype)
    Y = Y.astype(tag.dtype)

    debugger.debug("perturb", "Distinct pencil found", n=n, preserved=",".join(map(str, keep)) or None,
                   epsilon=eps, spread=spread)
    return DiagonalPerturbation(
        X=X,
        Y=Y,
        epsilon=eps,
        targets=tuple(block_eigs) + tuple(complex(s) for s in fresh),
        preserved=frozenset(keep),
    )


def variant_b_applicable(A: Any, B: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """
    Whether the last two indices can be preserved.

    Needs A[n-2, n-1] and A[n-1, n-2] in support(A), A[n-1, n-1] and
    B[n-1, n-1] outside the supports, and the ratios
    B[n-2, n-1]/A[n-2, n-1] and B[n-1, n-2]/A[n-1, n-2] apart by more than
    margin_tol relative to their size.
    """
    A, B = _square_pair(A, B)
    n = A.shape[0]
    if n < 2:
        return False

    supp_a, supp_b = support(A, tol), support(B, tol)
    upper, lower, corner = (n - 2, n - 1), (n - 1, n - 2), (n - 1, n - 1)
    if upper not in supp_a or lower not in supp_a:
        return False
    if corner in supp_a or corner in supp_b:
        return False

    rho_upper = B[upper] / A[upper]
    rho_lower = B[lower] / A[lower]
    size = max(1.0, abs(rho_upper), abs(rho_lower))
    return bool(abs(rho_upper - rho_lower) > tol.margin_tol * size)


def perturb_with_anchor(
    A: Any,
    B: Any,
    a: Any,
    b: Any,
    tol: Tolerances = DEFAULT_TOLERANCES,
    field: Optional[Any] = None,
    distinct: bool = True,
) -> AnchoredPerturbation:
    """
    Diagonal X, Y and p = eps * ones with (A+X)p = a and (B+Y)p = b.

    X = Diag(a - eps A 1)/eps and Y = Diag(b - eps B 1)/eps. When `distinct`
    is set, the ratios b_i/a_i must be pairwise distinct and the pencil
    (A+X, B+Y) is required to have distinct roots; otherwise only A+X
    nonsingular is required.

    Raises:
        PreconditionError: a has a (numerically) zero entry, the ratios
            coincide, or an anchor identity misses the relative tolerance
        EpsilonExhausted: no epsilon down to eps_floor worked
    """
    A, B = _square_pair(A, B)
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    n = A.shape[0]
    if a.shape != (n,) or b.shape != (n,):
        raise DimensionMismatch(f"Anchor vectors must have length {n}")
    tag = _field_of(field, A, B, a, b)

    a_scale = max_abs(a)
    if a_scale == 0 or np.any(np.abs(a) <= tol.support_tol * a_scale):
        raise PreconditionError("Anchor vector a has a zero entry")
    if distinct and n > 1:
        ratios = b / a
        gaps = np.abs(ratios[:, None] - ratios[None, :]) + np.diag(np.full(n, np.inf))
        if gaps.min() <= tol.margin_tol * max_abs(ratios):
            raise PreconditionError("Anchor ratios b_i/a_i are not pairwise distinct")

    scale = max(max_abs(A), max_abs(B), a_scale, max_abs(b))
    An, Bn, an, bn = A / scale, B / scale, a / scale, b / scale
    row_a = An.sum(axis=1)
    row_b = Bn.sum(axis=1)

    def build(eps: float) -> Tuple[np.ndarray, np.ndarray]:
        return np.diag(an - eps * row_a) / eps, np.diag(bn - eps * row_b) / eps

    def candidate(eps: float) -> EpsilonCandidate:
        X, Y = build(eps)
        return _assess(An + X, Bn + Y, tol, tag, distinct=distinct)

    eps = epsilon_search(candidate, tol)
    Xn, Yn = build(eps)
    X = (scale * Xn).astype(tag.dtype)
    Y = (scale * Yn).astype(tag.dtype)
    p = np.full(n, eps, dtype=tag.dtype)

    for lhs, rhs, name in (((A + X) @ p, a, "a"), ((B + Y) @ p, b, "b")):
        if np.linalg.norm(lhs - rhs) > tol.residual_tol * max(np.linalg.norm(rhs), np.linalg.norm(lhs)):
            raise PreconditionError(f"Anchor identity for {name} does not hold")

    get_debugger().debug("perturb", "Anchored pencil found", n=n, epsilon=eps, distinct=distinct)
    return AnchoredPerturbation(X=X, Y=Y, p=p, epsilon=eps)
