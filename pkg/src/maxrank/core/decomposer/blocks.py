"""
Building Blocks - Pencils, diagonal tensors and single matrices as rank-one terms

Every routine here returns a Decomposition in the coordinates of its own
input; the method plugins embed and pull these back.
"""
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionMismatch, PreconditionError, SpectrumError
from ..linalg import (
    DEFAULT_TOLERANCES,
    EquivalenceTransform,
    FieldTag,
    Tensor3,
    Tolerances,
    apply_slice_mixing,
    max_abs,
    numerical_rank,
)
from ..spectrum import distinct_in_field, eigenvalues, pencil_spectrum
from ...models.decomposition import Decomposition, RankOneTerm, make_term


def _field_of(field: Optional[Any], *mats: np.ndarray) -> FieldTag:
    if field is not None:
        return FieldTag.parse(field)
    return FieldTag.COMPLEX if any(np.iscomplexobj(M) for M in mats) else FieldTag.REAL


def _tail(M: Optional[Any], n: int) -> np.ndarray:
    if M is None:
        return np.zeros((n, 0))
    M = np.asarray(M)
    return M.reshape(n, -1)


def choose_shift(spectrum: np.ndarray, gap: float = 0.5) -> float:
    """Smallest nonnegative integer at distance >= gap from every eigenvalue"""
    for beta in range(spectrum.size + 2):
        if spectrum.size == 0 or np.min(np.abs(spectrum - beta)) >= gap:
            return float(beta)
    raise SpectrumError("No integer shift away from the pencil spectrum")


def decompose_pencil_tail(
    X: Any,
    U: Optional[Any],
    Y: Any,
    V: Optional[Any],
    tol: Tolerances = DEFAULT_TOLERANCES,
    field: Optional[Any] = None,
) -> Decomposition:
    """
    At most m rank-one terms for the n x m x 2 tensor ([X U]; [Y V]).

    X^{-1} Y = Q L Q^{-1} is diagonalized and W = X Q, so the pencil is
    W ([I U']; [L V']) Diag(Q^{-1}, I). Each tail column j splits as
    u'_j = y_j + z_j with (beta I - L) z_j = v'_j - L u'_j, giving the terms
    e_i (x) (e_i + sum_j y_ij e_{n+j}) (x) (1, l_i) and z_j (x) e_{n+j} (x) (1, beta).

    Raises:
        SpectrumError: X singular or the spectrum not distinct in the field
    """
    X = np.atleast_2d(np.asarray(X))
    Y = np.atleast_2d(np.asarray(Y))
    n = X.shape[0]
    U = _tail(U, n)
    V = _tail(V, n)
    if Y.shape != X.shape or U.shape != V.shape:
        raise DimensionMismatch(f"Pencil blocks do not fit: X{X.shape} Y{Y.shape} U{U.shape} V{V.shape}")
    tag = _field_of(field, X, Y, U, V)

    spectrum = pencil_spectrum(X, Y, tol, field=tag)
    if not distinct_in_field(spectrum, tol):
        raise SpectrumError("Pencil spectrum is repeated or leaves the field")

    lam, Q = sla.eig(sla.solve(X, Y))
    if tag is FieldTag.REAL:
        lam, Q = lam.real, Q.real
    W = X @ Q
    U_p = sla.solve(W, U)
    V_p = sla.solve(W, V)
    Q_inv_t = sla.inv(Q).T

    width = U.shape[1]
    m = n + width
    beta = choose_shift(np.asarray(lam)) if width else 0.0
    Z = (V_p - lam[:, None] * U_p) / (beta - lam)[:, None]
    Y_tail = U_p - Z

    terms: List[RankOneTerm] = []
    for i in range(n):
        b = np.concatenate([Q_inv_t[:, i], Y_tail[i]])
        terms.append(make_term(W[:, i], b, [1.0, lam[i]]))
    for j in range(width):
        if not np.any(Z[:, j]):
            continue
        b = np.zeros(m)
        b[n + j] = 1.0
        terms.append(make_term(W @ Z[:, j], b, [1.0, beta]))

    return Decomposition(tuple(terms), (n, m, 2), tag, ("pencil_tail",), claimed_bound=m)


def decompose_diagonal_tensor(
    slices: Sequence[Any],
    tol: Tolerances = DEFAULT_TOLERANCES,
    field: Optional[Any] = None,
) -> Decomposition:
    """
    e_i (x) e_i (x) (D_1[i, i], ..., D_p[i, i]) for every nonzero fiber.

    Slices may be rectangular (D, O) shaped.

    Raises:
        PreconditionError: an off-diagonal entry is above support_tol
    """
    mats = [np.atleast_2d(np.asarray(D)) for D in slices]
    if not mats:
        raise DimensionMismatch("Diagonal tensor needs at least one slice")
    stack = np.stack(mats)
    p, rows, cols = stack.shape
    tag = _field_of(field, stack)

    off = stack.copy()
    k = min(rows, cols)
    off[:, np.arange(k), np.arange(k)] = 0
    if max_abs(off) > tol.support_tol * max(max_abs(stack), 1.0):
        raise PreconditionError("Slices of a diagonal tensor must be diagonal")

    terms = []
    for i in range(k):
        fiber = stack[:, i, i]
        if not np.any(fiber != 0):
            continue
        a = np.zeros(rows)
        b = np.zeros(cols)
        a[i] = b[i] = 1.0
        terms.append(make_term(a, b, fiber))
    return Decomposition(tuple(terms), (rows, cols, p), tag, ("diagonal",), claimed_bound=k)


def decompose_matrix(M: Any, tol: Tolerances = DEFAULT_TOLERANCES, field: Optional[Any] = None) -> Decomposition:
    """SVD split of one slice into numerical_rank(M) terms with c = (1,)"""
    M = np.atleast_2d(np.asarray(M))
    tag = _field_of(field, M)
    r = numerical_rank(M, tol)
    rows, cols = M.shape
    if r == 0:
        return Decomposition((), (rows, cols, 1), tag, ("matrix",), claimed_bound=0)

    U, s, Vh = sla.svd(M)
    terms = tuple(make_term(U[:, i] * s[i], Vh[i], [1.0]) for i in range(r))
    return Decomposition(terms, (rows, cols, 1), tag, ("matrix",), claimed_bound=min(rows, cols))


def singularizing_diagonal(M: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> Optional[np.ndarray]:
    """
    Diagonal D with M - D singular, or None.

    Tries one cell d = 1/(M^{-1})_ii, then two cells with
    d e (M^{-1})_ij (M^{-1})_ji = 1, then a multiple of the identity by an
    eigenvalue in the field of M.
    """
    M = np.atleast_2d(np.asarray(M))
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch(f"Expected a square matrix, got {M.shape}")
    if numerical_rank(M, tol) < n:
        return np.zeros_like(M)

    def works(D: np.ndarray) -> bool:
        return numerical_rank(M - D, tol) < n

    G = sla.inv(M)
    g_scale = max_abs(G)
    diag = np.abs(np.diag(G))
    i = int(np.argmax(diag))
    if diag[i] > tol.support_tol * g_scale:
        D = np.zeros_like(M)
        D[i, i] = 1.0 / G[i, i]
        if works(D):
            return D

    if n >= 2:
        products = G * G.T
        np.fill_diagonal(products, 0)
        i, j = np.unravel_index(int(np.argmax(np.abs(products))), products.shape)
        if abs(products[i, j]) > tol.support_tol * g_scale ** 2:
            D = np.zeros_like(M)
            D[i, i] = 1.0
            D[j, j] = 1.0 / products[i, j]
            if works(D):
                return D

    for lam in eigenvalues(M):
        if not np.iscomplexobj(M) and abs(lam.imag) >= tol.margin_tol:
            continue
        value = lam.real if not np.iscomplexobj(M) else lam
        D = value * np.eye(n, dtype=M.dtype)
        if works(D):
            return D
    return None


def rotate_into_last_slice(T: Tensor3, coeffs: Any) -> Tuple[Tensor3, np.ndarray]:
    """
    Mix slices so that the last one becomes sum_k coeffs[k] A_k.

    The other rows of the mixing matrix are the unit vectors of every slice
    except the one with the largest |coeffs[k]|.
    """
    p = T.dims[2]
    c = T.field.coerce(np.asarray(coeffs).ravel(), rel_tol=1e-8)
    if c.shape != (p,):
        raise DimensionMismatch(f"Coefficient vector has shape {c.shape}, expected ({p},)")
    k = int(np.argmax(np.abs(c)))
    R = np.zeros((p, p), dtype=T.field.dtype)
    for row, l in enumerate(l for l in range(p) if l != k):
        R[row, l] = 1.0
    R[p - 1] = c
    return apply_slice_mixing(T, R), R


def permutation_transform(row_order: Sequence[int], col_order: Sequence[int]) -> EquivalenceTransform:
    """Transform whose image has row i = row row_order[i] and column j = column col_order[j]"""
    Pr = np.eye(len(row_order))[list(row_order)]
    Pc = np.eye(len(col_order))[list(col_order)]
    return EquivalenceTransform(Pr, Pc.T, Pr.T, Pc)


def swapped(size: int, i: int, j: int) -> List[int]:
    order = list(range(size))
    order[i], order[j] = order[j], order[i]
    return order
