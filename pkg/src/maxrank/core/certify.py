"""
Certify - Reconstruction, residuals and verdicts

A decomposition is released only when its terms reconstruct the tensor
within residual_tol, its length respects the claimed bound and the
flattening lower bound does not exceed it.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_TOLERANCES, FieldTag, Tensor3, Tolerances, flattening_rank_lower_bound
from ..models.decomposition import Decomposition, RankOneTerm
from ..utils import get_debugger


class Verdict(str, Enum):
    CERTIFIED = "certified"
    RESIDUAL_FAIL = "residual_fail"
    BOUND_FAIL = "bound_fail"


@dataclass(frozen=True)
class CertificateReport:
    term_count: int
    claimed_bound: int
    relative_residual: float
    lower_bound: int
    verdict: Verdict
    method_chain: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def to_dict(self) -> Dict[str, Any]:
        return {
            'term_count': self.term_count,
            'claimed_bound': self.claimed_bound,
            'relative_residual': self.relative_residual,
            'lower_bound': self.lower_bound,
            'verdict': self.verdict.value,
            'method_chain': list(self.method_chain),
            'notes': list(self.notes),
        }


def reconstruct(
    terms: Union[Decomposition, Sequence[RankOneTerm]],
    dims: Sequence[int] = None,
    field: Any = None,
) -> Tensor3:
    """
    Sum of the rank-one terms.

    Args:
        terms: A Decomposition, or a term list together with dims
        field: Defaults to the decomposition's field, COMPLEX if any term is complex

    Raises:
        DimensionMismatch: a term does not match dims
    """
    if isinstance(terms, Decomposition):
        dims = terms.dims if dims is None else dims
        field = terms.field if field is None else field
        terms = terms.terms
    if dims is None:
        raise DimensionMismatch("reconstruct needs dims for a bare term list")

    m, n, p = (int(d) for d in dims)
    out = np.zeros((p, m, n), dtype=np.complex128)
    for idx, term in enumerate(terms):
        shape = (len(term.a), len(term.b), len(term.c))
        if shape != (m, n, p):
            raise DimensionMismatch(f"Term {idx} has vector lengths {shape}, expected {(m, n, p)}")
        out += term.slices()

    if field is None:
        field = FieldTag.COMPLEX if any(np.iscomplexobj(v) for t in terms for v in t.vectors()) else FieldTag.REAL
    tag = FieldTag.parse(field)
    if tag is FieldTag.REAL:
        # rounding in the imaginary part of real-field terms is not a field change
        out = out.real
    return Tensor3(out, tag)


def relative_residual(T: Tensor3, terms: Union[Decomposition, Sequence[RankOneTerm]]) -> float:
    """
    ||T - sum of terms||_F / ||T||_F.

    For the zero tensor the absolute norm of the reconstruction is returned,
    so only exactly vanishing terms pass.
    """
    if isinstance(terms, Decomposition):
        if tuple(terms.dims) != T.dims:
            raise DimensionMismatch(f"Decomposition has dims {terms.dims}, tensor has {T.dims}")
        recon = terms.reconstruct_array()
    else:
        recon = reconstruct(terms, T.dims, FieldTag.COMPLEX).slices
    diff = float(np.linalg.norm((T.slices - recon).ravel()))
    norm = T.norm()
    return diff if norm == 0 else diff / norm


def verify(T: Tensor3, D: Decomposition, tol: Tolerances = DEFAULT_TOLERANCES) -> CertificateReport:
    """
    Check a decomposition against its tensor.

    Raises:
        DimensionMismatch: shapes disagree
    """
    residual = relative_residual(T, D)
    lower = flattening_rank_lower_bound(T, tol)
    count = len(D)

    passes_residual = residual == 0 if T.is_zero() else residual <= tol.residual_tol
    if not passes_residual:
        verdict = Verdict.RESIDUAL_FAIL
    elif count > D.claimed_bound or lower > count:
        verdict = Verdict.BOUND_FAIL
    else:
        verdict = Verdict.CERTIFIED

    get_debugger().debug("certify", "Decomposition verified", dims="x".join(map(str, T.dims)), terms=count,
                         bound=D.claimed_bound, lower=lower, residual=f"{residual:.3e}", verdict=verdict.value)
    return CertificateReport(
        term_count=count,
        claimed_bound=D.claimed_bound,
        relative_residual=residual,
        lower_bound=lower,
        verdict=verdict,
        method_chain=D.method,
        notes=D.notes,
    )
