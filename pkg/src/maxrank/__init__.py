"""maxrank - Constructive upper bounds on the rank of 3-tensors over R and C"""
__version__ = "1.0.0"

from .core.bounds import BoundReport, upper_bound
from .core.certify import CertificateReport, Verdict, verify
from .core.decomposer import decompose
from .core.linalg import FieldTag, Tensor3, Tolerances
from .models import Decomposition, RankOneTerm

__all__ = [
    'BoundReport',
    'CertificateReport',
    'Decomposition',
    'FieldTag',
    'RankOneTerm',
    'Tensor3',
    'Tolerances',
    'Verdict',
    'decompose',
    'upper_bound',
    'verify',
]
