"""Base Method Interface"""
from abc import ABC, abstractmethod
from datetime import datetime
from typing import Any, Dict, Optional, Sequence, Tuple

from ..core.errors import MaxRankError
from ..core.linalg import DEFAULT_TOLERANCES, FieldTag, Tensor3, Tolerances
from ..models.decomposition import Decomposition


class MethodPlugin(ABC):
    """
    A decomposition method.

    Plugins receive their `plugins.<name>` block from config.yml; the
    dispatcher picks the tensor orientation from `claimed_bound` and the
    manifest's `expects` facts, then calls `execute`.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        self.name: Optional[str] = None
        self.category = "method"
        self._metadata: Dict[str, Any] = {}

    @abstractmethod
    def claimed_bound(self, dims: Sequence[int], field: FieldTag) -> int:
        """Number of terms the method promises for a tensor of this shape"""

    @abstractmethod
    def decompose(self, T: Tensor3, tol: Tolerances = DEFAULT_TOLERANCES, seed: Any = None) -> Decomposition:
        """Decompose a tensor already in the orientation the method expects"""

    @property
    def aliases(self) -> Tuple[str, ...]:
        return tuple(self._metadata.get('aliases', [])) or ((self.name,) if self.name else ())

    def execute(self, job: Dict[str, Any]) -> Dict[str, Any]:
        """
        Run one job {tensor, tol, seed} and wrap the outcome.

        Returns:
            {status: {success, error, started_at, finished_at, duration_ms}, decomposition}
        """
        started = datetime.now()
        decomposition = None
        error = None
        try:
            decomposition = self.decompose(job['tensor'], job.get('tol', DEFAULT_TOLERANCES), job.get('seed'))
        except MaxRankError as exc:
            error = type(exc).__name__
            detail = str(exc)
        else:
            detail = None
        finished = datetime.now()

        return {
            'status': {
                'success': decomposition is not None,
                'error': error,
                'detail': detail,
                'started_at': started.isoformat(),
                'finished_at': finished.isoformat(),
                'duration_ms': int((finished - started).total_seconds() * 1000),
            },
            'decomposition': decomposition,
        }

    def _option(self, key: str, default: Any) -> Any:
        value = self.config.get(key)
        return default if value is None else value
