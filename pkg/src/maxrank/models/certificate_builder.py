"""
Certificate Builder - JSON codec for tensors and certificates, run reports

Tensor file:       {"dims": [m, n, p], "field": "real", "slices": [p x m x n nested lists]}
Certificate file:  {"dims", "field", "method", "claimed_bound", "seed", "notes",
                    "tolerances", "terms": [{"a": [...], "b": [...], "c": [...]}]}

Under the complex field every entry is a [re, im] pair; real entries are
plain numbers.
"""
import json
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.config_validator import ConfigValidator
from ..core.errors import CertificateFormatError, MaxRankError
from ..core.linalg import FieldTag, Tensor3, Tolerances
from ..utils.debug import get_debugger
from .decomposition import Decomposition, make_term

Document = Union[str, bytes, Dict[str, Any]]


def encode_array(values: Any, field: FieldTag) -> Any:
    arr = np.asarray(values)
    if field is FieldTag.COMPLEX:
        pairs = np.stack([arr.real, arr.imag], axis=-1)
        return pairs.tolist()
    return np.real(arr).astype(float).tolist()


def decode_array(values: Any, field: FieldTag, ndim: int) -> np.ndarray:
    """Nested lists of numbers or [re, im] pairs to an ndim-dimensional array"""
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise CertificateFormatError(f"Entries must be numbers or [re, im] pairs: {e}") from e
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim != ndim:
        raise CertificateFormatError(f"Expected a {ndim}-dimensional array, got shape {arr.shape}")
    try:
        return field.coerce(arr)
    except MaxRankError as e:
        raise CertificateFormatError(str(e)) from e


def _load(document: Document) -> Dict[str, Any]:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise CertificateFormatError(f"Invalid JSON: {e}") from e
    if not isinstance(document, dict):
        raise CertificateFormatError("Document must be a JSON object")
    return document


def _validated(document: Document, kind: str) -> Dict[str, Any]:
    doc = _load(document)
    ok, message = ConfigValidator.for_document(kind).validate(doc)
    if not ok:
        raise CertificateFormatError(message)
    return doc


def _header(doc: Dict[str, Any]) -> Tuple[Tuple[int, int, int], FieldTag]:
    try:
        dims = tuple(int(d) for d in doc['dims'])
        field = FieldTag.parse(doc.get('field', 'real'))
    except (KeyError, TypeError, ValueError) as e:
        raise CertificateFormatError(f"Bad dims/field header: {e}") from e
    if len(dims) != 3 or min(dims) < 1:
        raise CertificateFormatError(f"dims must be three positive integers, got {doc.get('dims')}")
    return dims, field


def serialize_tensor(T: Tensor3) -> Dict[str, Any]:
    return {
        'dims': list(T.dims),
        'field': T.field.value,
        'slices': encode_array(T.array, T.field),
    }


def parse_tensor(document: Document) -> Tensor3:
    """
    Raises:
        CertificateFormatError: malformed JSON, schema violation or inconsistent dims
    """
    doc = _validated(document, 'tensor')
    (m, n, p), field = _header(doc)
    slices = decode_array(doc.get('slices'), field, 3)
    if slices.shape != (p, m, n):
        raise CertificateFormatError(f"slices have shape {slices.shape}, dims say (p, m, n) = {(p, m, n)}")
    return Tensor3(slices, field)


def serialize_certificate(
    D: Decomposition,
    tol: Optional[Tolerances] = None,
    report: Optional[Any] = None,
) -> Dict[str, Any]:
    doc = {
        'dims': list(D.dims),
        'field': D.field.value,
        'method': list(D.method),
        'claimed_bound': D.claimed_bound,
        'seed': D.seed,
        'notes': list(D.notes),
        'tolerances': tol.to_dict() if tol is not None else None,
        'terms': [
            {
                'a': encode_array(t.a, D.field),
                'b': encode_array(t.b, D.field),
                'c': encode_array(t.c, D.field),
            }
            for t in D.terms
        ],
    }
    if report is not None:
        doc['report'] = report.to_dict()
    return doc


def parse_certificate(document: Document) -> Tuple[Decomposition, Optional[Tolerances]]:
    """
    Returns:
        (decomposition, embedded tolerances or None)

    Raises:
        CertificateFormatError: malformed JSON, schema violation or term lengths off
    """
    doc = _validated(document, 'certificate')
    dims, field = _header(doc)
    terms = []
    for idx, raw in enumerate(doc.get('terms', [])):
        try:
            vecs = [decode_array(raw[key], field, 1) for key in ('a', 'b', 'c')]
        except (KeyError, TypeError) as e:
            raise CertificateFormatError(f"Term {idx} is missing a vector: {e}") from e
        terms.append(make_term(*vecs))

    try:
        D = Decomposition(
            terms=tuple(terms),
            dims=dims,
            field=field,
            method=tuple(doc.get('method', [])),
            claimed_bound=int(doc.get('claimed_bound', 0)),
            seed=doc.get('seed'),
            notes=tuple(doc.get('notes', [])),
        )
        tol = Tolerances.from_dict(doc['tolerances']) if doc.get('tolerances') else None
    except (MaxRankError, ValueError) as e:
        raise CertificateFormatError(str(e)) from e
    return D, tol


def _plain(value: Any) -> Any:
    """numpy scalars and arrays as Python values"""
    if isinstance(value, (np.generic, np.ndarray)):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(document: Dict[str, Any]) -> str:
    """Deterministic JSON text (identical input gives identical bytes)"""
    return json.dumps(document, indent=2, sort_keys=True, default=_plain) + "\n"


class RunReportBuilder:
    """Builds the selftest report {globals, trials} from per-trial records"""

    def __init__(self):
        self.debugger = get_debugger()

    def build(
        self,
        trials: List[Dict[str, Any]],
        config: Optional[Dict[str, Any]] = None,
        start_time: Optional[datetime] = None,
    ) -> Dict[str, Any]:
        """
        Args:
            trials: Records with at least `criterion` and `passed`
            config: Config snapshot stored under globals.config
            start_time: Run start, for duration_ms

        Returns:
            {globals: {status, summary, config}, trials}
        """
        start_time = start_time or datetime.now()
        now = datetime.now()
        failures = [t for t in trials if not t.get('passed')]

        globals_data = {
            'status': {
                'success': not failures,
                'trials': len(trials),
                'failures': len(failures),
                'started_at': start_time.isoformat(),
                'finished_at': now.isoformat(),
                'duration_ms': int((now - start_time).total_seconds() * 1000),
            },
            'summary': self._build_summary(trials),
        }
        if config:
            globals_data['config'] = {
                'options': config.get('options', {}),
                'tolerances': config.get('tolerances', {}),
                'selftest': config.get('selftest', {}),
            }

        self.debugger.info("reports", "Run report built", trials=len(trials), failures=len(failures))
        return {'globals': globals_data, 'trials': trials}

    def _build_summary(self, trials: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        """Per-criterion pass counts and worst residual, in first-seen order"""
        rows: Dict[str, Dict[str, Any]] = {}
        for trial in trials:
            row = rows.setdefault(trial['criterion'], {
                'criterion': trial['criterion'],
                'trials': 0,
                'passed': 0,
                'max_residual': 0.0,
                'max_terms': 0,
            })
            row['trials'] += 1
            row['passed'] += bool(trial.get('passed'))
            row['max_residual'] = max(row['max_residual'], float(trial.get('residual') or 0.0))
            row['max_terms'] = max(row['max_terms'], int(trial.get('terms') or 0))
        for row in rows.values():
            row['success'] = row['passed'] == row['trials']
        return list(rows.values())

    def failed_trials(self, report: Dict[str, Any]) -> List[Dict[str, Any]]:
        return [t for t in report.get('trials', []) if not t.get('passed')]
