"""
Commands - One function per CLI subcommand

Each command takes a RunConfig and returns an exit code:
0 certified/pass, 1 verdict failure, 2 usage or parse failure.
"""
import sys
from dataclasses import dataclass
from dataclasses import field as dataclass_field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple

import numpy as np

from ..core.bounds import bound_grid, upper_bound
from ..core.certify import verify
from ..core.decomposer import AUTO, Dispatcher
from ..core.errors import DimensionMismatch, MaxRankError, PreconditionError
from ..core.linalg import DEFAULT_TOLERANCES, FieldTag, Tensor3, Tolerances, as_rng, max_abs, random_tensor
from ..core.spectrum import det_polynomial_on_plane, find_singular_combination
from ..core.tasks import ReportManager
from ..models import RunReportBuilder, dumps, parse_certificate, parse_tensor, serialize_certificate, serialize_tensor
from ..utils import get_debugger
from .selftest import build_trials, run_trials

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

BOTH = "both"

EXAMPLE_DET_POINTS = 50
EXAMPLE_DET_TOL = 1e-9
EXAMPLE_SEARCH_BUDGET = 256
EXAMPLE_MEMBER_DET_TOL = 1e-8
# Term limits for the 4x4x3 example: 2n - 1 needs a singular member, which only C supplies
EXAMPLE_TERM_LIMITS = {FieldTag.REAL: 8, FieldTag.COMPLEX: 7}


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: parsed flags over the loaded config.yml"""

    command: str
    settings: Dict[str, Any]
    tolerances: Tolerances = DEFAULT_TOLERANCES
    seed: int = 0
    input: Optional[Path] = None
    output: Optional[Path] = None
    certificate: Optional[Path] = None
    field: Optional[str] = None
    method: str = AUTO
    dims: Optional[Tuple[int, int, int]] = None
    grid: Optional[Tuple[int, int]] = None
    trials: Optional[int] = None
    json: bool = False
    tolerance_overrides: Dict[str, float] = dataclass_field(default_factory=dict)

    def fields(self, default: str = FieldTag.REAL.value) -> List[FieldTag]:
        """--field value as a list of tags; `both` gives REAL then COMPLEX"""
        value = self.field or default
        if value == BOTH:
            return [FieldTag.REAL, FieldTag.COMPLEX]
        return [FieldTag.parse(value)]


def example_tensor(field: Any = FieldTag.REAL) -> Tensor3:
    """
    4x4x3 tensor with two skew slices and the identity.

    det(x A1 + y A2 + z A3) = (x^2 + y^2 + z^2)^2, so over R every nonzero
    span member is nonsingular while over C the span has singular members.
    """
    A1 = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
    A2 = [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]
    A3 = np.eye(4)
    return Tensor3.from_slices([A1, A2, A3], field)


def example_det_error(T: Tensor3, points: int = EXAMPLE_DET_POINTS, seed: Any = None) -> float:
    """Max relative error of det(x A1 + y A2 + z A3) against (x^2 + y^2 + z^2)^2"""
    det = det_polynomial_on_plane(T, list(np.eye(3)))
    rng = as_rng(seed)
    worst = 0.0
    for x, y, z in rng.uniform(-1.0, 1.0, size=(points, 3)):
        expected = (x * x + y * y + z * z) ** 2
        worst = max(worst, float(abs(det(x, y, z) - expected)) / max(expected, 1e-300))
    return float(worst)


def _read(path: Optional[Path]) -> str:
    if path is None:
        return sys.stdin.read()
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def _write(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)


def _report(run: RunConfig, context: Dict[str, Any], stream: Optional[TextIO] = None) -> None:
    ReportManager(run.settings).run(run.command, context, stream)


def _with_field(T: Tensor3, run: RunConfig) -> Tensor3:
    """Re-tag a parsed tensor when --field was given explicitly"""
    if run.field in (None, BOTH):
        return T
    tag = FieldTag.parse(run.field)
    return T if tag is T.field else Tensor3(T.slices, tag)


def _dispatcher(run: RunConfig) -> Dispatcher:
    return Dispatcher(run.settings)


def _certificate_context(T: Tensor3, D, report, output: Optional[Path]) -> Dict[str, Any]:
    return {
        'dims': list(T.dims),
        'field': T.field.value,
        'terms': report.term_count,
        'bound': report.claimed_bound,
        'lower_bound': report.lower_bound,
        'residual': report.relative_residual,
        'verdict': report.verdict.value,
        'certified': report.certified,
        'method': list(report.method_chain),
        'notes': list(report.notes),
        'seed': D.seed,
        'output': str(output) if output else None,
    }


def cmd_decompose(run: RunConfig) -> int:
    """
    Decompose --input and write the certificate to --output (stdout when absent).

    The summary goes to stdout, or to stderr when the certificate itself
    is on stdout.
    """
    debugger = get_debugger()
    T = _with_field(parse_tensor(_read(run.input)), run)

    try:
        D = _dispatcher(run).decompose(T, run.tolerances, run.seed, run.method)
    except PreconditionError as e:
        debugger.error("cli", "Method selection failed", error=str(e))
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MaxRankError as e:
        debugger.error("cli", "Decomposition failed", error=str(e))
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAIL

    report = verify(T, D, run.tolerances)
    _write(run.output, dumps(serialize_certificate(D, run.tolerances, report)))

    summary_stream = sys.stdout if run.output is not None else sys.stderr
    if run.json:
        print(dumps(report.to_dict()), end="", file=summary_stream)
    else:
        _report(run, _certificate_context(T, D, report, run.output), summary_stream)

    debugger.info("cli", "Decompose finished", terms=report.term_count, verdict=report.verdict.value)
    return EXIT_OK if report.certified else EXIT_FAIL


def cmd_verify(run: RunConfig) -> int:
    """
    Certify --certificate against --input.

    Tolerances: CLI flags over those embedded in the certificate over config.yml.
    """
    debugger = get_debugger()
    if run.certificate is None:
        print("ERROR: verify needs --certificate", file=sys.stderr)
        return EXIT_USAGE

    T = _with_field(parse_tensor(_read(run.input)), run)
    D, embedded = parse_certificate(_read(run.certificate))
    tol = (embedded or run.tolerances).with_overrides(**run.tolerance_overrides)

    try:
        report = verify(T, D, tol)
    except DimensionMismatch as e:
        debugger.error("cli", "Certificate does not fit the tensor", error=str(e))
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAIL

    if run.json:
        print(dumps(report.to_dict()), end="")
    else:
        _report(run, _certificate_context(T, D, report, None))
    return EXIT_OK if report.certified else EXIT_FAIL


def cmd_bound(run: RunConfig) -> int:
    """Bound reports for --dims or every shape of --grid a..b"""
    fields = run.fields(default=BOTH)
    if run.dims is not None:
        reports = [upper_bound(*run.dims, tag) for tag in fields]
    elif run.grid is not None:
        reports = bound_grid(run.grid[0], run.grid[1], fields)
    else:
        print("ERROR: bound needs --dims or --grid", file=sys.stderr)
        return EXIT_USAGE

    rows = [r.to_dict() for r in reports]
    if run.output is not None:
        _write(run.output, dumps({'rows': rows}))
    if run.json:
        print(dumps({'rows': rows}), end="")
    else:
        _report(run, {'rows': [dict(row, best=row['provenance'][0]['tag']) for row in rows]})
    return EXIT_OK


def cmd_gen(run: RunConfig) -> int:
    """Seeded random tensor, entries uniform on [-1, 1]"""
    if run.dims is None:
        print("ERROR: gen needs --dims", file=sys.stderr)
        return EXIT_USAGE
    tag = run.fields()[0]
    T = random_tensor(run.dims, tag, run.seed)
    _write(run.output, dumps(serialize_tensor(T)))
    if run.output is not None and not run.json:
        _report(run, {'dims': list(T.dims), 'field': tag.value, 'seed': run.seed, 'output': str(run.output)})
    get_debugger().info("cli", "Tensor generated", dims="x".join(map(str, T.dims)), field=tag.value, seed=run.seed)
    return EXIT_OK


def _example_row(run: RunConfig, dispatcher: Dispatcher, tag: FieldTag) -> Dict[str, Any]:
    T = example_tensor(tag)
    coeffs = find_singular_combination(T, run.tolerances, budget=EXAMPLE_SEARCH_BUDGET, rng=run.seed)
    member_det = None
    if coeffs is not None:
        M = np.tensordot(coeffs, T.array, axes=(0, 0))
        member_det = float(abs(np.linalg.det(M / max_abs(M))))

    expect_member = tag is FieldTag.COMPLEX
    member_ok = (coeffs is not None) == expect_member
    if member_det is not None:
        member_ok = member_ok and bool(member_det < EXAMPLE_MEMBER_DET_TOL)

    row = {
        'field': tag.value,
        'singular_found': coeffs is not None,
        'member_det': member_det,
        'limit': EXAMPLE_TERM_LIMITS[tag],
        'terms': None,
        'residual': None,
        'verdict': None,
        'method': [],
        'error': None,
    }
    try:
        D = dispatcher.decompose(T, run.tolerances, run.seed, run.method)
        report = verify(T, D, run.tolerances)
        row.update(terms=report.term_count, residual=report.relative_residual, verdict=report.verdict.value,
                   method=list(report.method_chain))
        terms_ok = bool(report.certified and report.term_count <= row['limit'])
    except MaxRankError as e:
        row['error'] = f"{type(e).__name__}: {e}"
        terms_ok = False

    row['passed'] = bool(member_ok and terms_ok)
    return row


def cmd_example(run: RunConfig) -> int:
    """The 4x4x3 skew example over R and/or C with the determinant identity check"""
    debugger = get_debugger()
    det_error = example_det_error(example_tensor(FieldTag.REAL), seed=run.seed)
    det_ok = bool(det_error < EXAMPLE_DET_TOL)

    dispatcher = _dispatcher(run)
    rows = [_example_row(run, dispatcher, tag) for tag in run.fields(default=BOTH)]
    passed = bool(det_ok and all(row['passed'] for row in rows))
    context = {'det_error': det_error, 'det_ok': det_ok, 'rows': rows, 'passed': passed}

    if run.json:
        print(dumps(context), end="")
    else:
        _report(run, context)
    debugger.info("cli", "Example finished", passed=passed, det_error=f"{det_error:.3e}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_selftest(run: RunConfig) -> int:
    """Acceptance ensembles on the thread pool, summarized per criterion"""
    start_time = datetime.now()
    sizes = dict(run.settings.get('selftest', {}))
    if run.trials is not None:
        sizes = {name: run.trials for name in sizes}

    dispatcher = _dispatcher(run)
    trials = build_trials(sizes, run.seed)
    records = run_trials(trials, dispatcher, run.tolerances, workers=dispatcher.executor.max_workers)
    report = RunReportBuilder().build(records, run.settings, start_time)

    if run.output is not None:
        _write(run.output, dumps(report))
    if run.json:
        print(dumps(report), end="")
    else:
        _report(run, {
            'status': report['globals']['status'],
            'summary': report['globals']['summary'],
            'failures': RunReportBuilder().failed_trials(report),
        })
    return EXIT_OK if report['globals']['status']['success'] else EXIT_FAIL


COMMANDS = {
    'decompose': cmd_decompose,
    'verify': cmd_verify,
    'bound': cmd_bound,
    'gen': cmd_gen,
    'example': cmd_example,
    'selftest': cmd_selftest,
}
