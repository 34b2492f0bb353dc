"""
Bounds - Closed-form upper bounds on the maximal rank of m x n x p tensors

Every formula is evaluated on all orientations of the shape; the reported
value is the minimum. The two codimension identities

    max.rank(m, n, mn - k) = m(n - k) + max.rank(m, k, mk - k)        (k < n)
    max.rank(m, n, mn - k) = mn - k^2 + max.rank(k, k, k^2 - k)       (k <= m <= n)

are used as upper bounds, the unknown on the right replaced by the best
bound of the smaller shape. A tensor embeds into any larger shape, so the
bound of a larger shape is also a candidate; this keeps the value
nondecreasing in every dimension.
"""
from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache
from itertools import permutations
from typing import Any, Dict, Iterable, List, Sequence, Tuple

from .errors import DimensionMismatch
from .linalg import FieldTag
from ..utils import get_debugger


@dataclass(frozen=True)
class BoundCandidate:
    """One formula instantiated at one orientation"""

    tag: str
    formula: str
    value: int

    def to_dict(self) -> Dict[str, Any]:
        return {'tag': self.tag, 'formula': self.formula, 'value': self.value}


@dataclass(frozen=True)
class BoundReport:
    dims: Tuple[int, int, int]
    field: FieldTag
    value: int
    provenance: Tuple[BoundCandidate, ...]
    conditional_notes: Tuple[str, ...] = dataclass_field(default_factory=tuple)

    @property
    def best(self) -> BoundCandidate:
        return self.provenance[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dims': list(self.dims),
            'field': self.field.value,
            'value': self.value,
            'provenance': [c.to_dict() for c in self.provenance],
            'conditional_notes': list(self.conditional_notes),
        }


# Shapes whose maximal rank is known exactly and holds over both fields
KNOWN_VALUES = {(2, 2, 3): 3}

SMALL_SIZE_ROWS = (
    ((3, 3, 3), FieldTag.REAL, 5),
    ((4, 4, 3), FieldTag.COMPLEX, 7),
    ((5, 5, 3), FieldTag.REAL, 9),
    ((6, 6, 3), FieldTag.COMPLEX, 11),
)


def trivial_bound(dims: Sequence[int]) -> int:
    m, n, p = dims
    return min(m * n, m * p, n * p)


def general_p_bound(rows: int, cols: int, p: int, refined: bool = True) -> int:
    """Pairing bound for rows x cols x p (the matrix sides are sorted first)"""
    n, m = min(rows, cols), max(rows, cols)
    if p == 1:
        return n
    if p % 2:
        return n + m * (p - 1) // 2
    if refined and n == m:
        return n * (p + 2) // 2 - 1
    return 2 * n + m * (p - 2) // 2


def even_p_bound(rows: int, cols: int, p: int) -> int:
    """m(p-1)/2 + n for even p, rounded down"""
    n, m = min(rows, cols), max(rows, cols)
    return m * (p - 1) // 2 + n


def square_3_bound(n: int) -> int:
    return 2 * n - 1


def nonsquare_3_bound(rows: int, cols: int) -> int:
    return rows + cols - 1


def square_3_unconditional(n: int, field: FieldTag) -> bool:
    """Over C, or over R with n odd, the span of three n x n slices has a singular member"""
    return field is FieldTag.COMPLEX or n % 2 == 1


def _direct_candidates(a: int, b: int, p: int, field: FieldTag) -> List[BoundCandidate]:
    """Formulas with the last mode as the slice mode"""
    out = [BoundCandidate("trivial", f"{a}*{b}", a * b)]
    if p >= 1:
        n, m = min(a, b), max(a, b)
        if p % 2:
            out.append(BoundCandidate("general_p", f"{n} + {m}*({p}-1)/2", general_p_bound(a, b, p)))
        else:
            out.append(BoundCandidate("general_p", f"2*{n} + {m}*({p}-2)/2", general_p_bound(a, b, p, refined=False)))
            if n == m:
                out.append(BoundCandidate("general_p_square", f"{n}*({p}+2)/2 - 1", general_p_bound(a, b, p)))
            out.append(BoundCandidate("even_p", f"floor({m}*({p}-1)/2) + {n}", even_p_bound(a, b, p)))
    if p == 3:
        if a == b and square_3_unconditional(a, field):
            out.append(BoundCandidate("square_3", f"2*{a} - 1", square_3_bound(a)))
        if a != b:
            out.append(BoundCandidate("nonsquare_3", f"{a} + {b} - 1", nonsquare_3_bound(a, b)))
            if field is FieldTag.COMPLEX and abs(a - b) == 1:
                out.append(BoundCandidate("square_plus_one_3", f"2*{min(a, b)}", 2 * min(a, b)))
    return out


def _codimension_candidates(a: int, b: int, p: int, field: FieldTag) -> List[BoundCandidate]:
    out = []
    k = a * b - p
    if k < 1:
        return out
    if k < b:
        sub = _best(tuple(sorted((a, k, a * k - k))), field)
        out.append(BoundCandidate("codim_columns", f"{a}*({b}-{k}) + maxrank({a},{k},{a * k - k})",
                                  a * (b - k) + sub))
    m, n = min(a, b), max(a, b)
    if k <= m and not (k == m == n):
        sub = _best(tuple(sorted((k, k, k * k - k))), field)
        out.append(BoundCandidate("codim_square", f"{m}*{n} - {k}^2 + maxrank({k},{k},{k * k - k})",
                                  m * n - k * k + sub))
    return out


def _candidates(dims: Tuple[int, int, int], field: FieldTag) -> List[BoundCandidate]:
    if 0 in dims:
        return [BoundCandidate("empty", "0", 0)]
    out = []
    seen = set()
    for a, b, p in permutations(dims):
        if (a, b, p) in seen:
            continue
        seen.add((a, b, p))
        out.extend(_direct_candidates(a, b, p, field))
        out.extend(_codimension_candidates(a, b, p, field))
    known = KNOWN_VALUES.get(tuple(sorted(dims)))
    if known is not None:
        out.append(BoundCandidate("known", f"maxrank{tuple(sorted(dims))}", known))
    return out


@lru_cache(maxsize=None)
def _best(dims: Tuple[int, int, int], field: FieldTag) -> int:
    return min(c.value for c in _candidates(dims, field))


def _flattening(dims: Tuple[int, int, int]) -> int:
    m, n, p = dims
    return max(min(m, n * p), min(n, m * p), min(p, m * n))


def _embedding_candidates(dims: Tuple[int, int, int], field: FieldTag, value: int) -> List[BoundCandidate]:
    """
    A bound of a larger shape that contains this one, when it is smaller.

    Only shapes with every side below `value` can undercut it: a side at
    least the product of the other two pins the bound to that product.
    """
    lo = sorted(dims)
    best, out = value, []
    for a in range(lo[0], value):
        for b in range(max(a, lo[1]), value):
            for c in range(max(b, lo[2]), value):
                shape = (a, b, c)
                if list(shape) == lo or _flattening(shape) >= best:
                    continue
                v = _best(shape, field)
                if v < best:
                    best = v
                    out = [BoundCandidate("embedding", f"maxrank{shape}", v)]
    return out


def _conditional_notes(dims: Tuple[int, int, int], field: FieldTag, value: int) -> Tuple[str, ...]:
    notes = []
    if field is FieldTag.REAL:
        for a, b, p in set(permutations(dims)):
            if p == 3 and a == b and a % 2 == 0 and square_3_bound(a) < value:
                notes.append(f"2n-1 = {square_3_bound(a)} if the slice span contains a nonzero singular matrix")
    return tuple(sorted(set(notes)))


def upper_bound(m: int, n: int, p: int, field: Any = FieldTag.REAL) -> BoundReport:
    """
    Best known upper bound on the maximal rank of m x n x p tensors.

    Bounds that hold only for tensors with a singular span member are
    reported in conditional_notes and never lowered into `value`.
    """
    dims = tuple(int(d) for d in (m, n, p))
    if any(d < 0 for d in dims):
        raise DimensionMismatch(f"Dimensions must be nonnegative, got {dims}")
    tag = FieldTag.parse(field)

    direct = _candidates(dims, tag)
    direct += _embedding_candidates(dims, tag, min(c.value for c in direct))
    candidates = sorted(direct, key=lambda c: (c.value, c.tag))
    unique = []
    for c in candidates:
        if c not in unique:
            unique.append(c)
    value = unique[0].value
    report = BoundReport(dims, tag, value, tuple(unique), _conditional_notes(dims, tag, value))
    get_debugger().debug("bounds", "Upper bound computed", dims="x".join(map(str, dims)), field=tag.value,
                         value=value, via=report.best.tag)
    return report


def small_size_table() -> Tuple[Tuple[BoundReport, int], ...]:
    """(report, stated value) for the small square three-slice shapes"""
    return tuple((upper_bound(*dims, field), stated) for dims, field, stated in SMALL_SIZE_ROWS)


def bound_grid(lo: int, hi: int, fields: Iterable[Any] = (FieldTag.REAL,)) -> List[BoundReport]:
    """Reports for every lo <= m <= n <= hi and lo <= p <= hi"""
    if lo < 1 or hi < lo:
        raise DimensionMismatch(f"Grid range must satisfy 1 <= lo <= hi, got {lo}..{hi}")
    tags = [FieldTag.parse(f) for f in fields]
    rows = []
    for m in range(lo, hi + 1):
        for n in range(m, hi + 1):
            for p in range(lo, hi + 1):
                for tag in tags:
                    rows.append(upper_bound(m, n, p, tag))
    return rows
