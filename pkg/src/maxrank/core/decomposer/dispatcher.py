"""
Dispatcher - Run every applicable method and keep the shortest certificate

Methods are discovered from their manifests. For each method the tensor is
oriented (one of the six mode permutations) so that the manifest's
`expects` facts hold and the method's claimed bound is smallest; methods
run group by group in dependency order and every result is certified
against the original tensor before it can win. Methods flagged `floor`
in their manifest always run, whatever `method` asks for.
"""
from dataclasses import dataclass
from itertools import permutations
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from ..certify import CertificateReport, verify
from ..config import DEFAULT_CONFIG, DEFAULT_SEED
from ..errors import MaxRankError, PreconditionError
from ..linalg import DEFAULT_TOLERANCES, FieldTag, Tensor3, Tolerances, permute_modes
from ..plugins import DependencyResolver, MethodDiscovery, MethodExecutor, MethodLoader
from ...models.decomposition import Decomposition
from ...utils import get_debugger

AUTO = "auto"


def shape_facts(dims: Sequence[int]) -> Set[str]:
    """Facts a manifest can expect of one orientation (m, n, p)"""
    m, n, p = dims
    facts = {f"p={p}"}
    if m == n:
        facts.add("square")
    if m < n:
        facts.add("m<n")
    if m <= n:
        facts.add("m<=n")
    return facts


@dataclass(frozen=True)
class MethodPlan:
    name: str
    order: Tuple[int, int, int]
    dims: Tuple[int, int, int]
    bound: int


@dataclass(frozen=True)
class MethodOutcome:
    plan: MethodPlan
    decomposition: Optional[Decomposition]
    report: Optional[CertificateReport]
    error: Optional[str] = None

    @property
    def certified(self) -> bool:
        return self.report is not None and self.report.certified


class Dispatcher:
    """Plans, runs and certifies the method plugins for one config"""

    def __init__(self, config: Optional[Dict[str, Any]] = None, plugins_dir: Optional[str] = None):
        self.config = config if config is not None else DEFAULT_CONFIG
        self.debugger = get_debugger()
        self.manifests = MethodDiscovery(plugins_dir).get_methods()
        self.aliases = MethodDiscovery.alias_index(self.manifests)
        self.loader = MethodLoader(self.manifests, self.config)
        self.resolver = DependencyResolver(self.manifests)
        self.executor = MethodExecutor(max_workers=int(self.config.get('options', {}).get('workers', 4)))
        self.methods = self.loader.load_all()
        for name, manifest in self.manifests.items():
            if manifest.get('floor') and name not in self.methods:
                instance = self.loader.load_method(name, required=True)
                if instance is not None:
                    self.methods[name] = instance

    @property
    def floors(self) -> List[str]:
        return [name for name in self.methods if self.manifests[name].get('floor')]

    def select(self, method: str = AUTO) -> List[str]:
        """
        Method names to run for a --method value.

        Raises:
            PreconditionError: unknown or disabled method
        """
        if method in (None, AUTO):
            return sorted(self.methods)
        name = self.aliases.get(method)
        if name is None:
            raise PreconditionError(f"Unknown method {method!r}; known: {', '.join(sorted(self.aliases))}")
        if name not in self.methods:
            raise PreconditionError(f"Method {name!r} is disabled")
        return sorted({name, *self.floors})

    def plan(self, dims: Sequence[int], field: FieldTag, names: Sequence[str]) -> List[MethodPlan]:
        """Best orientation per method; methods whose expects never hold are left out"""
        plans = []
        for name in names:
            best = None
            for order in permutations(range(3)):
                oriented = tuple(int(dims[o]) for o in order)
                if not self.resolver.check_expects(name, shape_facts(oriented)):
                    continue
                bound = self.methods[name].claimed_bound(oriented, field)
                if best is None or bound < best.bound:
                    best = MethodPlan(name, order, oriented, bound)
            if best is None:
                self.debugger.debug("decomposer", "Method not applicable", method=name, dims="x".join(map(str, dims)))
            else:
                plans.append(best)
        return plans

    def run(
        self,
        T: Tensor3,
        tol: Tolerances = DEFAULT_TOLERANCES,
        seed: Optional[int] = None,
        method: str = AUTO,
    ) -> List[MethodOutcome]:
        """Every planned method's outcome, certified against T"""
        plans = {p.name: p for p in self.plan(T.dims, T.field, self.select(method))}
        if method not in (None, AUTO) and self.aliases[method] not in plans:
            self.debugger.warn("decomposer", "Requested method does not apply to this shape", method=method,
                               dims="x".join(map(str, T.dims)))

        jobs = {
            name: {'tensor': permute_modes(T, plan.order), 'tol': tol, 'seed': seed}
            for name, plan in plans.items()
        }
        groups = self.resolver.resolve(plans)
        results = self.executor.execute_pipeline(self.methods, groups, jobs)

        outcomes = []
        for name, plan in plans.items():
            result = results.get(name, {})
            status = result.get('status', {})
            if not status.get('success'):
                outcomes.append(MethodOutcome(plan, None, None, status.get('error') or 'NotRun'))
                continue
            D = result['decomposition'].unpermuted(plan.order)
            report = verify(T, D, tol)
            error = None if report.certified else report.verdict.name
            outcomes.append(MethodOutcome(plan, D, report, error))
        return outcomes

    def decompose(
        self,
        T: Tensor3,
        tol: Tolerances = DEFAULT_TOLERANCES,
        seed: Optional[int] = None,
        method: str = AUTO,
    ) -> Decomposition:
        """
        Shortest certified decomposition among the applicable methods.

        Failed or uncertified methods leave a `fallback:<Error>@<method>` note.

        Raises:
            MaxRankError: not even a floor method was certified
        """
        if seed is None:
            seed = int(self.config.get('options', {}).get('seed', DEFAULT_SEED))

        with self.debugger.timed("decomposer", "Dispatch finished", dims="x".join(map(str, T.dims)),
                                 field=T.field.value) as extra:
            outcomes = self.run(T, tol, seed, method)
            notes = [f"fallback:{o.error}@{o.plan.name}" for o in outcomes if not o.certified]
            certified = [o for o in outcomes if o.certified]
            if not certified:
                raise MaxRankError(f"No method produced a certified decomposition ({'; '.join(notes)})")

            best = min(certified, key=lambda o: (len(o.decomposition), o.decomposition.claimed_bound))
            extra.update(method=best.plan.name, terms=len(best.decomposition), bound=best.decomposition.claimed_bound)

        for note in notes:
            self.debugger.info("decomposer", "Method fell back", note=note)
        return best.decomposition.with_seed(seed).tagged(notes=notes)


_default: Optional[Dispatcher] = None


def default_dispatcher() -> Dispatcher:
    global _default
    if _default is None:
        _default = Dispatcher()
    return _default


def decompose(
    T: Tensor3,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: Optional[int] = None,
    method: str = AUTO,
    config: Optional[Dict[str, Any]] = None,
) -> Decomposition:
    """Decompose with the methods enabled in `config` (built-in defaults when None)"""
    dispatcher = default_dispatcher() if config is None else Dispatcher(config)
    return dispatcher.decompose(T, tol, seed, method)
