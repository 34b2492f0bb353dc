import asyncio
import json

import pytest

from maxrank.core.errors import PreconditionError
from maxrank.core.linalg import FieldTag, random_tensor
from maxrank.core.plugins import DependencyResolver, MethodDiscovery, MethodExecutor, MethodLoader, class_name_for
from maxrank.plugins.base import MethodPlugin
from maxrank.plugins.trivial.client import TrivialPlugin


def _write_manifest(root, dirname, manifest):
    path = root / dirname
    path.mkdir()
    (path / "plugin.json").write_text(json.dumps(manifest), encoding="utf-8")


class _Raising(MethodPlugin):
    def claimed_bound(self, dims, field):
        return 0

    def decompose(self, T, tol=None, seed=None):
        raise RuntimeError("boom")


def test_discovery_reads_method_manifests(tmp_path, quiet_debugger):
    _write_manifest(tmp_path, "alpha", {"name": "alpha", "category": "method", "aliases": ["a1"]})
    _write_manifest(tmp_path, "beta", {"name": "beta", "category": "report"})
    _write_manifest(tmp_path, "nameless", {"category": "method"})
    (tmp_path / "broken").mkdir()
    (tmp_path / "broken" / "plugin.json").write_text("{", encoding="utf-8")

    discovery = MethodDiscovery(tmp_path)
    assert set(discovery.discover()) == {"alpha", "beta"}
    methods = discovery.get_methods()
    assert list(methods) == ["alpha"]
    assert methods["alpha"]["_path"].endswith("alpha")
    assert MethodDiscovery.alias_index(methods) == {"alpha": "alpha", "a1": "alpha"}
    assert any(e["level"] == "ERROR" for e in quiet_debugger.get_logs())


def test_missing_plugins_directory(tmp_path):
    assert MethodDiscovery(tmp_path / "absent").discover() == {}


def test_packaged_manifests():
    methods = MethodDiscovery().get_methods()
    assert methods["trivial"]["floor"] is True
    assert methods["nonsquare_3"]["depends_on"] == ["general_p", "square_3"]


def test_class_name_convention():
    assert class_name_for("square_3") == "Square3Plugin"
    assert class_name_for("general_p") == "GeneralPPlugin"
    assert class_name_for("trivial") == "TrivialPlugin"


def test_loader_respects_enabled():
    manifests = MethodDiscovery().get_methods()
    config = {'plugins': {'square_3': {'enabled': False, 'search_budget': 5}, 'trivial': {'enabled': True}}}
    loader = MethodLoader(manifests, config)
    loaded = loader.load_all()
    assert "square_3" not in loaded
    assert isinstance(loaded["trivial"], TrivialPlugin)

    forced = loader.load_method("square_3", required=True)
    assert forced.config['search_budget'] == 5
    assert forced.aliases == ("square3", "square_3")
    assert loader.load_method("unknown") is None


def test_resolver_groups_by_dependency():
    manifests = MethodDiscovery().get_methods()
    groups = DependencyResolver(manifests).resolve(["nonsquare_3", "square_3", "general_p", "trivial"])
    assert groups == [["general_p", "trivial"], ["square_3"], ["nonsquare_3"]]


def test_resolver_ignores_dependencies_that_do_not_run():
    manifests = MethodDiscovery().get_methods()
    assert DependencyResolver(manifests).resolve(["nonsquare_3"]) == [["nonsquare_3"]]


def test_resolver_detects_cycles():
    manifests = {"x": {"depends_on": ["y"]}, "y": {"depends_on": ["x"]}}
    with pytest.raises(PreconditionError):
        DependencyResolver(manifests).resolve(["x", "y"])


def test_check_expects():
    resolver = DependencyResolver({"square_3": {"expects": ["p=3", "square"]}})
    assert resolver.check_expects("square_3", {"p=3", "square", "m<=n"})
    assert not resolver.check_expects("square_3", {"p=3", "m<n", "m<=n"})
    assert resolver.check_expects("unlisted", set())


def test_executor_runs_groups_and_isolates_failures(tol):
    T = random_tensor((2, 2, 2), FieldTag.REAL, seed=0)
    methods = {"trivial": TrivialPlugin(), "raising": _Raising()}
    jobs = {name: {'tensor': T, 'tol': tol, 'seed': 0} for name in ("trivial", "raising", "missing")}
    results = MethodExecutor(max_workers=2).execute_pipeline(methods, [["raising", "trivial"], ["missing"]], jobs)

    assert results["trivial"]["status"]["success"]
    assert len(results["trivial"]["decomposition"]) == 4
    assert results["raising"]["status"]["error"] == "RuntimeError"
    assert results["missing"]["status"]["error"] == "NotLoaded"
    assert results["status"]["success_methods"] == ["trivial"]
    assert sorted(results["status"]["failed_methods"]) == ["missing", "raising"]


def test_map_trials_keeps_order():
    assert MethodExecutor(max_workers=3).map_trials(lambda x: x * x, range(10)) == [x * x for x in range(10)]


def test_execute_group_inside_running_loop(tol):
    T = random_tensor((2, 2, 2), FieldTag.REAL, seed=0)
    jobs = {'trivial': {'tensor': T, 'tol': tol, 'seed': 0}}

    async def caller():
        return MethodExecutor().execute_group({"trivial": TrivialPlugin()}, ["trivial"], jobs)

    results = asyncio.run(caller())
    assert results["trivial"]["status"]["success"]
