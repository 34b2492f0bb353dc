import io

import pytest
import yaml

from maxrank.core.config import DEFAULT_CONFIG, deep_merge, load_config, packaged_reports, tolerances_from
from maxrank.core.config_validator import ConfigValidator
from maxrank.core.errors import ConfigError
from maxrank.core.tasks import ReportManager, TemplateManager
from maxrank.core.tasks.template_manager import fmt_dims, fmt_field, fmt_sci


def _write(tmp_path, data):
    path = tmp_path / "config.yml"
    path.write_text(data if isinstance(data, str) else yaml.safe_dump(data), encoding="utf-8")
    return path


def test_deep_merge_keeps_untouched_keys():
    merged = deep_merge({'a': {'x': 1, 'y': 2}, 'l': [1, 2]}, {'a': {'y': 3}, 'l': [9]})
    assert merged == {'a': {'x': 1, 'y': 3}, 'l': [9]}


def test_load_config_merges_over_defaults(tmp_path):
    path = _write(tmp_path, {'options': {'seed': 7}, 'plugins': {'square_3': {'enabled': False}}})
    config = load_config(path)
    assert config['options']['seed'] == 7
    assert config['options']['workers'] == DEFAULT_CONFIG['options']['workers']
    assert config['plugins']['square_3'] == {'enabled': False, 'search_budget': 64, 'retry_spreads': [1.0, 2.0, 4.0]}
    assert config['reports'] == packaged_reports()


def test_reports_list_replaces_packaged_templates(tmp_path):
    path = _write(tmp_path, {'reports': [{'name': 'mine', 'command': 'bound', 'template': 'hi'}]})
    assert [r['name'] for r in load_config(path)['reports']] == ['mine']


def test_project_config_is_valid():
    config = load_config()
    assert config['options']['seed'] == 20240607
    assert config['selftest'] == DEFAULT_CONFIG['selftest']
    assert config['selftest']['pencil'] == 500


@pytest.mark.parametrize(
    "data",
    [
        {'options': {'workers': 0}},
        {'tolerances': {'residual_tol': -1.0}},
        {'plugins': {'square_3': {'search_budget': 3}}},
        {'selftest': {'unknown_ensemble': 3}},
        {'reports': [{'name': 'r', 'command': 'nope', 'template': 'x'}]},
        {'unknown_section': {'key': 'x'}},
    ],
)
def test_schema_violations_raise(tmp_path, data):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, data))


def test_unreadable_yaml_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "options: [\n"))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yml")
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "- just\n- a list\n"))


def test_validator_skips_without_schema(tmp_path):
    validator = ConfigValidator(tmp_path / "absent.schema.json")
    assert not validator.is_available()
    assert validator.validate({'anything': True}) == (True, None)


def test_tolerances_from_applies_overrides():
    tol = tolerances_from(DEFAULT_CONFIG, residual_tol=1e-4, rank_tol=None)
    assert tol.residual_tol == 1e-4
    assert tol.rank_tol == DEFAULT_CONFIG['tolerances']['rank_tol']
    with pytest.raises(ConfigError):
        tolerances_from(DEFAULT_CONFIG, rank_tol=2.0)


def test_filters():
    assert fmt_sci(1.23456e-12) == "1.23e-12"
    assert fmt_sci("n/a") == "n/a"
    assert fmt_dims([3, 4, 5]) == "3x4x5"
    assert fmt_field("complex") == "C"


def test_template_dollar_syntax_and_filters():
    manager = TemplateManager()
    out = manager.render("$terms terms for {{ dims|dims }} over {{ field|field }}, $report.verdict",
                         {'terms': 5, 'dims': [3, 3, 3], 'field': 'real', 'report': {'verdict': 'certified'}})
    assert out == "5 terms for 3x3x3 over R, certified"
    assert manager.render("{{ 1 / 0 }}", {}).startswith("Template error:")


@pytest.mark.parametrize(
    "condition,expected",
    [("{{ notes }}", False), ("{{ items|length }}", False), ("{{ 'yes' }}", True), ("{{ missing.attr.x }}", False)],
)
def test_conditions(condition, expected):
    assert TemplateManager().evaluate_condition(condition, {'notes': [], 'items': []}) is expected


def test_report_manager_runs_matching_reports():
    config = {'reports': [
        {'name': 'a', 'command': 'bound', 'type': 'print', 'template': 'value $value'},
        {'name': 'b', 'command': 'bound', 'type': 'print', 'condition': '{{ notes }}', 'template': 'notes'},
        {'name': 'c', 'command': 'gen', 'type': 'print', 'template': 'other'},
    ]}
    stream = io.StringIO()
    results = ReportManager(config).run('bound', {'value': 8, 'notes': []}, stream=stream)
    assert [r['report_name'] for r in results] == ['a']
    assert stream.getvalue() == "value 8\n"


def test_packaged_reports_cover_every_command():
    commands = {r['command'] for r in packaged_reports()}
    assert commands == {'decompose', 'verify', 'bound', 'gen', 'example', 'selftest'}
