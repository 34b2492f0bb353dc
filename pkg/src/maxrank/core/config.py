"""
Config - Load config.yml with built-in defaults

Precedence is CLI flags > config.yml > DEFAULT_CONFIG. The file is looked up
in the working directory first, then at the project root.
"""
import copy
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .config_validator import PROJECT_ROOT, ConfigValidator
from .errors import ConfigError
from .linalg import Tolerances
from ..utils.debug import get_debugger

DEFAULT_SEED = 20240607
REPORTS_FILE = Path(__file__).parent.parent / 'reports.yml'


def packaged_reports() -> List[Dict[str, Any]]:
    """Report templates shipped with the package (empty if the file is missing)"""
    try:
        with open(REPORTS_FILE, 'r', encoding='utf-8') as f:
            return (yaml.safe_load(f) or {}).get('reports', [])
    except (OSError, yaml.YAMLError) as e:
        get_debugger().warn("config", "Packaged reports unavailable", error=str(e))
        return []


DEFAULT_CONFIG: Dict[str, Any] = {
    'options': {
        'debug': False,
        'seed': DEFAULT_SEED,
        'log_file': None,
        'workers': 4,
    },
    'tolerances': Tolerances().to_dict(),
    'plugins': {
        'trivial': {'enabled': True},
        'general_p': {'enabled': True, 'retry_spreads': [1.0, 2.0, 4.0]},
        'square_3': {'enabled': True, 'search_budget': 64, 'retry_spreads': [1.0, 2.0, 4.0]},
        'nonsquare_3': {'enabled': True, 'span_samples': 64, 'search_budget': 64},
    },
    'selftest': {
        'square_real': 200,
        'square_complex': 200,
        'nonsquare': 200,
        'general_p': 200,
        'trivial': 300,
        'perturb': 500,
        'pencil': 500,
    },
    'reports': packaged_reports(),
}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge, override wins"""
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def find_config(path: Optional[Path] = None) -> Optional[Path]:
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        return path
    for candidate in (Path.cwd() / 'config.yml', PROJECT_ROOT / 'config.yml'):
        if candidate.exists():
            return candidate
    return None


def load_config(path: Optional[Path] = None, validate: bool = True) -> Dict[str, Any]:
    """
    Read config.yml and merge it over the defaults.

    Raises:
        ConfigError: unreadable YAML or a schema violation
    """
    debugger = get_debugger()
    found = find_config(path)
    if found is None:
        debugger.debug("config", "No config.yml found, using defaults")
        return copy.deepcopy(DEFAULT_CONFIG)

    try:
        with open(found, 'r', encoding='utf-8') as f:
            raw = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Failed to load {found}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{found} must contain a mapping")

    if validate:
        validator = ConfigValidator()
        ok, message = validator.validate(raw)
        if not ok:
            raise ConfigError(message)
        if validator.is_available():
            debugger.debug("config", "Configuration validated", path=str(found))

    return deep_merge(DEFAULT_CONFIG, raw)


def tolerances_from(config: Dict[str, Any], **overrides: Optional[float]) -> Tolerances:
    """Tolerances from the config block with non-None overrides applied"""
    try:
        return Tolerances.from_dict(config.get('tolerances')).with_overrides(**overrides)
    except ValueError as e:
        raise ConfigError(str(e)) from e
