"""Method Discovery - Scan plugin.json manifests"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

from ...utils.debug import get_debugger


class MethodDiscovery:
    """Discovers decomposition methods by scanning plugin.json files"""

    def __init__(self, plugins_dir: Optional[str] = None):
        if plugins_dir is None:
            # Default: src/maxrank/plugins
            base = Path(__file__).parent.parent.parent
            plugins_dir = base / 'plugins'

        self.plugins_dir = Path(plugins_dir)
        self.debugger = get_debugger()

    def discover(self) -> Dict[str, Dict[str, Any]]:
        """
        Scan the plugins directory and load every plugin.json.

        Returns:
            Dict[method_name, manifest]
        """
        methods = {}

        if not self.plugins_dir.exists():
            self.debugger.warn("discovery", "Plugins directory not found", path=str(self.plugins_dir))
            return methods

        self.debugger.debug("discovery", "Scanning plugins directory", path=str(self.plugins_dir))

        for plugin_dir in sorted(self.plugins_dir.iterdir()):
            if not plugin_dir.is_dir():
                continue

            manifest_path = plugin_dir / 'plugin.json'
            if not manifest_path.exists():
                continue

            try:
                with open(manifest_path, 'r', encoding='utf-8') as f:
                    manifest = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                self.debugger.error("discovery", "Failed to load plugin.json", dir=plugin_dir.name, error=str(e))
                continue

            name = manifest.get('name')
            if not name:
                self.debugger.warn("discovery", "Manifest missing name field", dir=plugin_dir.name)
                continue

            manifest['_path'] = str(plugin_dir)
            methods[name] = manifest
            self.debugger.debug("discovery", "Found method", name=name,
                                category=manifest.get('category', 'unknown'), version=manifest.get('version', '?'))

        return methods

    def get_by_category(self, category: str) -> Dict[str, Dict[str, Any]]:
        return {name: meta for name, meta in self.discover().items() if meta.get('category') == category}

    def get_methods(self) -> Dict[str, Dict[str, Any]]:
        """All manifests with category "method\""""
        return self.get_by_category('method')

    @staticmethod
    def alias_index(manifests: Dict[str, Dict[str, Any]]) -> Dict[str, str]:
        """Map every alias (and the name itself) to the method name"""
        index = {}
        for name, meta in manifests.items():
            index[name] = name
            for alias in meta.get('aliases', []):
                index[alias] = name
        return index
