"""Method Loader - Import and instantiate method plugins"""
import importlib
from typing import Any, Dict, Optional

from ...utils.debug import get_debugger


def class_name_for(method_name: str) -> str:
    """Convention: square_3 -> Square3Plugin"""
    return ''.join(part.capitalize() for part in method_name.split('_')) + 'Plugin'


class MethodLoader:
    """Loads method classes from discovered manifests"""

    def __init__(self, manifests: Dict[str, Dict[str, Any]], config: Dict[str, Any]):
        self.manifests = manifests
        self.config = config
        self.loaded = {}
        self.debugger = get_debugger()

    def load_method(self, name: str, required: bool = False) -> Optional[Any]:
        """
        Load and instantiate a single method.

        Args:
            name: Method name from its manifest
            required: Load even when disabled in config

        Returns:
            Plugin instance or None if missing, disabled or broken
        """
        if name in self.loaded:
            return self.loaded[name]

        manifest = self.manifests.get(name)
        if not manifest:
            self.debugger.debug("loader", "Method not found in manifests", method=name)
            return None

        method_config = self.config.get('plugins', {}).get(name, {}) or {}
        if not required and not method_config.get('enabled', True):
            self.debugger.debug("loader", "Method disabled", method=name)
            return None

        module_path = f"maxrank.plugins.{name}.client"
        class_name = manifest.get('class_name') or class_name_for(name)
        try:
            module = importlib.import_module(module_path)
        except ImportError as e:
            self.debugger.error("loader", "Failed to import method", method=name, error=str(e))
            return None

        plugin_class = getattr(module, class_name, None)
        if plugin_class is None:
            self.debugger.error("loader", "Method class not found", method=name, class_name=class_name)
            return None

        instance = plugin_class(method_config)
        instance._metadata = manifest
        self.loaded[name] = instance
        self.debugger.debug("loader", "Method loaded", method=name)
        return instance

    def load_all(self) -> Dict[str, Any]:
        """Load all enabled methods"""
        methods = {}
        for name in self.manifests:
            instance = self.load_method(name)
            if instance is not None:
                methods[name] = instance
        return methods
