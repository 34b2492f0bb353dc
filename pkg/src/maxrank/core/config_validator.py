"""Config Validator - Validate config.yml and JSON documents against JSON Schema"""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..utils.debug import get_debugger

PROJECT_ROOT = Path(__file__).parent.parent.parent.parent
SCHEMA_DIR = Path(__file__).parent.parent / 'schemas'


class ConfigValidator:
    """
    Validates a document against a Draft-07 JSON Schema.

    Note: Requires jsonschema. If it is missing or the schema cannot be
    read, validation is skipped and every document is accepted.
    """

    def __init__(self, schema_path: Optional[Path] = None):
        if schema_path is None:
            # Default: config.schema.json in project root
            schema_path = PROJECT_ROOT / 'config.schema.json'

        self.schema_path = Path(schema_path)
        self.schema = None
        self.validator = None
        self._init_validator()

    @classmethod
    def for_document(cls, kind: str) -> "ConfigValidator":
        """Validator for a packaged document schema ("tensor" or "certificate")"""
        return cls(SCHEMA_DIR / f'{kind}.schema.json')

    def _init_validator(self) -> None:
        try:
            from jsonschema import Draft7Validator
        except ImportError:
            get_debugger().debug("config", "jsonschema not installed, validation skipped")
            return

        if not self.schema_path.exists():
            get_debugger().debug("config", "Schema not found, validation skipped", path=str(self.schema_path))
            return

        try:
            with open(self.schema_path, 'r', encoding='utf-8') as f:
                self.schema = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            get_debugger().warn("config", "Schema unreadable, validation skipped", path=str(self.schema_path), error=str(e))
            return

        self.validator = Draft7Validator(self.schema)

    def validate(self, document: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
        """
        Validate a document against the schema.

        Returns:
            (True, None) if valid or validation skipped,
            (False, "error details") otherwise
        """
        if self.validator is None:
            return True, None

        errors = sorted(self.validator.iter_errors(document), key=lambda e: list(e.path))
        if not errors:
            return True, None

        error = errors[0]
        path = " -> ".join(str(p) for p in error.path)
        return False, f"Validation error at '{path}': {error.message}"

    def is_available(self) -> bool:
        return self.validator is not None
