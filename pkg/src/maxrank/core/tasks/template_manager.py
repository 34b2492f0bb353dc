"""Template Manager - Jinja2 rendering with $ syntax and number filters"""
import re
from typing import Any, Dict, Sequence

from jinja2 import BaseLoader, Environment


def fmt_sci(value: Any, digits: int = 2) -> str:
    """1.234e-12 style; non-numbers pass through"""
    try:
        return f"{float(value):.{digits}e}"
    except (TypeError, ValueError):
        return str(value)


def fmt_dims(value: Sequence[int]) -> str:
    return "x".join(str(d) for d in value)


def fmt_field(value: Any) -> str:
    return {"real": "R", "complex": "C"}.get(str(value), str(value))


class TemplateManager:
    """
    Renders report templates against a flat context dict.

    `$name.path` is shorthand for `{{ name.path }}`; the filters `sci`,
    `dims` and `field` format residuals, shapes and field tags.
    """

    _DOLLAR_PATTERN = re.compile(r'\$([a-zA-Z_][a-zA-Z0-9_\.]*)')

    def __init__(self):
        self.env = Environment(loader=BaseLoader(), keep_trailing_newline=False)
        self.env.filters['sci'] = fmt_sci
        self.env.filters['dims'] = fmt_dims
        self.env.filters['field'] = fmt_field

    def render(self, template: str, context: Dict[str, Any]) -> str:
        """
        Render a template; errors come back as "Template error: ..." text.
        """
        try:
            tmpl = self.env.from_string(self._process_dollar_syntax(template))
            return tmpl.render(**context)
        except Exception as e:
            return f"Template error: {e}"

    def _process_dollar_syntax(self, template: str) -> str:
        """$terms -> {{ terms }}, $report.verdict -> {{ report.verdict }}"""
        return self._DOLLAR_PATTERN.sub(lambda m: f'{{{{ {m.group(1)} }}}}', template)

    def evaluate_condition(self, condition: str, context: Dict[str, Any]) -> bool:
        """True when the condition renders to non-blank text"""
        if not condition:
            return True
        result = self.render(condition, context)
        if result.startswith("Template error:"):
            return False
        return bool(result.strip()) and result.strip() not in ("False", "None", "[]", "0")
