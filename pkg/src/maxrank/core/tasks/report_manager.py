"""Report Manager - Run the print reports configured for a CLI command"""
import sys
from typing import Any, Dict, List, Optional, TextIO

from .template_manager import TemplateManager
from ...utils.debug import get_debugger


class ReportManager:
    """Executes `reports` entries of config.yml whose `command` matches"""

    def __init__(self, config: Dict[str, Any], template_manager: Optional[TemplateManager] = None):
        self.config = config
        self.template_manager = template_manager or TemplateManager()
        self.reports = config.get('reports', []) or []
        self.debugger = get_debugger()

    def for_command(self, command: str) -> List[Dict[str, Any]]:
        return [r for r in self.reports if r.get('command') == command]

    def run(self, command: str, context: Dict[str, Any], stream: Optional[TextIO] = None) -> List[Dict[str, Any]]:
        """
        Render and print every report of `command`.

        Returns:
            [{report_name, type, output}] for the reports that ran
        """
        stream = stream or sys.stdout
        results = []
        for report in self.for_command(command):
            result = self._execute_report(report, context, stream)
            if result:
                results.append(result)
        self.debugger.debug("reports", "Reports rendered", command=command, count=len(results))
        return results

    def _execute_report(self, report: Dict[str, Any], context: Dict[str, Any], stream: TextIO) -> Optional[Dict[str, Any]]:
        name = report.get('name', 'unnamed')
        condition = report.get('condition')
        if condition and not self.template_manager.evaluate_condition(condition, context):
            self.debugger.debug("reports", "Report condition not met", report=name)
            return None

        report_type = report.get('type', 'print')
        if report_type != 'print':
            self.debugger.warn("reports", "Unsupported report type", report=name, type=report_type)
            return None

        template = report.get('template', '')
        if not template:
            return None
        output = self.template_manager.render(template, context).rstrip("\n")
        print(output, file=stream)
        return {'report_name': name, 'type': report_type, 'output': output}
