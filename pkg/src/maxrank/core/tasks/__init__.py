"""Report System - Template rendering and print reports"""
from .template_manager import TemplateManager
from .report_manager import ReportManager

__all__ = [
    'TemplateManager',
    'ReportManager'
]
