"""Method System - Discovery, Loading, Resolution, Execution"""
from .discovery import MethodDiscovery
from .loader import MethodLoader, class_name_for
from .resolver import DependencyResolver
from .executor import MethodExecutor

__all__ = [
    'MethodDiscovery',
    'MethodLoader',
    'DependencyResolver',
    'MethodExecutor',
    'class_name_for',
]
