"""Utils - Debug logging"""
from .debug import init_debugger, get_debugger, DebugSystem

__all__ = [
    'init_debugger',
    'get_debugger',
    'DebugSystem'
]
