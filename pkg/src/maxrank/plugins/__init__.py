"""
Method plugins.
Every decomposition method (trivial, general_p, square_3, nonsquare_3) lives here.
"""
from .base import MethodPlugin

__all__ = ['MethodPlugin']
