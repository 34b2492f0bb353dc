"""Models - Decompositions, certificate codec and report builders"""
from .decomposition import Decomposition, RankOneTerm, make_term
from .certificate_builder import (
    RunReportBuilder,
    dumps,
    parse_certificate,
    parse_tensor,
    serialize_certificate,
    serialize_tensor,
)

__all__ = [
    'Decomposition',
    'RankOneTerm',
    'RunReportBuilder',
    'dumps',
    'make_term',
    'parse_certificate',
    'parse_tensor',
    'serialize_certificate',
    'serialize_tensor',
]
