"""Decomposer - Building blocks, three-slice lemmas and the method dispatcher"""
from .blocks import (
    choose_shift,
    decompose_diagonal_tensor,
    decompose_matrix,
    decompose_pencil_tail,
    permutation_transform,
    rotate_into_last_slice,
    singularizing_diagonal,
)
from .lemmas import (
    conjugate_to_condition_b,
    decompose_use_ab,
    eliminate_anchored_columns,
    perturb_with_retries,
)
from .dispatcher import AUTO, Dispatcher, MethodOutcome, MethodPlan, decompose, shape_facts

__all__ = [
    'AUTO',
    'Dispatcher',
    'MethodOutcome',
    'MethodPlan',
    'choose_shift',
    'conjugate_to_condition_b',
    'decompose',
    'decompose_diagonal_tensor',
    'decompose_matrix',
    'decompose_pencil_tail',
    'decompose_use_ab',
    'eliminate_anchored_columns',
    'permutation_transform',
    'perturb_with_retries',
    'rotate_into_last_slice',
    'shape_facts',
    'singularizing_diagonal',
]
