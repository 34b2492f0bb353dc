import numpy as np
import pytest

from maxrank.cli.commands import example_tensor
from maxrank.core.linalg import FieldTag, Tolerances
from maxrank.utils import init_debugger

FIELDS = [FieldTag.REAL, FieldTag.COMPLEX]


@pytest.fixture(autouse=True)
def quiet_debugger():
    """Fresh silent log buffer per test"""
    return init_debugger(enabled=False)


@pytest.fixture()
def tol():
    return Tolerances()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=FIELDS, ids=lambda f: f.value)
def field(request):
    return request.param


@pytest.fixture()
def skew_example_real():
    return example_tensor(FieldTag.REAL)


@pytest.fixture()
def skew_example_complex():
    return example_tensor(FieldTag.COMPLEX)
