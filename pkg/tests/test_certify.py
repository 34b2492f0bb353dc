import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from maxrank.core.certify import Verdict, reconstruct, relative_residual, verify
from maxrank.core.errors import CertificateFormatError, DimensionMismatch
from maxrank.core.linalg import FieldTag, Tensor3, Tolerances, random_tensor
from maxrank.models.certificate_builder import (
    RunReportBuilder,
    dumps,
    parse_certificate,
    parse_tensor,
    serialize_certificate,
    serialize_tensor,
)
from maxrank.models.decomposition import Decomposition, make_term
from maxrank.plugins.trivial.client import decompose_trivial


@pytest.fixture()
def decomposed(field):
    T = random_tensor((2, 3, 3), field, seed=5)
    return T, decompose_trivial(T)


def test_verify_certifies_exact_terms(decomposed, tol):
    T, D = decomposed
    report = verify(T, D, tol)
    assert report.verdict is Verdict.CERTIFIED
    assert report.term_count == 6
    assert report.lower_bound <= 3
    assert report.to_dict()['verdict'] == "certified"


def test_tampered_term_fails_residual(decomposed, tol):
    T, D = decomposed
    first = D.terms[0]
    tampered = replace(D, terms=(make_term(first.a, first.b, first.c * 1.5),) + D.terms[1:])
    assert verify(T, tampered, tol).verdict is Verdict.RESIDUAL_FAIL


def test_overclaimed_bound_fails(decomposed, tol):
    T, D = decomposed
    assert verify(T, replace(D, claimed_bound=2), tol).verdict is Verdict.BOUND_FAIL


def test_zero_tensor_residual_is_absolute(tol):
    T = Tensor3.zeros((2, 2, 2))
    tiny = Decomposition((make_term([1e-12, 0], [1, 0], [1, 0]),), (2, 2, 2), claimed_bound=4)
    assert relative_residual(T, tiny) == pytest.approx(1e-12)
    assert verify(T, tiny, tol).verdict is Verdict.RESIDUAL_FAIL
    assert verify(T, Decomposition.empty((2, 2, 2)), tol).certified


def test_reconstruct_bare_terms_needs_dims():
    terms = [make_term([1, 0], [0, 1], [2])]
    with pytest.raises(DimensionMismatch):
        reconstruct(terms)
    T = reconstruct(terms, dims=(2, 2, 1))
    assert T.field is FieldTag.REAL
    assert T.array[0, 0, 1] == 2


def test_verify_rejects_shape_mismatch(decomposed, tol):
    _, D = decomposed
    with pytest.raises(DimensionMismatch):
        verify(random_tensor((3, 3, 3)), D, tol)


def test_certificate_round_trip(decomposed, tol):
    T, D = decomposed
    D = D.with_seed(17)
    text = dumps(serialize_certificate(D, tol, verify(T, D, tol)))
    parsed, embedded = parse_certificate(text)
    assert embedded == tol
    assert parsed.seed == 17
    assert parsed.method == D.method
    assert verify(T, parsed, tol).certified


def test_complex_entries_are_pairs():
    T = Tensor3.from_slices([[[1 + 2j]]], FieldTag.COMPLEX)
    doc = serialize_tensor(T)
    assert doc['slices'] == [[[[1.0, 2.0]]]]
    assert parse_tensor(doc).equals(T)


@pytest.mark.parametrize(
    "document",
    [
        "{not json",
        "[1, 2, 3]",
        {"dims": [1, 1, 1]},
        {"dims": [1, 1, 2], "slices": [[[1.0]]]},
        {"dims": [1, 1, 1], "field": "real", "slices": [[[[1.0, 2.0]]]]},
        {"dims": [1, 1, 1], "field": "quaternion", "slices": [[[1.0]]]},
        {"dims": [1, 1, 1], "slices": [[[1.0]]], "extra": True},
    ],
)
def test_malformed_tensor_documents(document):
    with pytest.raises(CertificateFormatError):
        parse_tensor(document)


def test_certificate_term_length_mismatch():
    doc = {"dims": [2, 2, 1], "field": "real", "claimed_bound": 1, "terms": [{"a": [1.0], "b": [1.0, 0.0], "c": [1.0]}]}
    with pytest.raises(CertificateFormatError):
        parse_certificate(doc)


def test_dumps_is_deterministic(decomposed):
    _, D = decomposed
    doc = serialize_certificate(D)
    shuffled = dict(reversed(list(doc.items())))
    assert dumps(doc) == dumps(shuffled)
    assert json.loads(dumps(doc))['claimed_bound'] == D.claimed_bound


def test_dumps_accepts_numpy_scalars():
    doc = {'passed': np.bool_(True), 'error': np.float64(2.5e-12), 'terms': np.int64(7), 'roots': np.arange(2.0)}
    assert json.loads(dumps(doc)) == {'passed': True, 'error': 2.5e-12, 'terms': 7, 'roots': [0.0, 1.0]}
    with pytest.raises(TypeError):
        dumps({'tensor': object()})


def test_tolerances_survive_the_certificate(decomposed):
    _, D = decomposed
    custom = Tolerances(residual_tol=1e-6)
    _, embedded = parse_certificate(dumps(serialize_certificate(D, custom)))
    assert embedded.residual_tol == 1e-6


def test_run_report_summary():
    trials = [
        {'criterion': 'square_real', 'passed': True, 'residual': 1e-12, 'terms': 5},
        {'criterion': 'square_real', 'passed': False, 'residual': 1e-3, 'terms': 6},
        {'criterion': 'pencil', 'passed': True, 'residual': None, 'terms': None},
    ]
    report = RunReportBuilder().build(trials, config={'options': {'seed': 1}})
    status = report['globals']['status']
    assert status['success'] is False
    assert status['failures'] == 1
    summary = {row['criterion']: row for row in report['globals']['summary']}
    assert summary['square_real']['passed'] == 1
    assert summary['square_real']['max_residual'] == 1e-3
    assert summary['pencil']['success'] is True
    assert RunReportBuilder().failed_trials(report) == [trials[1]]


def test_decompositions_reject_wrong_vector_lengths():
    with pytest.raises(DimensionMismatch):
        Decomposition((make_term([1.0], [1.0], [1.0]),), (2, 1, 1))


def test_decomposition_defaults():
    D = Decomposition.empty((1, 2, 3))
    assert D.notes == ()
    assert D.terms == ()
    assert D.tagged("trivial", notes=["fallback:X@y"]).notes == ("fallback:X@y",)
    assert D.notes == () and D.with_seed(4).seed == 4


def test_real_terms_drop_rounding_noise():
    D = Decomposition((make_term(np.array([1 + 1e-12j]), [1.0], [1.0]),), (1, 1, 1), FieldTag.REAL)
    assert not np.iscomplexobj(D.terms[0].a)


@given(seed=st.integers(0, 2**16), order_seed=st.integers(0, 2**16))
@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_residual_ignores_term_order(seed, order_seed):
    T = random_tensor((2, 3, 2), FieldTag.COMPLEX, seed=seed)
    D = decompose_trivial(T)
    order = np.random.default_rng(order_seed).permutation(len(D))
    shuffled = replace(D, terms=tuple(D.terms[i] for i in order))
    assert relative_residual(T, shuffled) == pytest.approx(relative_residual(T, D), abs=1e-15)
