import math

import numpy as np
import pytest

from polycert.libs.certificates import (
    ArchimedeanCertificate,
    CertificateFormatError,
    CoercivityCertificate,
    CompactnessCertificate,
    SosCertificate,
    SosTerm,
    TooManyConstraintsError,
    Unknown,
    archimedean_search,
    certify_coercive,
    certify_compact,
    cubic_sos_certificate,
    radius_bound,
    verify_certificate,
)
from polycert.libs.cubic_minima import cubic_sos_relaxation
from polycert.libs.polynomial import Polynomial, to_cubic_canonical
from tests.conftest import poly


def _unit_disk():
    return poly(2, {(0, 0): 1, (2, 0): -1, (0, 2): -1})


def _square_certificate(gram):
    # (1 + x)² = [1, x] G [1, x]ᵀ
    return SosCertificate(
        kind="cubic-sos",
        nvars=1,
        level=1,
        tol=1e-9,
        target=poly(1, {(2,): 1, (1,): 2, (0,): 1}),
        terms=[SosTerm(gram=gram, basis=[(0,), (1,)])],
    )


def test_hand_built_certificate_verifies():
    result = verify_certificate(_square_certificate(gram=np.ones((2, 2))))
    assert result.valid
    assert result.residual == 0
    assert result.min_eigenvalue == pytest.approx(0.0, abs=1e-12)


def test_wrong_identity_fails_verification():
    result = verify_certificate(_square_certificate(gram=np.array([[1.0, 1.0], [1.0, 2.0]])))
    assert not result.valid
    assert "identity residual" in result.reasons[0]


def test_indefinite_gram_fails_verification():
    certificate = SosCertificate(
        kind="cubic-sos",
        nvars=1,
        level=1,
        tol=1e-9,
        target=poly(1, {(2,): -1, (0,): 1}),
        terms=[SosTerm(gram=np.array([[1.0, 0.0], [0.0, -1.0]]), basis=[(0,), (1,)])],
    )
    result = verify_certificate(certificate)
    assert not result.valid
    assert any("eigenvalue" in reason for reason in result.reasons)


def test_certificate_json_replays():
    data = _square_certificate(gram=np.ones((2, 2))).to_json()
    assert verify_certificate(data).valid
    assert SosCertificate.from_json(data).target == poly(1, {(2,): 1, (1,): 2, (0,): 1})


@pytest.mark.parametrize(
    "mutate",
    [
        lambda data: data.pop("terms"),
        lambda data: data.update(kind="magic"),
        lambda data: data.update(terms=[]),
        lambda data: data.update(tol=-1),
        lambda data: data["terms"][0].update(basis=[[0]]),
        lambda data: data.update(target={"nvars": 2, "terms": []}),
    ],
)
def test_malformed_certificate(mutate):
    data = _square_certificate(gram=np.ones((2, 2))).to_json()
    mutate(data)
    with pytest.raises(CertificateFormatError):
        verify_certificate(data)


def test_certificate_must_be_object():
    with pytest.raises(CertificateFormatError):
        SosCertificate.from_json([1, 2])


def test_coercive_quartic_certified_at_level_one():
    result = certify_coercive(p=poly(2, {(4, 0): 1, (0, 2): 1}), r_max=1)
    assert isinstance(result, CoercivityCertificate)
    assert result.level == 1
    assert result.certificate.residual <= 1e-6
    assert verify_certificate(result.certificate.to_json()).valid
    assert result.sublevel_radius(gamma=2.0) == pytest.approx(math.sqrt(4 + 2))
    assert result.to_json()["certified"] is True


def test_non_coercive_polynomial_is_unknown():
    result = certify_coercive(p=poly(2, {(2, 0): 1}), r_max=1)
    assert isinstance(result, Unknown)
    assert result.to_json()["certified"] is False
    assert [attempt.level for attempt in result.levels] == [1]


def test_coercive_needs_positive_level():
    with pytest.raises(ValueError):
        certify_coercive(p=poly(1, {(2,): 1}), r_max=0)


def test_unit_disk_is_compact():
    result = certify_compact(qs=[_unit_disk()], R=1, r_max=1)
    assert isinstance(result, CompactnessCertificate)
    assert verify_certificate(result.certificate).valid
    assert result.certificate.metadata["subsets"] == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_half_line_is_not_certified_compact():
    result = certify_compact(qs=[poly(1, {(1,): 1})], R=1, r_max=1)
    assert isinstance(result, Unknown)


def test_too_many_stengle_constraints():
    qs = [poly(1, {(0,): 1, (2,): -1})] * 11
    with pytest.raises(TooManyConstraintsError):
        certify_compact(qs=qs, R=1)


def test_radius_bound_without_float_needs_explicit_radius():
    qs = [poly(3, {(0, 0, 0): 1, (2, 0, 0): -1, (0, 2, 0): -1, (0, 0, 2): -1})]
    with pytest.raises(ValueError):
        certify_compact(qs=qs)


def test_radius_bound_exponent():
    bound = radius_bound(n=1, d=1, tau=1, m=1)
    assert bound.multiplier == 4
    assert bound.exponent == 108
    assert bound.log2() == pytest.approx(110)
    assert bound.numeric() == pytest.approx(2.0**110)
    assert radius_bound(n=3, d=2, tau=1, m=1).numeric() == float("inf")


def test_archimedean_certificate_for_disk():
    result = archimedean_search(qs=[_unit_disk()], R=2, degree=2)
    assert isinstance(result, ArchimedeanCertificate)
    assert len(result.multiplier_grams()) == 2
    assert verify_certificate(result.certificate.to_json()).valid


def test_archimedean_search_fails_for_half_line():
    result = archimedean_search(qs=[poly(1, {(1,): 1})], R=1, degree=2)
    assert isinstance(result, Unknown)


def test_archimedean_degree_must_be_even():
    with pytest.raises(ValueError):
        archimedean_search(qs=[_unit_disk()], R=2, degree=3)


def test_cubic_sos_certificate_replays(cubic_with_root_two):
    c = to_cubic_canonical(cubic_with_root_two)
    result = cubic_sos_relaxation(c=c)
    certificate = cubic_sos_certificate(c=c, result=result)
    assert certificate.kind == "cubic-sos"
    assert verify_certificate(certificate.to_json()).valid
    assert certificate.target.constant_term() == -Polynomial.constant(value=result.gamma, nvars=1).constant_term()
