import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracks.errors import DomainError
from fracks.thresholds import (
    NoSignChangeError,
    ThresholdTable,
    a_star_rigorous,
    chi_appendix,
    chi_appendix_gamma_form,
    chi_appendix_limit,
    chi_appendix_printed_form,
    chi_appendix_sup,
    chi_rigorous,
    golden_section_max,
)

# mpmath at 40 digits
CHI_RIG_15 = -0.59319624040465654475
A_STAR = 1.7581482353885537427


def test_chi_rigorous_frozen():
    assert chi_rigorous(1.5) == pytest.approx(CHI_RIG_15, rel=1e-13)


def test_a_star():
    r = a_star_rigorous()
    assert r == pytest.approx(A_STAR, abs=1e-9)
    assert abs(chi_rigorous(r)) < 1e-8
    assert chi_rigorous(r - 0.01) < 0 < chi_rigorous(r + 0.01)
    assert a_star_rigorous(bracket=(1.3, 1.99)) == pytest.approx(r, abs=1e-9)


def test_no_sign_change_reports_curve():
    with pytest.raises(NoSignChangeError) as info:
        a_star_rigorous(bracket=(1.2, 1.5))
    assert len(info.value.curve) == 11


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(1.001, 1.999))
def test_appendix_forms(eps, a):
    v = chi_appendix(eps, a)
    assert v == pytest.approx(chi_appendix_gamma_form(eps, a), rel=1e-10)
    assert v > 0


def test_appendix_closed_form_point():
    # eps = 1/2: Gamma(1/4)^2 sin(pi/4) / (pi (a - 1/2)) 2^{a-2} / 2
    a = 1.5
    ref = 2 ** (a - 2) * 0.5 * math.sin(math.pi / 4) * math.gamma(0.25) ** 2 / (math.pi * (a - 0.5))
    assert chi_appendix(0.5, a) == pytest.approx(ref, rel=1e-14)


def test_appendix_limit_and_sup():
    for a in (1.2, 1.5, 1.8):
        v, arg = chi_appendix_sup(a)
        assert arg > 0.999
        assert v == pytest.approx(chi_appendix_limit(a), abs=1e-6)
        assert chi_appendix(1 - 1e-9, a) == pytest.approx(chi_appendix_limit(a), rel=1e-7)


def test_golden_section():
    x, v = golden_section_max(lambda t: -(t - 0.3) ** 2, 0, 1)
    assert x == pytest.approx(0.3, abs=1e-7)


def test_domain_guards():
    with pytest.raises(DomainError):
        chi_rigorous(2.0)
    with pytest.raises(DomainError):
        chi_appendix(1.0, 1.5)
    with pytest.raises(DomainError):
        chi_appendix_sup(0.9)


@pytest.mark.xfail(strict=True, reason="the literal Gamma-ratio expression is twice the optimized bound")
def test_appendix_printed_form_matches():
    assert chi_appendix_printed_form(0.5, 1.5) == pytest.approx(chi_appendix(0.5, 1.5), rel=1e-10)


def test_appendix_printed_form_is_double():
    for e, a in ((0.2, 1.3), (0.5, 1.5), (0.9, 1.9)):
        assert chi_appendix_printed_form(e, a) == pytest.approx(2 * chi_appendix(e, a), rel=1e-12)


def test_table():
    t = ThresholdTable.build(np.linspace(1.1, 1.9, 5))
    rows = list(t.rows())
    assert len(rows) == 5
    assert not t.notes
    assert np.all(t.chi_appendix > t.chi_rigorous)
