import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given, settings
from hypothesis import strategies as st

from fracks.errors import AccuracyError, DomainError
from fracks.frac_laplacian import (
    PvQuadratureParams,
    apply_pv,
    c_norm,
    c_norm_sine_form,
    exact_power_law,
    lemma_constant,
    moment_symbol_bound,
    power_law_coefficient,
    pv_integral,
    smoothed_power_lower_bound,
)

# independent high-precision values, computed once with mpmath
C_NORM_15 = 0.1711671296905523429
POWER_LAW = {(1.5, 0.5): 0.523024810026550860, (1.2, 0.3): 0.351977352832892126}
LEMMA_C = 2.402378300983030872


def test_c_norm_frozen_values():
    assert c_norm(1.5) == pytest.approx(C_NORM_15, rel=1e-13)
    assert c_norm(1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1.999999))
def test_c_norm_forms_agree(a):
    assert c_norm(a) == pytest.approx(c_norm_sine_form(a), rel=1e-12)


def test_c_norm_against_mpmath():
    for a in (0.3, 1.1, 1.7, 1.99):
        am = mp.mpf(a)
        ref = -(2**am) * mp.gamma(1 + am / 2) / (mp.pi * mp.gamma(-am / 2))
        assert c_norm(a) == pytest.approx(float(ref), rel=1e-13)


def test_power_law_coefficient_against_mpmath():
    for (a, e), ref in POWER_LAW.items():
        assert power_law_coefficient(a, e) == pytest.approx(ref, rel=1e-13)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("a,e", [(1.5, 0.5), (1.3, 0.9), (1.8, 1.2), (1.2, 0.3)])
def test_power_law_coefficient_radial_integral(a, e):
    # direct route at x = e1: c * int_0^inf r^{-1-a} int_0^{2pi} (|e1 + z|^e - 1) dtheta dr
    def ring(r):
        g = lambda th: np.expm1(e / 2 * np.log1p(2 * r * np.cos(th) + r * r))
        return 2 * quad(g, 0, np.pi, limit=200, epsabs=0, epsrel=1e-12)[0]

    pieces = ((0, 0.5), (0.5, 1), (1, 2), (2, np.inf))
    total = sum(quad(lambda r: ring(r) * r ** (-1 - a), lo, hi, limit=200, epsabs=0, epsrel=1e-11)[0] for lo, hi in pieces)
    assert c_norm(a) * total == pytest.approx(power_law_coefficient(a, e), rel=1e-9)


def test_lemma_constant():
    assert lemma_constant(1.5, 0.5) == pytest.approx(LEMMA_C, rel=1e-14)


def test_plane_wave_symbol():
    for a in (1.2, 1.7):
        f = lambda p: np.cos(np.asarray(p)[..., 0])
        val = apply_pv(f, None, np.zeros(2), a)
        assert val == pytest.approx(-1.0, rel=1e-3)


def test_quadratic_is_exact_without_exterior_issue():
    # for a < 2 the PV of |x|^2 diverges at infinity: the exterior guard must trip
    f = lambda p: np.sum(np.asarray(p) ** 2, axis=-1)
    with pytest.raises(AccuracyError):
        pv_integral(f, None, np.array([1.0, 0.0]), 1.5)


def test_constant_has_zero_pv():
    f = lambda p: np.ones(np.shape(p)[:-1])
    assert abs(pv_integral(f, None, np.zeros(2), 1.5)) < 1e-10


def test_power_law_against_closed_form():
    x = np.array([0.6, 0.8])
    f = lambda p: np.sum(np.asarray(p) ** 2, axis=-1) ** 0.25
    assert apply_pv(f, None, x, 1.5) == pytest.approx(exact_power_law(1.5, 0.5, x), rel=1e-3)


def test_params_validation():
    with pytest.raises((DomainError, ValueError)):
        PvQuadratureParams(radial_nodes=0).validate()


def test_lower_bound_guards():
    with pytest.raises(DomainError):
        smoothed_power_lower_bound(1.5, 1.2, 1.0, [1.0, 0.0])
    with pytest.raises(DomainError):
        smoothed_power_lower_bound(1.5, 0.5, 1.0, [0.0, 0.0])


def test_lower_bound_holds_for_slow_decay():
    # a - eps small: the exterior integrand decays slowly
    lhs, rhs = smoothed_power_lower_bound(1.1, 0.9, 1e-2, [500.0, 300.0])
    assert lhs >= rhs


def test_moment_symbol_bound_ratio_bounded():
    ratios = []
    for r in (0.0, 1.0, 10.0, 100.0, 1000.0):
        lhs, shape = moment_symbol_bound(1.5, 1.2, [r, 0.0])
        ratios.append(abs(lhs) / shape)
    assert max(ratios) < 5.0


def _bump(c):
    c = np.asarray(c, dtype=float)

    def f(p):
        d = np.asarray(p) - c
        return np.exp(-np.sum(d * d, axis=-1))

    def g(p):
        d = np.asarray(p) - c
        return -2.0 * d * np.exp(-np.sum(d * d, axis=-1))[..., None]

    return f, g


def test_linearity():
    a, x = 1.3, np.array([0.4, -0.2])
    f1, g1 = _bump([0.0, 0.0])
    f2, g2 = _bump([1.0, 0.5])
    combo = lambda p: 2.0 * f1(p) - 0.7 * f2(p)
    gcombo = lambda p: 2.0 * g1(p) - 0.7 * g2(p)
    lhs = apply_pv(combo, gcombo, x, a)
    rhs = 2.0 * apply_pv(f1, g1, x, a) - 0.7 * apply_pv(f2, g2, x, a)
    assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs))


def test_translation_covariance():
    a, x, shift = 0.9, np.array([0.3, 0.1]), np.array([2.5, -1.5])
    f0, g0 = _bump([0.0, 0.0])
    fs, gs = _bump(shift)
    base = apply_pv(f0, g0, x, a)
    moved = apply_pv(fs, gs, x + shift, a)
    assert abs(base - moved) <= 1e-6 * max(1.0, abs(base))
