"""Critical sensitivities for the fair-competition regime (kernel exponent equal to a).

Two curves are kept apart: ``chi_rigorous`` comes from an explicit moment
estimate and is positive only above a root ``a*``; ``chi_appendix`` is the
sharper formal bound obtained from the exact action of the fractional
Laplacian on |x|^eps, optimized over eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import AccuracyError, DomainError
from .frac_laplacian import c_norm

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoSignChangeError(ArithmeticError):
    def __init__(self, lo: float, hi: float, curve: list[tuple[float, float]]):
        self.curve = curve
        super().__init__(f"no sign change on [{lo}, {hi}]; curve: {curve}")


def chi_rigorous(a: float) -> float:
    """c pi / (2(2-a)) - 2 pi c (1/(sqrt(3)(3-a)) + 1/a) with c = c_{2,a}."""
    if not 1.0 < a < 2.0:
        raise DomainError(f"need 1 < a < 2, got {a}")
    c = c_norm(a)
    return c * math.pi / (2.0 * (2.0 - a)) - 2.0 * math.pi * c * (1.0 / (math.sqrt(3.0) * (3.0 - a)) + 1.0 / a)


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        curve = [(float(s), f(float(s))) for s in np.linspace(lo, hi, 11)]
        raise NoSignChangeError(lo, hi, curve)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def a_star_rigorous(tol: float = 1e-10, bracket: tuple[float, float] = (1.0 + 1e-6, 2.0 - 1e-6)) -> float:
    """Root of chi_rigorous on (1, 2) by bisection."""
    return _bisect(chi_rigorous, bracket[0], bracket[1], tol)


def _check_appendix(eps: float, a: float):
    if not (0.0 < eps < 1.0 < a < 2.0):
        raise DomainError(f"need 0 < eps < 1 < a < 2, got eps={eps}, a={a}")


def chi_appendix(eps: float, a: float) -> float:
    """2^{a-2} eps sin(eps pi/2) Gamma(eps/2)^2 / (pi (a - eps)).

    Tends to 2^{a-2}/(a-1) as eps -> 1.
    """
    _check_appendix(eps, a)
    value = 2.0 ** (a - 2.0) * eps * math.sin(eps * math.pi / 2.0) * gamma(eps / 2.0) ** 2 / (math.pi * (a - eps))
    other = chi_appendix_gamma_form(eps, a)
    if abs(value - other) > 1e-10 * abs(value):
        raise AccuracyError(f"threshold forms disagree at eps={eps}, a={a}: {value!r} vs {other!r}")
    return float(value)


def chi_appendix_gamma_form(eps: float, a: float) -> float:
    """-2^a Gamma(1+eps/2) / (Gamma(-eps/2) eps (a - eps)), equal to chi_appendix by reflection."""
    _check_appendix(eps, a)
    return float(-(2.0**a) * gamma(1.0 + eps / 2.0) / (gamma(-eps / 2.0) * eps * (a - eps)))


def chi_appendix_printed_form(eps: float, a: float) -> float:
    """-2^a G((2+e)/2) G((a-e)/2) / (G(-e/2) G((2+a-e)/2) e), evaluated literally.

    This expression equals ``2 * chi_appendix(eps, a)`` identically.
    """
    _check_appendix(eps, a)
    return float(
        -(2.0**a)
        * gamma((2.0 + eps) / 2.0)
        * gamma((a - eps) / 2.0)
        / (gamma(-eps / 2.0) * gamma((2.0 + a - eps) / 2.0) * eps)
    )


def chi_appendix_limit(a: float) -> float:
    return 2.0 ** (a - 2.0) / (a - 1.0)


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-8) -> tuple[float, float]:
    """Maximize f on [lo, hi] by golden-section search.  Returns (x, f(x))."""
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
    x = 0.5 * (lo + hi)
    return x, f(x)


def chi_appendix_sup(a: float, n_scan: int = 1000, tol: float = 1e-8) -> tuple[float, float]:
    """Supremum of chi_appendix(., a) over the open interval (0, 1) and where it sits.

    A uniform scan locates the best interior node; golden-section search then
    refines on the bracket formed by its neighbours (clipped inside (0, 1)).
    """
    if not 1.0 < a < 2.0:
        raise DomainError(f"need 1 < a < 2, got {a}")
    edge = 1e-12
    grid = np.linspace(0.0, 1.0, n_scan + 2)[1:-1]
    vals = np.array([chi_appendix(e, a) for e in grid])
    k = int(np.argmax(vals))
    lo = grid[k - 1] if k > 0 else edge
    hi = grid[k + 1] if k < n_scan - 1 else 1.0 - edge
    x, v = golden_section_max(lambda e: chi_appendix(e, a), lo, hi, tol)
    if vals[k] > v:
        x, v = float(grid[k]), float(vals[k])
    return float(v), float(x)


@dataclass
class ThresholdTable:
    a_values: np.ndarray
    chi_rigorous: np.ndarray
    chi_appendix: np.ndarray
    arg_eps: np.ndarray
    a_star_rigorous: float
    notes: list[str] = field(default_factory=list)

    @classmethod
    def build(cls, a_values) -> ThresholdTable:
        a_values = np.asarray(a_values, dtype=float)
        rig = np.array([chi_rigorous(a) for a in a_values])
        sups = [chi_appendix_sup(a) for a in a_values]
        table = cls(
            a_values=a_values,
            chi_rigorous=rig,
            chi_appendix=np.array([s[0] for s in sups]),
            arg_eps=np.array([s[1] for s in sups]),
            a_star_rigorous=a_star_rigorous(),
        )
        bad = a_values[table.chi_appendix < table.chi_rigorous]
        if bad.size:
            table.notes.append(f"appendix curve below rigorous curve at a={bad.tolist()}")
        return table

    def rows(self):
        for i in range(self.a_values.size):
            yield self.a_values[i], self.chi_rigorous[i], self.chi_appendix[i], self.arg_eps[i]
