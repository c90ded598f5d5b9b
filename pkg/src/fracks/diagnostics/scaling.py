"""Exponent bookkeeping for the fractional Gagliardo-Nirenberg-Sobolev inequality in the plane."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .fisher import fisher_parts


def gns_theta(p: float, a: float) -> float:
    """theta = 1 - (2/a)(1/p - (2-a)/2), the exponent of I_a controlling ||rho||_p."""
    if not 0.0 < a < 2.0:
        raise DomainError("need 0 < a < 2")
    if not 1.0 < p <= 2.0 / (2.0 - a) * (1 + 1e-15):
        raise DomainError(f"p must lie in (1, 2/(2-a)], got {p}")
    return 1.0 - (2.0 / a) * (1.0 / p - (2.0 - a) / 2.0)


def gns_exponent_gap(p: float, a: float) -> float:
    """a theta - 2(1 - 1/p); zero identically."""
    return a * gns_theta(p, a) - 2.0 * (1.0 - 1.0 / p)


def gaussian_grid(sigma: float, M: int, L: float) -> np.ndarray:
    h = L / M
    x = -L / 2 + h * np.arange(M)
    X, Y = np.meshgrid(x, x, indexing="ij")
    g = np.exp(-(X * X + Y * Y) / (2 * sigma * sigma))
    return g / (g.sum() * h * h)


def gns_ratio(rho: np.ndarray, L: float, p: float, a: float) -> float:
    """||rho||_p / I_a(rho)^theta on a periodic grid."""
    h = L / rho.shape[0]
    norm = float((np.sum(rho**p) * h * h) ** (1.0 / p))
    lat, diag = fisher_parts(rho, L, a)
    return norm / (lat + diag) ** gns_theta(p, a)


def gns_scaling_check(
    p: float,
    a: float,
    widths=(0.5, 0.75, 1.0, 1.5, 2.0),
    M: int = 128,
    box_in_widths: float = 12.0,
    rtol: float = 0.02,
) -> bool:
    """Exponent identity plus constancy of ||rho||_p / I_a^theta over Gaussian widths.

    Each Gaussian lives on a box of ``box_in_widths`` standard deviations, so
    the family is an exact dilation orbit of one periodic density.
    """
    if abs(gns_exponent_gap(p, a)) > 1e-12:
        raise ArithmeticError("exponent identity a theta = 2(1 - 1/p) fails")
    ratios = np.array(
        [gns_ratio(gaussian_grid(s, M, box_in_widths * s), box_in_widths * s, p, a) for s in widths]
    )
    spread = (ratios.max() - ratios.min()) / ratios.mean()
    return bool(spread < rtol)
