"""Fractional Fisher information of grid densities on a periodic box.

    I_a(rho) = 1/2 int int Phi(rho(x), rho(y)) k(x - y) dx dy,   Phi(u, v) = (u - v)(ln u - ln v)

with k the periodization of |z|^{-2-a} over the box lattice, so that the
functional is defined for densities on the torus and is exactly 1-homogeneous
in rho.  Off-diagonal cell pairs are summed on the grid; the integrable
singularity at z = 0 is accounted for by the lattice-sum correction of the
local quadratic behaviour Phi ~ (z.grad rho)^2 / rho, whose constant is the
continued Epstein zeta value sum' |n|^{-a} = 4 zeta(a/2) beta(a/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.special import zeta

from ..errors import DomainError, ResolutionError

FLOOR = 1e-30
_IMAGES = 4
_NEAR = 4


@dataclass
class FisherGridDensity:
    values: np.ndarray
    box_length: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DomainError("density must live on a square grid")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise DomainError("density must be finite and nonnegative")
        self.values = np.maximum(v, FLOOR)
        mass = self.values.sum() * (self.box_length / v.shape[0]) ** 2
        if abs(mass - 1.0) > 1e-8:
            raise DomainError(f"density must have unit mass, got {mass!r}")

    @classmethod
    def from_grid(cls, grid) -> FisherGridDensity:
        """From a mean-field GridDensity, clipping negative undershoots."""
        g = grid.clipped()
        return cls(g.values, g.box_length)


@lru_cache(maxsize=8)
def epstein_zeta_square(a: float) -> float:
    """Analytic continuation of sum_{n in Z^2, n != 0} |n|^{-a} for 0 < a < 2."""
    import mpmath

    s = a / 2.0
    return float(4.0 * zeta(s) * mpmath.dirichlet(s, [0, 1, 0, -1]))


@lru_cache(maxsize=16)
def periodic_kernel(M: int, L: float, a: float) -> np.ndarray:
    """sum_n |h d + n L|^{-2-a} on the grid offsets d (FFT layout); the d = 0 entry is 0."""
    h = L / M
    p = np.fft.fftfreq(M, 1.0 / M) * h
    X, Y = np.meshgrid(p, p, indexing="ij")
    W = np.zeros((M, M))
    for i in range(-_IMAGES, _IMAGES + 1):
        for j in range(-_IMAGES, _IMAGES + 1):
            r2 = (X + i * L) ** 2 + (Y + j * L) ** 2
            if i == 0 and j == 0:
                r2[0, 0] = np.inf
            W += r2 ** (-(2.0 + a) / 2.0)
    # lattice points outside the explicit block, as a continuum over the equal-area disc complement
    R = (2 * _IMAGES + 1) * L / math.sqrt(math.pi)
    W += 2.0 * math.pi * R**-a / (a * L * L)
    W[0, 0] = 0.0
    return W


def _spectral_gradient_sq(f: np.ndarray, L: float) -> np.ndarray:
    M = f.shape[0]
    k1 = 2 * np.pi * np.fft.fftfreq(M, L / M)
    k2 = 2 * np.pi * np.fft.rfftfreq(M, L / M)
    KX, KY = np.meshgrid(k1, k2, indexing="ij")
    fh = sfft.rfft2(f)
    gx = sfft.irfft2(1j * KX * fh, s=f.shape)
    gy = sfft.irfft2(1j * KY * fh, s=f.shape)
    return gx * gx + gy * gy


def fisher_parts(values: np.ndarray, L: float, a: float) -> tuple[float, float]:
    """(lattice sum, diagonal correction) for a positive, not necessarily normalized, array."""
    if not 0.0 < a < 2.0:
        raise DomainError(f"need 0 < a < 2, got {a}")
    rho = np.maximum(np.asarray(values, dtype=float), FLOOR)
    M = rho.shape[0]
    h = L / M
    lg = np.log(rho)
    W = periodic_kernel(M, L, a)
    # S_d = sum_x Phi(rho_x, rho_{x+d}) = 2 sum rho ln rho - C(d) - C(-d)
    c = sfft.irfft2(np.conj(sfft.rfft2(rho)) * sfft.rfft2(lg), s=rho.shape)
    S = 2.0 * np.sum(rho * lg) - c - np.roll(np.flip(c, (0, 1)), 1, axis=(0, 1))
    # direct sums where the FFT difference would lose digits
    for i in range(-_NEAR, _NEAR + 1):
        for j in range(-_NEAR, _NEAR + 1):
            if i == 0 and j == 0:
                continue
            sh = np.roll(rho, (-i, -j), axis=(0, 1))
            lsh = np.roll(lg, (-i, -j), axis=(0, 1))
            S[i % M, j % M] = np.sum((rho - sh) * (lg - lsh))
    S[0, 0] = 0.0
    lattice = 0.5 * h**4 * float(np.sum(S * W))
    g2 = _spectral_gradient_sq(rho, L)
    diag = -0.5 * h**2 * h ** (2.0 - a) * epstein_zeta_square(a) * float(np.sum(g2 / (2.0 * rho)))
    return lattice, diag


def fisher_info_grid(rho: FisherGridDensity, a: float, max_correction: float = 0.1) -> float:
    """Fractional Fisher information (no normalization constant) of a periodic grid density."""
    lattice, diag = fisher_parts(rho.values, rho.box_length, a)
    total = lattice + diag
    if abs(diag) > max_correction * abs(total) and abs(diag) > 1e-14:
        raise ResolutionError(f"diagonal correction {diag:.3g} exceeds {max_correction:.0%} of {total:.3g}")
    return float(total)


def partial_fisher_info(F: np.ndarray, L: float, a: float, variable: int = 0) -> float:
    """Information of a 4-D grid density in one planar variable, the other integrated out.

    ``F`` has shape (M, M, M, M) with axes (x1, y1, x2, y2) and unit mass on
    the box [0, L)^4; ``variable`` selects the first (0) or second (1) point.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 4 or len(set(F.shape)) != 1:
        raise DomainError("need a 4-D grid with equal sides")
    M = F.shape[0]
    h = L / M
    if variable == 1:
        F = F.transpose(2, 3, 0, 1)
    total = 0.0
    for k in range(M):
        for m in range(M):
            lat, diag = fisher_parts(F[:, :, k, m], L, a)
            total += (lat + diag) * h * h
    return float(total)


def two_particle_fisher_info(F: np.ndarray, L: float, a: float) -> float:
    """Average of the two partial informations of a 2-particle density."""
    return 0.5 * (partial_fisher_info(F, L, a, 0) + partial_fisher_info(F, L, a, 1))


def product_density(g: np.ndarray) -> np.ndarray:
    """g(x1) g(x2) on the 4-D grid."""
    return np.einsum("ij,kl->ijkl", g, g)


def shear(F: np.ndarray) -> np.ndarray:
    """F o Psi^{-1} for Psi(x1, x2) = (x1 - x2, x2): G(u, v) = F(u + v, v) on the periodic grid."""
    M = F.shape[0]
    G = np.empty_like(F)
    for k in range(M):
        for m in range(M):
            G[:, :, k, m] = np.roll(F[:, :, k, m], (-k, -m), axis=(0, 1))
    return G
