"""Kernel density estimate of the one-particle law and its Boltzmann functional."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from ..errors import DomainError

MAX_CELLS = 4096


def kde_grid(points, bandwidth: float, cell: float | None = None, pad: float = 6.0):
    """Gaussian KDE on a regular grid: histogram binning followed by Gaussian smoothing.

    Returns (density, cell, origin).  ``cell`` defaults to bandwidth / 4.
    """
    if not bandwidth > 0:
        raise DomainError("bandwidth must be positive")
    x = np.asarray(getattr(points, "positions", points), dtype=float)
    cell = bandwidth / 4.0 if cell is None else cell
    lo = x.min(axis=0) - pad * bandwidth
    hi = x.max(axis=0) + pad * bandwidth
    n = np.ceil((hi - lo) / cell).astype(int) + 1
    if np.any(n > MAX_CELLS):
        raise DomainError(f"KDE grid {n.tolist()} too large; increase the bandwidth or the cell size")
    edges = [lo[i] + cell * (np.arange(n[i] + 1) - 0.5) for i in range(2)]
    counts, _, _ = np.histogram2d(x[:, 0], x[:, 1], bins=edges)
    dens = gaussian_filter(counts / (x.shape[0] * cell * cell), sigma=bandwidth / cell, mode="constant", truncate=8.0)
    return dens, cell, lo


def entropy_kde(ens, bandwidth: float, cell: float | None = None) -> float:
    """int rho ln rho of the Gaussian KDE (larger means more concentrated)."""
    dens, cell, _ = kde_grid(ens, bandwidth, cell)
    pos = dens[dens > 0]
    return float(np.sum(pos * np.log(pos)) * cell * cell)
