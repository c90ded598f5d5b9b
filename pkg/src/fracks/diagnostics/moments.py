"""Monte Carlo moments of particle ensembles."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError


def _positions(ens) -> np.ndarray:
    return np.asarray(getattr(ens, "positions", ens), dtype=float)


def japanese_moment_samples(ens, kappa: float) -> np.ndarray:
    x = _positions(ens)
    return (1.0 + np.sum(x * x, axis=1)) ** (kappa / 2.0)


def empirical_moment(ens, kappa: float) -> float:
    """(1/N) sum_i <x_i>^kappa with <x> = sqrt(1 + |x|^2)."""
    if not kappa > 1.0:
        raise DomainError("moment order must exceed 1")
    return float(japanese_moment_samples(ens, kappa).mean())


def capped_pair_values(ens, gamma: float, m_cap: float, chunk: int = 256) -> np.ndarray:
    """Row means (1/(N-1)) sum_{j != i} min(m_cap, |x_i - x_j|^{-gamma}), one per particle."""
    if not gamma > 0 or not m_cap > 0:
        raise DomainError("gamma and the cap must be positive")
    x = _positions(ens)
    n = x.shape[0]
    out = np.empty(n)
    r_cap = m_cap ** (-1.0 / gamma)
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        d = x[s:e, None, :] - x[None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        v = np.where(r > r_cap, np.maximum(r, r_cap) ** -gamma, m_cap)
        v[np.arange(e - s), np.arange(s, e)] = 0.0
        out[s:e] = v.sum(axis=1) / (n - 1)
    return out


def singular_pair_moment(ens, gamma: float, m_cap: float) -> float:
    """(1/(N(N-1))) sum_{i != j} min(m_cap, |x_i - x_j|^{-gamma})."""
    return float(capped_pair_values(ens, gamma, m_cap).mean())


def moment_hook(kappa: float, name: str | None = None):
    label = name or f"moment_{kappa:g}"

    def hook(ens):
        v = japanese_moment_samples(ens, kappa)
        return [(label, float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)))]

    return hook


def pair_moment_hook(gamma: float, caps, name: str | None = None):
    """Capped pair moments for several caps; the error bar uses per-particle row means."""
    label = name or f"pair_{gamma:g}"

    def hook(ens):
        rows = []
        for cap in caps:
            v = capped_pair_values(ens, gamma, cap)
            rows.append((f"{label}_cap{cap:g}", float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))))
        return rows

    return hook


def time_integral(t: np.ndarray, v: np.ndarray) -> float:
    """Trapezoidal integral of a recorded curve."""
    return float(np.trapezoid(v, t)) if hasattr(np, "trapezoid") else float(np.trapz(v, t))
