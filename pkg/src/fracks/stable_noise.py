"""Isotropic a-stable increments in the plane.

Z_t = sqrt(2 S) G with S a positive (a/2)-stable variable,
E exp(-lam S) = exp(-t lam^{a/2}), and G a standard planar Gaussian, so that
E exp(i r.Z_t) = exp(-t |r|^a) and the generator is -(-Delta)^{a/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import AccuracyError, DomainError
from .rng import RngStream


@dataclass(frozen=True)
class StableParams:
    a: float
    t: float

    def __post_init__(self):
        if not 0.0 < self.a <= 2.0:
            raise DomainError(f"stability index must lie in (0, 2], got {self.a}")
        if not self.t > 0.0:
            raise DomainError(f"time horizon must be positive, got {self.t}")


def _shape(rng: RngStream, n):
    return n is None, 1 if n is None else int(n)


def _finish(x: np.ndarray, squeeze: bool) -> np.ndarray:
    return x[..., 0, :] if squeeze else x


def sample_subordinator(a_half: float, t: float, rng: RngStream, n: int | None = None) -> np.ndarray:
    """Positive stable draws with Laplace transform exp(-t lam^a_half).

    Chambers-Mallows-Stuck (Kanter) representation of the totally skewed law.
    Returns shape ``(n,)`` for a scalar stream, ``(n_streams, n)`` for a
    multi-stream handle; ``n=None`` drops the last axis.
    """
    if not 0.0 < a_half < 1.0:
        raise DomainError(f"subordinator index must lie in (0, 1), got {a_half}")
    if not t > 0.0:
        raise DomainError(f"time must be positive, got {t}")
    squeeze, m = _shape(rng, n)
    u = rng.uniform(2 * m)
    s = _kanter(a_half, np.pi * u[..., :m], -np.log(u[..., m:]))
    s = t ** (1.0 / a_half) * s
    return s[..., 0] if squeeze else s


def _kanter(beta: float, u: np.ndarray, e: np.ndarray) -> np.ndarray:
    return (
        np.sin(beta * u)
        / np.sin(u) ** (1.0 / beta)
        * (np.sin((1.0 - beta) * u) / e) ** ((1.0 - beta) / beta)
    )


def sample_isotropic_stable(p: StableParams, rng: RngStream, n: int | None = None) -> np.ndarray:
    """Planar increments Z_t with E exp(i r.Z_t) = exp(-t |r|^a).

    Shape ``(..., n, 2)``; ``n=None`` gives ``(..., 2)``.  a = 2 is the
    Gaussian with covariance 2t I.
    """
    squeeze, m = _shape(rng, n)
    if p.a == 2.0:
        g = rng.normal(2 * m)
        z = math.sqrt(2.0 * p.t) * np.stack([g[..., :m], g[..., m:]], axis=-1)
        return _finish(z, squeeze)
    beta = p.a / 2.0
    u = rng.uniform(4 * m)
    s = p.t ** (1.0 / beta) * _kanter(beta, np.pi * u[..., :m], -np.log(u[..., m : 2 * m]))
    rad = np.sqrt(-2.0 * np.log(u[..., 2 * m : 3 * m]))
    th = 2.0 * np.pi * u[..., 3 * m :]
    g = np.stack([rad * np.cos(th), rad * np.sin(th)], axis=-1)
    z = np.sqrt(2.0 * s)[..., None] * g
    return _finish(z, squeeze)


def _angles(n: int) -> np.ndarray:
    th = np.pi * (np.arange(n) + 0.5) / n
    return np.stack([np.cos(th), np.sin(th)], axis=-1)


def empirical_char_exponent(samples, t: float, radii, n_angles: int = 16, return_se: bool = False):
    """-log(isotropic empirical characteristic function) / t at each radius.

    Returns an array of rows ``(|r|, exponent)``; with ``return_se`` also the
    delta-method Monte Carlo standard errors.
    """
    z = np.asarray(samples, dtype=float).reshape(-1, 2)
    if z.shape[0] < 10_000:
        raise DomainError("need at least 1e4 samples")
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(radii > 3):
        raise DomainError("radii must lie in (0, 3]")
    proj = z @ _angles(n_angles).T
    rows, ses = [], []
    for r in radii:
        c = np.cos(r * proj).mean(axis=1)
        phi = c.mean()
        if phi <= 0.0:
            raise AccuracyError(f"empirical characteristic function <= 0 at |r|={r}; too few samples")
        se_phi = c.std(ddof=1) / math.sqrt(c.size)
        rows.append((r, -math.log(phi) / t))
        ses.append(se_phi / (phi * t))
    out = np.asarray(rows)
    return (out, np.asarray(ses)) if return_se else out


def fit_stability_index(samples, t: float, radii=(0.25, 0.5, 1.0, 2.0)) -> float:
    """Slope of log(exponent) against log|r|; equals a for a correct sampler."""
    est = empirical_char_exponent(samples, t, radii)
    slope, _ = np.polyfit(np.log(est[:, 0]), np.log(est[:, 1]), 1)
    return float(slope)


def levy_half_cdf(s) -> np.ndarray:
    """CDF of the 1/2-stable subordinator at t=1, density s^{-3/2} e^{-1/(4s)} / (2 sqrt(pi))."""
    from scipy.special import erfc

    s = np.asarray(s, dtype=float)
    return erfc(1.0 / (2.0 * np.sqrt(s)))


@dataclass
class SelfTestResult:
    name: str
    statistic: float
    threshold: float
    passed: bool


def selftest(a: float, n: int = 100_000, seed: int = 0, level: float = 0.01) -> list[SelfTestResult]:
    """Statistical checks of the sampler at stability index a."""
    out: list[SelfTestResult] = []
    stream = 0

    def rng():
        nonlocal stream
        stream += 1
        return RngStream(seed, stream)

    # characteristic exponent regression
    z1 = sample_isotropic_stable(StableParams(a, 1.0), rng(), n)
    slope = fit_stability_index(z1, 1.0)
    out.append(SelfTestResult("char_exponent_slope", slope, 0.05, abs(slope - a) < 0.05))

    est, se = empirical_char_exponent(z1, 1.0, [1.0], return_se=True)
    dev = abs(est[0, 1] - 1.0) / se[0]
    out.append(SelfTestResult("char_exponent_at_unit_radius_sigmas", dev, 4.0, dev < 4.0))

    # self-similarity: u^{-1/a} Z_{ut} ~ Z_t, u = 4
    z4 = sample_isotropic_stable(StableParams(a, 4.0), rng(), n) * 4.0 ** (-1.0 / a)
    for name, x, y in (
        ("scaling_ks_radius", np.hypot(*z1.T), np.hypot(*z4.T)),
        ("scaling_ks_x", z1[:, 0], z4[:, 0]),
        ("scaling_ks_y", z1[:, 1], z4[:, 1]),
    ):
        p = stats.ks_2samp(x, y).pvalue
        out.append(SelfTestResult(name, p, level, p > level))

    # isotropy of the angle
    ang = np.mod(np.arctan2(z1[:, 1], z1[:, 0]), 2 * np.pi)
    counts, _ = np.histogram(ang, bins=36, range=(0, 2 * np.pi))
    p = stats.chisquare(counts).pvalue
    out.append(SelfTestResult("isotropy_chi2", p, level, p > level))

    # additivity: Z_{t1} + Z'_{t2} ~ Z_{t1+t2}
    za = sample_isotropic_stable(StableParams(a, 0.3), rng(), n)
    zb = sample_isotropic_stable(StableParams(a, 0.7), rng(), n)
    zc = sample_isotropic_stable(StableParams(a, 1.0), rng(), n)
    p = stats.ks_2samp(np.hypot(*(za + zb).T), np.hypot(*zc.T)).pvalue
    out.append(SelfTestResult("additivity_ks_radius", p, level, p > level))

    if a < 2.0:
        s = sample_subordinator(a / 2.0, 1.0, rng(), n)
        lt = np.exp(-s)
        dev = abs(lt.mean() - math.exp(-1.0)) / (lt.std(ddof=1) / math.sqrt(n))
        out.append(SelfTestResult("subordinator_laplace_sigmas", dev, 4.0, dev < 4.0))
    s = sample_subordinator(0.5, 1.0, rng(), n)
    p = stats.kstest(s, levy_half_cdf).pvalue
    out.append(SelfTestResult("levy_half_ks", p, level, p > level))
    return out
