"""Wasserstein-1 distances between discrete measures and propagation-of-chaos gaps."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import wasserstein_distance

from ..errors import DomainError, SizeError
from ..rng import RngStream

EXACT_CAP = 4096
N_DIRECTIONS = 64


@dataclass
class WeightedPoints:
    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        n = self.points.shape[0]
        w = np.full(n, 1.0 / n) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (n,) or np.any(w < 0):
            raise DomainError("weights must be nonnegative, one per point")
        if abs(w.sum() - 1.0) > 1e-9:
            raise DomainError(f"total mass must be 1, got {w.sum()!r}")
        self.weights = w


def as_measure(obj) -> WeightedPoints:
    """Point arrays, WeightedPoints, ensembles and grid densities (quantized to cell nodes)."""
    if isinstance(obj, WeightedPoints):
        return obj
    if hasattr(obj, "box_length") and hasattr(obj, "values"):
        g = obj.clipped() if hasattr(obj, "clipped") else obj
        M = g.values.shape[0]
        h = g.box_length / M
        x = -g.box_length / 2 + h * np.arange(M)
        X, Y = np.meshgrid(x, x, indexing="ij")
        w = g.values.ravel() * h * h
        keep = w > 0
        return WeightedPoints(np.stack([X.ravel()[keep], Y.ravel()[keep]], axis=1), w[keep] / w[keep].sum())
    return WeightedPoints(getattr(obj, "positions", obj))


def _ot():
    for name in ("TENSORFLOW", "PYTORCH", "JAX", "CUPY"):
        os.environ.setdefault(f"POT_BACKEND_DISABLE_{name}", "1")
    import ot

    return ot


def exact_w1(mu: WeightedPoints, nu: WeightedPoints) -> float:
    """Exact W1 by network simplex on the Euclidean cost."""
    ot = _ot()
    cost = ot.dist(mu.points, nu.points, metric="euclidean")
    return float(ot.emd2(mu.weights, nu.weights, cost, numItermax=10_000_000))


def directions(dim: int, n: int = N_DIRECTIONS, seed: int = 0) -> np.ndarray:
    g = RngStream(seed, 0x51CED).normal(n * dim).reshape(n, dim)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sliced_w1(mu: WeightedPoints, nu: WeightedPoints, n_directions: int = N_DIRECTIONS, seed: int = 0) -> float:
    """Average over random directions of the 1-D W1 between projections."""
    dirs = directions(mu.points.shape[1], n_directions, seed)
    vals = [
        wasserstein_distance(mu.points @ u, nu.points @ u, mu.weights, nu.weights)
        for u in dirs
    ]
    return float(np.mean(vals))


def wasserstein1(mu, nu, allow_approximate: bool = False, return_exact: bool = False, seed: int = 0):
    """W1 between two unit-mass discrete measures.

    Exact when the combined support has at most 4096 atoms; otherwise sliced
    W1 (a lower bound up to the projection constant), which must be requested
    with ``allow_approximate``.
    """
    mu, nu = as_measure(mu), as_measure(nu)
    if mu.points.shape[1] != nu.points.shape[1]:
        raise DomainError("measures live in different dimensions")
    size = mu.points.shape[0] + nu.points.shape[0]
    if size <= EXACT_CAP:
        value, exact = exact_w1(mu, nu), True
    elif allow_approximate:
        value, exact = sliced_w1(mu, nu, seed=seed), False
    else:
        raise SizeError(f"combined support {size} exceeds the exact cap {EXACT_CAP}")
    return (value, exact) if return_exact else value


def wrap_to_box(points: np.ndarray, L: float) -> np.ndarray:
    return np.mod(np.asarray(points, dtype=float) + L / 2, L) - L / 2


def chaos_gap(ens, reference, seed: int = 0, exact_when_possible: bool = False) -> tuple[float, float]:
    """(W1 of the one-particle empirical measure to the reference, two-particle product gap).

    Particles are wrapped into the periodic box of the reference first.  The
    product gap compares the empirical measure of disjoint pairs (x_{2k}, x_{2k+1})
    with pairs built from two independent bootstrap resamples of the particles.
    """
    x = np.asarray(getattr(ens, "positions", ens), dtype=float)
    x = wrap_to_box(x, reference.box_length)
    ref = as_measure(reference)
    one = WeightedPoints(x)
    solve = wasserstein1 if exact_when_possible else _approx
    w_one = solve(one, ref, allow_approximate=True, seed=seed)
    n = (x.shape[0] // 2) * 2
    pairs = np.concatenate([x[0:n:2], x[1:n:2]], axis=1)
    rng = RngStream(seed, 0xB007)
    idx = np.minimum((rng.uniform(n) * x.shape[0]).astype(int), x.shape[0] - 1)
    boot = np.concatenate([x[idx[: n // 2]], x[idx[n // 2 :]]], axis=1)
    w_two = solve(WeightedPoints(pairs), WeightedPoints(boot), allow_approximate=True, seed=seed)
    return float(w_one), float(w_two)


def _approx(mu, nu, allow_approximate=True, seed=0):
    return sliced_w1(as_measure(mu), as_measure(nu), seed=seed)
