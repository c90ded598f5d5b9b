"""Euler scheme for N attracting particles driven by independent a-stable noises.

    X^i_{n+1} = X^i_n + dt (chi/N) sum_{j != i} K(X^i_n - X^j_n) + Z^i_{dt}

Particle i owns the counter-based stream with id i, so draws do not depend on
how the ensemble is traversed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .diagnostics.series import DiagnosticsSeries
from .errors import BlowUpError, CollisionError, ConfigError, DomainError
from .interaction import KernelParams
from .io import stable_hash, write_csv
from .rng import RngStream, spawn_streams
from .stable_noise import StableParams, sample_isotropic_stable

BLOWUP_LEVEL = 1e12


@dataclass(frozen=True)
class InitialDensity:
    """Initial law: ``gaussian`` (sigma), ``uniform_disk`` (radius) or ``two_bumps`` (centers, sigma)."""

    kind: str = "gaussian"
    sigma: float = 1.0
    radius: float = 1.0
    centers: tuple[tuple[float, float], ...] = ((-2.0, 0.0), (2.0, 0.0))
    kappa_moment: float = 1.2

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform_disk", "two_bumps"):
            raise ConfigError(f"unknown initial density {self.kind!r}")
        if self.sigma <= 0 or self.radius <= 0:
            raise ConfigError("sigma and radius must be positive")
        if self.kappa_moment <= 1.0:
            raise ConfigError("declared moment order must exceed 1")
        object.__setattr__(self, "centers", tuple(tuple(float(v) for v in c) for c in self.centers))

    def sample(self, rng: RngStream) -> np.ndarray:
        """One point per stream of ``rng``, shape (n_streams, 2)."""
        if self.kind == "gaussian":
            return self.sigma * rng.normal(2)
        if self.kind == "uniform_disk":
            u = rng.uniform(2)
            r = self.radius * np.sqrt(u[..., 0])
            th = 2.0 * np.pi * u[..., 1]
            return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        pick = rng.uniform(1)[..., 0]
        idx = np.minimum((pick * len(self.centers)).astype(int), len(self.centers) - 1)
        return np.asarray(self.centers)[idx] + self.sigma * rng.normal(2)

    def pdf(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return np.exp(-(x * x + y * y) / (2 * self.sigma**2)) / (2 * np.pi * self.sigma**2)
        if self.kind == "uniform_disk":
            return np.where(x * x + y * y <= self.radius**2, 1.0 / (np.pi * self.radius**2), 0.0)
        out = np.zeros(np.broadcast(x, y).shape)
        for cx, cy in self.centers:
            out += np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * self.sigma**2))
        return out / (2 * np.pi * self.sigma**2 * len(self.centers))


@dataclass(frozen=True)
class SimConfig:
    a: float
    kernel: KernelParams
    N: int
    dt: float
    T: float
    seed: int = 0
    initial: InitialDensity = field(default_factory=InitialDensity)
    record_every: int = 1
    noise: bool = True

    def __post_init__(self):
        if not 0.0 < self.a <= 2.0:
            raise ConfigError(f"stability index must lie in (0, 2], got {self.a}")
        if self.N < 2:
            raise ConfigError("need at least two particles")
        if not self.dt > 0 or not self.T >= self.dt:
            raise ConfigError("need dt > 0 and T >= dt")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.a > 1.0 and not self.initial.kappa_moment < self.a:
            raise ConfigError("declared moment order must lie in (1, a)")
        if self.kernel.alpha == self.a and 1.0 < self.a < 2.0:
            from .thresholds import chi_rigorous

            bound = chi_rigorous(self.a)
            if self.kernel.chi >= bound:
                warnings.warn(
                    f"chi={self.kernel.chi} is not below the fair-competition threshold {bound:.6g} at a={self.a}",
                    RuntimeWarning,
                    stacklevel=2,
                )

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def digest(self) -> str:
        return stable_hash(self)


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    time: float
    streams: RngStream
    config_hash: str
    step_index: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2 or self.positions.shape[0] < 2:
            raise DomainError("positions must have shape (N, 2) with N >= 2")
        if self.streams.n_streams != self.positions.shape[0]:
            raise DomainError("need one stream per particle")

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> ParticleEnsemble:
        return ParticleEnsemble(self.positions.copy(), self.time, self.streams.copy(), self.config_hash, self.step_index)

    def permuted(self, perm) -> ParticleEnsemble:
        """Relabel particles, carrying each particle's stream along."""
        perm = np.asarray(perm)
        return ParticleEnsemble(
            self.positions[perm], self.time, self.streams.subset(perm), self.config_hash, self.step_index
        )


def init(config: SimConfig) -> ParticleEnsemble:
    """N i.i.d. draws from the initial density; particle i uses stream id i."""
    streams = spawn_streams(config.seed, config.N)
    pos = config.initial.sample(streams)
    return ParticleEnsemble(pos, 0.0, streams, config.digest())


def drift(positions: np.ndarray, kernel: KernelParams, chunk: int = 256) -> np.ndarray:
    """(chi/N) sum_{j != i} K(x_i - x_j) by direct summation."""
    x = np.asarray(positions, dtype=float)
    n = x.shape[0]
    out = np.empty_like(x)
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        d = x[s:e, None, :] - x[None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        rows = np.arange(e - s)
        r[rows, rows + s] = np.inf
        if kernel.eta > 0.0:
            r = np.maximum(r, kernel.eta)
        elif not np.all(r > 0.0):
            i, j = np.nonzero(r == 0.0)
            raise CollisionError(np.stack([i + s, j], axis=-1))
        w = r**-kernel.alpha
        out[s:e, 0] = -(d[..., 0] * w).sum(axis=1)
        out[s:e, 1] = -(d[..., 1] * w).sum(axis=1)
    return out * (kernel.chi / n)


def noise_increments(ens: ParticleEnsemble, config: SimConfig) -> np.ndarray:
    return sample_isotropic_stable(StableParams(config.a, config.dt), ens.streams)


def step(ens: ParticleEnsemble, config: SimConfig) -> ParticleEnsemble:
    """One Euler step.  The returned ensemble owns advanced copies of the streams."""
    v = drift(ens.positions, config.kernel) if config.kernel.chi != 0.0 else 0.0
    streams = ens.streams.copy()
    new = ParticleEnsemble(ens.positions.copy(), ens.time, streams, ens.config_hash, ens.step_index)
    dz = noise_increments(new, config)
    if config.noise:
        new.positions += config.dt * v + dz
    else:
        new.positions += config.dt * v
    new.time = (ens.step_index + 1) * config.dt
    new.step_index = ens.step_index + 1
    if not np.all(np.isfinite(new.positions)) or np.max(np.abs(new.positions)) > BLOWUP_LEVEL:
        raise BlowUpError(new.time)
    return new


Hook = Callable[[ParticleEnsemble], Iterable[tuple[str, float, float]]]


def run(
    config: SimConfig,
    hooks: Iterable[Hook] = (),
    ensemble: ParticleEnsemble | None = None,
) -> DiagnosticsSeries:
    """Step from 0 to T, calling each hook every ``record_every`` steps.

    Hooks return iterables of (metric, value, mc_error).  Blow-ups and
    collisions end the run early and are recorded on the series.
    """
    hooks = list(hooks)
    ens = init(config) if ensemble is None else ensemble
    series = DiagnosticsSeries(run_manifest=ens.config_hash)

    def record(e: ParticleEnsemble):
        for hook in hooks:
            for name, value, err in hook(e) or ():
                series.add(e.time, name, value, err)

    record(ens)
    for k in range(1, config.n_steps + 1):
        try:
            ens = step(ens, config)
        except BlowUpError as exc:
            series.flag_blowup(exc.time, "blowup")
            break
        except CollisionError as exc:
            series.flag_blowup(k * config.dt, f"collision {exc.pairs[:3]}")
            break
        if k % config.record_every == 0:
            record(ens)
    series.final = ens
    return series


def _coupled_offsets(n: int, delta: float, direction, mode: str) -> np.ndarray:
    u = np.asarray(direction, dtype=float)
    u = u / np.hypot(*u)
    if mode == "rigid":
        sign = np.ones(n)
    elif mode == "alternating":
        sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    else:
        raise DomainError(f"unknown perturbation mode {mode!r}")
    return delta * sign[:, None] * u[None, :]


@dataclass
class CoupledResult:
    times: np.ndarray
    distance: np.ndarray
    mc_error: np.ndarray
    blowup_time: float | None = None

    def log_linear_fit(self, t_min: float = 0.0):
        """Least-squares fit log(distance) = c0 + rate t; returns (rate, intercept, r2)."""
        m = (self.times >= t_min) & (self.distance > 0)
        t, y = self.times[m], np.log(self.distance[m])
        rate, c0 = np.polyfit(t, y, 1)
        resid = y - (c0 + rate * t)
        ss = np.sum((y - y.mean()) ** 2)
        r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else float("nan")
        return float(rate), float(c0), float(r2)


def coupled_run(
    config: SimConfig,
    delta: float,
    q: float = 1.5,
    direction=(1.0, 0.0),
    mode: str = "alternating",
) -> CoupledResult:
    """Two systems sharing every noise increment, the second started at a perturbed state.

    ``mode="rigid"`` shifts every particle by delta along ``direction``;
    ``"alternating"`` shifts even-indexed particles by +delta and odd ones by
    -delta.  Returns (1/N) sum_i |X^i - Y^i|^q over time.
    """
    if not 1.0 <= q:
        raise DomainError("q must be >= 1")
    first = init(config)
    second = first.copy()
    second.positions = second.positions + _coupled_offsets(config.N, delta, direction, mode)
    times, dist, err = [], [], []

    def record(x: ParticleEnsemble, y: ParticleEnsemble):
        d = np.hypot(*(x.positions - y.positions).T) ** q
        times.append(x.time)
        dist.append(d.mean())
        err.append(d.std(ddof=1) / math.sqrt(d.size))

    record(first, second)
    blow = None
    for k in range(1, config.n_steps + 1):
        vx = drift(first.positions, config.kernel)
        vy = drift(second.positions, config.kernel)
        dz = noise_increments(first, config) if config.noise else 0.0
        for ens, v in ((first, vx), (second, vy)):
            ens.positions = ens.positions + config.dt * v + dz
            ens.time = k * config.dt
            ens.step_index = k
        second.streams.counter = first.streams.counter
        if not (np.all(np.isfinite(first.positions)) and np.all(np.isfinite(second.positions))):
            blow = k * config.dt
            break
        if k % config.record_every == 0:
            record(first, second)
    return CoupledResult(np.array(times), np.array(dist), np.array(err), blow)


def trajectory_recorder(every: int = 1):
    """Hook collecting (t, particle_id, x, y) rows; rows live on ``hook.rows``."""
    rows: list[tuple[float, int, float, float]] = []
    count = {"n": 0}

    def hook(ens: ParticleEnsemble):
        if count["n"] % every == 0:
            for i, (px, py) in enumerate(ens.positions):
                rows.append((ens.time, i, px, py))
        count["n"] += 1
        return ()

    hook.rows = rows
    return hook


def write_trajectory_csv(path, rows):
    return write_csv(path, ["t", "particle_id", "x", "y"], rows)


def with_seed(config: SimConfig, seed: int) -> SimConfig:
    return replace(config, seed=seed)
