"""Particle and mean-field laboratory for aggregation driven by isotropic a-stable noise."""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    BlowUpError,
    CFLError,
    CollisionError,
    ConfigError,
    DomainError,
    MassDriftError,
    ResolutionError,
    SingularityError,
    SizeError,
)
from .frac_laplacian import PvQuadratureParams, apply_pv, c_norm, exact_power_law
from .interaction import KernelParams, k_alpha
from .rng import RngStream, spawn_streams
from .stable_noise import StableParams, sample_isotropic_stable, sample_subordinator

__all__ = [
    "AccuracyError",
    "BlowUpError",
    "CFLError",
    "CollisionError",
    "ConfigError",
    "DomainError",
    "KernelParams",
    "MassDriftError",
    "PvQuadratureParams",
    "ResolutionError",
    "RngStream",
    "SingularityError",
    "SizeError",
    "StableParams",
    "apply_pv",
    "c_norm",
    "exact_power_law",
    "k_alpha",
    "sample_isotropic_stable",
    "sample_subordinator",
    "spawn_streams",
]
