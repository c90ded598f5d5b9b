from .entropy import entropy_kde, kde_grid
from .fisher import (
    FisherGridDensity,
    fisher_info_grid,
    partial_fisher_info,
    product_density,
    shear,
    two_particle_fisher_info,
)
from .moments import empirical_moment, moment_hook, pair_moment_hook, singular_pair_moment
from .scaling import gns_exponent_gap, gns_scaling_check, gns_theta
from .series import DiagnosticsSeries
from .transport import WeightedPoints, chaos_gap, sliced_w1, wasserstein1

__all__ = [
    "DiagnosticsSeries",
    "FisherGridDensity",
    "WeightedPoints",
    "chaos_gap",
    "empirical_moment",
    "entropy_kde",
    "fisher_info_grid",
    "gns_exponent_gap",
    "gns_scaling_check",
    "gns_theta",
    "kde_grid",
    "moment_hook",
    "pair_moment_hook",
    "partial_fisher_info",
    "product_density",
    "shear",
    "singular_pair_moment",
    "sliced_w1",
    "two_particle_fisher_info",
    "wasserstein1",
]
