import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import wasserstein_distance

from fracks.diagnostics import (
    DiagnosticsSeries,
    FisherGridDensity,
    WeightedPoints,
    chaos_gap,
    empirical_moment,
    entropy_kde,
    fisher_info_grid,
    gns_exponent_gap,
    gns_scaling_check,
    gns_theta,
    partial_fisher_info,
    product_density,
    shear,
    singular_pair_moment,
    sliced_w1,
    two_particle_fisher_info,
    wasserstein1,
)
from fracks.diagnostics.fisher import epstein_zeta_square, fisher_parts
from fracks.diagnostics.moments import capped_pair_values, time_integral
from fracks.diagnostics.scaling import gaussian_grid
from fracks.errors import DomainError, ResolutionError, SizeError
from fracks.frac_laplacian import c_norm
from fracks.meanfield import GridDensity


# --- transport


def test_w1_point_masses():
    assert wasserstein1([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5.0)
    sq = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    assert wasserstein1(sq, sq + [1.0, 0.0]) == pytest.approx(1.0)
    assert wasserstein1(sq, sq) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=30), st.lists(st.floats(-10, 10), min_size=2, max_size=30))
def test_w1_on_a_line_matches_quantile_formula(xs, ys):
    # collinear atoms: the planar optimum equals the 1-D quantile coupling
    mu = np.stack([xs, np.zeros(len(xs))], axis=1)
    nu = np.stack([ys, np.zeros(len(ys))], axis=1)
    assert wasserstein1(mu, nu) == pytest.approx(wasserstein_distance(xs, ys), rel=1e-9, abs=1e-9)


def test_w1_weighted_and_grid():
    mu = WeightedPoints([[0.0, 0.0], [2.0, 0.0]], [0.25, 0.75])
    assert wasserstein1(mu, [[0.0, 0.0]]) == pytest.approx(1.5)
    g = GridDensity(np.full((4, 4), 1 / 16.0), 4.0)
    assert wasserstein1(g, WeightedPoints(*_grid_atoms())) == pytest.approx(0.0, abs=1e-12)


def _grid_atoms():
    x = -2.0 + np.arange(4.0)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1), np.full(16, 1 / 16.0)


def test_w1_size_guard_and_sliced():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(3000, 2)), rng.normal(size=(3000, 2)) + [0.5, 0.0]
    with pytest.raises(SizeError):
        wasserstein1(a, b)
    val, exact = wasserstein1(a, b, allow_approximate=True, return_exact=True)
    assert not exact
    # projections are 1-Lipschitz, so sliced W1 <= W1; the shift bounds W1 by 0.5 plus sampling noise
    small_a, small_b = WeightedPoints(a[:500]), WeightedPoints(b[:500])
    assert sliced_w1(small_a, small_b) <= wasserstein1(small_a, small_b) + 1e-12
    assert val < 0.5


def test_weights_validated():
    with pytest.raises(DomainError):
        WeightedPoints([[0.0, 0.0]], [0.5])


def test_chaos_gap_shrinks_for_exact_samples():
    ref = GridDensity.from_pdf(lambda x, y: np.exp(-(x * x + y * y) / 2) / (2 * np.pi), 64, 20.0)
    rng = np.random.default_rng(1)
    small = chaos_gap(rng.normal(size=(64, 2)), ref)
    large = chaos_gap(rng.normal(size=(2048, 2)), ref)
    assert large[0] < small[0]


# --- moments


def test_moments():
    x = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert empirical_moment(x, 2.0) == pytest.approx((1 + 26) / 2)
    with pytest.raises(DomainError):
        empirical_moment(x, 1.0)
    assert singular_pair_moment(x, 1.0, 1e6) == pytest.approx(0.2)
    assert singular_pair_moment(x, 1.0, 0.1) == pytest.approx(0.1)


def test_pair_moment_matches_bruteforce():
    x = np.random.default_rng(3).normal(size=(50, 2))
    d = np.hypot(*(x[:, None] - x[None]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    ref = np.minimum(1e3, d**-1.3)
    np.fill_diagonal(ref, 0.0)
    np.testing.assert_allclose(capped_pair_values(x, 1.3, 1e3, chunk=7), ref.sum(1) / 49, rtol=1e-12)


def test_time_integral():
    t = np.linspace(0, 1, 11)
    assert time_integral(t, 2 * t) == pytest.approx(1.0)


# --- entropy


def test_entropy_of_separated_bumps():
    h = 0.3
    pts = np.array([[10.0 * i, 0.0] for i in range(10)])
    ref = -(1 + np.log(2 * np.pi * h * h)) - np.log(10)
    assert entropy_kde(pts, h) == pytest.approx(ref, abs=1e-6)


def test_entropy_grows_with_concentration():
    pts = np.random.default_rng(4).normal(size=(400, 2))
    vals = [entropy_kde(pts, b) for b in (1.0, 0.5, 0.25)]
    assert vals[0] < vals[1] < vals[2]


# --- fisher information


def test_fisher_uniform_is_zero():
    u = np.full((32, 32), 1 / 100.0)
    assert abs(fisher_info_grid(FisherGridDensity(u, 10.0), 1.5)) < 1e-12


def test_epstein_zeta_value():
    # sum' |n|^{-s}: at s = 1 (a = 1) it equals 4 zeta(1/2) beta(1/2)
    assert epstein_zeta_square(1.0) == pytest.approx(-3.900264920001955, rel=1e-12)


@pytest.mark.parametrize("a", [1.2, 1.5, 1.8])
def test_fisher_cosine_oracle(a):
    L, M, eps = 10.0, 64, 1e-3
    x = np.arange(M) * L / M
    X, _ = np.meshgrid(x, x, indexing="ij")
    k = 2 * np.pi / L * 2
    lat, diag = fisher_parts((1 + eps * np.cos(k * X)) / L**2, L, a)
    assert lat + diag == pytest.approx(eps**2 * k**a / (2 * c_norm(a)), rel=1e-3)


def test_fisher_refinement_converges():
    vals = [fisher_info_grid(FisherGridDensity(gaussian_grid(1.0, M, 12.0), 12.0), 1.5) for M in (128, 256)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-3)


def test_fisher_resolution_guard():
    g = gaussian_grid(0.3, 16, 12.0)
    with pytest.raises(ResolutionError):
        fisher_info_grid(FisherGridDensity(g, 12.0), 1.8)


def test_fisher_density_validation():
    with pytest.raises(DomainError):
        FisherGridDensity(np.full((8, 8), 2.0), 1.0)
    with pytest.raises(DomainError):
        FisherGridDensity(-np.ones((8, 8)), 1.0)


def test_tensorization_and_shear():
    M, L, a = 8, 8.0, 1.5
    g = gaussian_grid(1.0, M, L)
    F = product_density(g)
    one = sum(fisher_parts(g, L, a))
    assert two_particle_fisher_info(F, L, a) == pytest.approx(one, rel=1e-10)
    G = shear(F)
    assert partial_fisher_info(G, L, a, 0) == pytest.approx(partial_fisher_info(F, L, a, 0), rel=1e-10)


# --- scaling


@settings(max_examples=100, deadline=None)
@given(st.floats(1.01, 1.99), st.floats(0.0, 1.0))
def test_gns_exponent_identity(a, s):
    p = 1.0 + 1e-9 + s * (2.0 / (2.0 - a) - 1.0 - 2e-9)
    assert abs(gns_exponent_gap(p, a)) < 1e-12
    assert 0.0 <= gns_theta(p, a) <= 1.0 + 1e-12


def test_gns_guards_and_scaling():
    with pytest.raises(DomainError):
        gns_theta(1.0, 1.5)
    assert gns_scaling_check(2.0, 1.5, M=64)


# --- series


def test_series_roundtrip(tmp_path):
    s = DiagnosticsSeries("abc")
    s.add(0.0, "m", 1.0, 0.1)
    s.add(0.5, "m", 2.0, 0.1)
    with pytest.raises(ValueError):
        s.add(0.1, "m", 1.0)
    with pytest.raises(ValueError):
        s.add(1.0, "m", 1.0, -1.0)
    t, v, e = s.get("m")
    np.testing.assert_array_equal(t, [0.0, 0.5])
    s.to_csv(tmp_path / "d.csv")
    s.to_json(tmp_path / "d.json")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "t,metric,value,mc_error"
    assert json.loads((tmp_path / "d.json").read_text())["run_manifest"] == "abc"
