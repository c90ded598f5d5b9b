import warnings
from dataclasses import replace

import numpy as np
import pytest

from fracks.errors import CollisionError, ConfigError, DomainError
from fracks.interaction import KernelParams, k_alpha
from fracks.particles import (
    InitialDensity,
    SimConfig,
    coupled_run,
    drift,
    init,
    run,
    step,
    trajectory_recorder,
    with_seed,
    write_trajectory_csv,
)
from fracks.diagnostics import moment_hook

BASE = SimConfig(a=1.8, kernel=KernelParams(1.3, 0.1), N=64, dt=0.01, T=0.1)


def test_config_validation():
    with pytest.raises(ConfigError):
        replace(BASE, N=1)
    with pytest.raises(ConfigError):
        replace(BASE, dt=0.0)
    with pytest.raises(ConfigError):
        replace(BASE, initial=InitialDensity(kappa_moment=1.9))
    with pytest.raises(ConfigError):
        InitialDensity(kind="square")


def test_supercritical_fair_competition_warns():
    with pytest.warns(RuntimeWarning):
        SimConfig(a=1.9, kernel=KernelParams(1.9, 5.0), N=4, dt=0.01, T=0.1)


def test_digest_tracks_config():
    assert BASE.digest() == replace(BASE).digest()
    assert BASE.digest() != with_seed(BASE, 1).digest()


def test_drift_matches_pairwise_sum():
    x = np.random.default_rng(0).normal(size=(37, 2))
    kp = KernelParams(1.3, 0.7)
    ref = np.zeros_like(x)
    for i in range(37):
        for j in range(37):
            if i != j:
                ref[i] += k_alpha(x[i] - x[j], kp)
    np.testing.assert_allclose(drift(x, kp, chunk=8), 0.7 / 37 * ref, rtol=1e-12)


def test_drift_conserves_momentum():
    x = np.random.default_rng(1).normal(size=(100, 2))
    assert np.abs(drift(x, KernelParams(1.5, 2.0)).sum(axis=0)).max() < 1e-12


def test_collision_detected():
    x = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(CollisionError) as info:
        drift(x, KernelParams(1.3))
    assert {tuple(p) for p in info.value.pairs} >= {(0, 1), (1, 0)}
    drift(x, KernelParams(1.3, eta=0.1))


def test_runs_are_reproducible():
    a = run(BASE).final.positions
    b = run(BASE).final.positions
    np.testing.assert_array_equal(a, b)
    c = run(with_seed(BASE, 5)).final.positions
    assert not np.array_equal(a, c)


def test_exchangeability():
    ens = init(BASE)
    perm = np.random.default_rng(2).permutation(BASE.N)
    one = step(ens, BASE)
    two = step(ens.permuted(perm), BASE)
    np.testing.assert_allclose(two.positions, one.positions[perm], rtol=1e-13, atol=1e-14)


def test_two_particle_ode_without_noise():
    # d = |x1 - x2| obeys d' = -chi d^{1-alpha}, so d^alpha = d0^alpha - alpha chi t
    alpha, chi, T = 1.3, 0.5, 0.5
    cfg = SimConfig(a=1.5, kernel=KernelParams(alpha, chi), N=2, dt=1e-4, T=T, noise=False)
    ens = init(cfg)
    d0 = np.hypot(*(ens.positions[0] - ens.positions[1]))
    out = run(cfg, ensemble=ens).final
    d = np.hypot(*(out.positions[0] - out.positions[1]))
    assert d == pytest.approx((d0**alpha - alpha * chi * T) ** (1 / alpha), rel=1e-3)


def test_collision_ends_run():
    x = np.array([[0.0, 0.0], [0.0, 0.0]])
    cfg = SimConfig(a=1.5, kernel=KernelParams(1.9, 1.0), N=2, dt=0.1, T=1.0, noise=False)
    ens = init(cfg)
    ens.positions = x
    ser = run(cfg, ensemble=ens)
    assert ser.blew_up
    assert ser.blowup_time is not None


def test_hooks_and_trajectory(tmp_path):
    rec = trajectory_recorder(2)
    ser = run(replace(BASE, record_every=2), [moment_hook(1.2, "m"), rec])
    t, v, e = ser.get("m")
    assert t.size == BASE.n_steps // 2 + 1 and np.all(e > 0)
    path = write_trajectory_csv(tmp_path / "tr.csv", rec.rows)
    assert path.read_text().splitlines()[0] == "t,particle_id,x,y"


def test_initial_densities():
    for init_d in (InitialDensity("uniform_disk", radius=2.0), InitialDensity("two_bumps", sigma=0.3)):
        cfg = replace(BASE, N=2000, initial=init_d)
        pos = init(cfg).positions
        if init_d.kind == "uniform_disk":
            assert np.hypot(*pos.T).max() <= 2.0
            assert np.mean(np.hypot(*pos.T) < np.sqrt(2)) == pytest.approx(0.5, abs=0.05)
        else:
            assert abs(np.mean(pos[:, 0] > 0) - 0.5) < 0.05


def test_coupled_zero_perturbation_is_identical():
    res = coupled_run(replace(BASE, T=0.2), 0.0)
    assert np.all(res.distance == 0.0)


def test_coupled_rigid_shift_is_symmetry():
    res = coupled_run(replace(BASE, T=0.2), 1e-3, q=1.0, mode="rigid")
    np.testing.assert_allclose(res.distance, 1e-3, rtol=1e-8)
    with pytest.raises(DomainError):
        coupled_run(BASE, 1e-3, mode="twist")
