"""Particle engine: sampling, interaction rules, binning, full runs."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from swarmscale import (
    EffectiveParams,
    Grid,
    MicroConfig,
    ModelParams,
    apply_scaling,
    build_scenario,
    consistency_bound,
    init_ensemble,
    leadership_binary,
    leadership_core,
    leadership_generalized,
    moments_on_grid,
    run_micro,
    velocity_core,
    velocity_kick,
)
from swarmscale.micro import Ensemble, drift_step, interaction_step


def zero_rates(R=0.02, nu=0.8):
    return EffectiveParams(
        alpha=0.0, beta=0.0, gamma=0.0, mu_eff=0.0, eta_eff=0.0, delta=0.0, nu=nu, R=R
    )


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            MicroConfig(N=1, dt=1e-3, T=1.0)
        with pytest.raises(ValueError):
            MicroConfig(N=10, dt=0.0, T=1.0)
        with pytest.raises(ValueError):
            MicroConfig(N=10, dt=1e-3, T=-1.0)
        with pytest.raises(ValueError):
            MicroConfig(N=10, dt=1e-3, T=1.0, leadership_rule="osmotic")

    def test_consistency_bound(self):
        eff = EffectiveParams(
            alpha=0, beta=0, gamma=0, mu_eff=1000.0, eta_eff=250.0, delta=0, nu=0.8, R=0.02
        )
        assert consistency_bound(eff) == pytest.approx(1e-3)
        assert consistency_bound(zero_rates()) == np.inf

    def test_run_rejects_inconsistent_dt(self):
        sc = build_scenario("test1d", epsilon=1e-3)
        cfg = MicroConfig(N=100, dt=2e-3, T=0.01)  # bound is epsilon = 1e-3
        with pytest.raises(ValueError):
            run_micro(sc, cfg)


class TestSampling:
    def test_deterministic(self):
        sc = build_scenario("test1d")
        a = init_ensemble(sc, 5000, seed=42)
        b = init_ensemble(sc, 5000, seed=42)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.v, b.v)
        assert np.array_equal(a.lam, b.lam)
        c = init_ensemble(sc, 5000, seed=43)
        assert not np.array_equal(a.x, c.x)

    def test_positions_match_target_cdf(self):
        sc = build_scenario("test1d", R=0.02)  # domain [0, 50], x0=25, sigma=5
        ens = init_ensemble(sc, 50000, seed=3)
        assert ens.x.min() >= 0.0 and ens.x.max() <= 50.0
        # empirical CDF against the sampling distribution
        xs = np.sort(ens.x)
        emp = (np.arange(xs.size) + 0.5) / xs.size
        cdf = (ndtr((xs - 25.0) / 5.0) - ndtr(-5.0)) / (ndtr(5.0) - ndtr(-5.0))
        assert np.max(np.abs(emp - cdf)) < 0.01

    def test_fields_broadcast(self):
        sc = build_scenario("test1d")
        ens = init_ensemble(sc, 100, seed=0)
        assert np.all(ens.v == 0.0) and np.all(ens.lam == 0.0)

    def test_numeric_inverse_cdf_fallback(self):
        from dataclasses import replace

        sc = replace(build_scenario("test1d", R=0.02), ppf=None)
        ens = init_ensemble(sc, 50000, seed=3)
        assert abs(ens.x.mean() - 25.0) < 0.1
        assert abs(ens.x.std() - 5.0) < 0.1

    def test_negative_density_rejected(self):
        from dataclasses import replace

        sc = replace(build_scenario("test1d"), ppf=None, rho0=lambda x: np.full_like(x, -1.0))
        with pytest.raises(ValueError):
            init_ensemble(sc, 100, seed=0)

    def test_unnormalizable_density_rejected(self):
        from dataclasses import replace

        sc = replace(build_scenario("test1d"), ppf=None, rho0=lambda x: np.zeros_like(x))
        with pytest.raises(ValueError):
            init_ensemble(sc, 100, seed=0)


class TestRules:
    def test_velocity_kick_hand_value(self):
        # d = 0.1: repulsion 0.01/0.1, follower weight 0.75 on alignment+attraction
        k = velocity_kick(x=0.1, xs=0.0, v=0.0, vs=1.0, lam=0.25, alpha=0.01, beta=0.5, gamma=1.0)
        assert k == pytest.approx(0.1 + 0.75 * (0.5 * 1.0 + 1.0 * (-0.1)), abs=1e-15)

    def test_velocity_kick_antisymmetric_repulsion(self):
        ki = velocity_kick(0.1, 0.0, 0.0, 0.0, 1.0, alpha=0.01, beta=0.5, gamma=1.0)
        kj = velocity_kick(0.0, 0.1, 0.0, 0.0, 1.0, alpha=0.01, beta=0.5, gamma=1.0)
        assert ki == pytest.approx(-kj, rel=1e-14)

    def test_velocity_core_conserves_pair_sum(self):
        rng = np.random.default_rng(0)
        v, vs = rng.normal(size=1000), rng.normal(size=1000)
        lam, lams = rng.random(1000), rng.random(1000)
        vn, vsn = velocity_core(v, vs, lam, lams, beta=0.7)
        assert np.max(np.abs((vn + vsn) - (v + vs))) <= 1e-12

    def test_leadership_core_conserves_pair_sum(self):
        rng = np.random.default_rng(1)
        lam, lams = rng.random(1000), rng.random(1000)
        ln, lsn = leadership_core(lam, lams, nu=0.8)
        assert np.max(np.abs((ln + lsn) - (lam + lams))) <= 1e-12

    def test_binary_is_involution(self):
        lam = np.linspace(0.0, 1.0, 11)
        assert np.max(np.abs(leadership_binary(leadership_binary(lam)) - lam)) <= 1e-15

    def test_generalized_reduces_to_core_at_zero_drive(self):
        rng = np.random.default_rng(2)
        lam, lams = rng.random(100), rng.random(100)
        ln, lsn = leadership_generalized(lam, lams, nu=0.8, delta=0.0)
        core, cores = leadership_core(lam, lams, nu=0.8)
        assert np.array_equal(ln, core)
        assert np.array_equal(lsn, cores)

    @given(
        lam=st.floats(0.0, 1.0),
        lams=st.floats(0.0, 1.0),
        nu=st.floats(1e-6, 1.0),
        delta=st.floats(0.0, 1e-2),
    )
    @settings(max_examples=300, deadline=None)
    def test_generalized_stays_near_range(self, lam, lams, nu, delta):
        # unclamped rule can exceed [0,1] by at most O(delta)
        ln, lsn = leadership_generalized(lam, lams, nu, delta)
        for v in (ln, lsn):
            assert -2.0 * delta - 1e-12 <= v <= 1.0 + 2.0 * delta + 1e-12


class TestInteractionStep:
    def _ensemble(self, n, seed=0, spread=0.01):
        rng = np.random.default_rng(seed)
        x = 0.5 + spread * rng.standard_normal(n)
        v = 0.1 * rng.standard_normal(n)
        lam = rng.random(n)
        return Ensemble(x=x, v=v, lam=lam, rng=rng, seed=seed)

    def test_out_of_range_pairs_untouched(self):
        # particles 1 apart with R=0.02: no pair can interact
        rng = np.random.default_rng(0)
        x = np.arange(10, dtype=float)
        v = rng.standard_normal(10)
        lam = rng.random(10)
        ens = Ensemble(x=x.copy(), v=v.copy(), lam=lam.copy(), rng=rng, seed=0)
        eff = EffectiveParams(
            alpha=1e-5, beta=1e-3, gamma=1e-3, mu_eff=1000.0, eta_eff=1000.0,
            delta=1e-3, nu=0.8, R=0.02,
        )
        interaction_step(ens, eff, 1e-3, "generalized")
        assert np.array_equal(ens.v, v) and np.array_equal(ens.lam, lam)

    def test_leadership_in_range_after_many_steps(self):
        ens = self._ensemble(2001, seed=5)
        eff = EffectiveParams(
            alpha=1e-5, beta=5e-4, gamma=1e-3, mu_eff=1000.0, eta_eff=1000.0,
            delta=1e-3, nu=0.8, R=0.05,
        )
        for _ in range(100):
            interaction_step(ens, eff, 1e-3, "generalized")
        assert ens.lam.min() >= 0.0 and ens.lam.max() <= 1.0

    def test_binary_rule_flips_exactly(self):
        # rate*dt = 1 forces every in-range pair to exchange
        rng = np.random.default_rng(7)
        x = np.full(100, 0.5)
        lam = rng.random(100)
        ens = Ensemble(x=x, v=np.zeros(100), lam=lam.copy(), rng=rng, seed=7)
        eff = EffectiveParams(
            alpha=0.0, beta=0.0, gamma=0.0, mu_eff=0.0, eta_eff=1000.0,
            delta=0.0, nu=0.8, R=0.02,
        )
        interaction_step(ens, eff, 1e-3, "binary")
        assert np.allclose(np.sort(ens.lam), np.sort(1.0 - lam))

    def test_coincident_counter(self):
        rng = np.random.default_rng(9)
        x = np.full(50, 0.25)  # every pair coincident
        ens = Ensemble(x=x, v=np.zeros(50), lam=np.full(50, 0.5), rng=rng, seed=9)
        eff = EffectiveParams(
            alpha=0.01, beta=0.0, gamma=0.0, mu_eff=1000.0, eta_eff=0.0,
            delta=0.0, nu=0.8, R=0.02,
        )
        interaction_step(ens, eff, 1e-3, "generalized")
        assert ens.counters["coincident"] > 0
        assert np.all(np.isfinite(ens.v))

    def test_clamp_counter(self):
        rng = np.random.default_rng(11)
        x = np.full(40, 0.25)
        lam = np.concatenate([np.zeros(20), np.ones(20)])
        ens = Ensemble(x=x, v=np.zeros(40), lam=lam, rng=rng, seed=11)
        # large non-conservative drive pushes values past the ends
        eff = EffectiveParams(
            alpha=0.0, beta=0.0, gamma=0.0, mu_eff=0.0, eta_eff=1000.0,
            delta=2.0, nu=0.9, R=0.02,
        )
        for _ in range(10):
            interaction_step(ens, eff, 1e-3, "generalized")
        assert ens.counters["clamped"] > 0
        assert ens.lam.min() >= 0.0 and ens.lam.max() <= 1.0


class TestMoments:
    def test_hand_binning(self):
        g = Grid.make_1d(0.0, 1.0, 10)
        ens = Ensemble(
            x=np.array([0.15, 0.11, 0.55]),
            v=np.array([1.0, 2.0, 3.0]),
            lam=np.array([0.2, 0.4, 0.6]),
            rng=np.random.default_rng(0),
            seed=0,
        )
        st = moments_on_grid(ens, g)
        assert st.rho[1] == pytest.approx(2.0 / (3 * 0.1))
        assert st.rho[5] == pytest.approx(1.0 / (3 * 0.1))
        assert st.u[0][1] == pytest.approx(1.5)
        assert st.l[1] == pytest.approx(0.3)
        assert st.l[5] == pytest.approx(0.6)
        assert st.rho.sum() * 0.1 == pytest.approx(1.0)

    def test_norm_override_reflects_absorbed_mass(self):
        g = Grid.make_1d(0.0, 1.0, 10)
        ens = Ensemble(
            x=np.array([0.15, 0.55]),
            v=np.zeros(2),
            lam=np.zeros(2),
            rng=np.random.default_rng(0),
            seed=0,
        )
        st = moments_on_grid(ens, g, n_norm=4)
        assert st.rho.sum() * 0.1 == pytest.approx(0.5)

    def test_outside_counted_and_clipped(self):
        g = Grid.make_1d(0.0, 1.0, 10)
        counters = {}
        ens = Ensemble(
            x=np.array([-0.5, 0.5, 1.7]),
            v=np.zeros(3),
            lam=np.zeros(3),
            rng=np.random.default_rng(0),
            seed=0,
        )
        st = moments_on_grid(ens, g, counters=counters)
        assert counters["outside_grid"] == 2
        assert st.rho[0] > 0 and st.rho[-1] > 0


class TestRunMicro:
    def test_reproducible(self):
        sc = build_scenario("test1d", epsilon=1e-3)
        cfg = MicroConfig(N=2000, dt=1e-3, T=0.05, seed=4, snapshots=0)
        a = run_micro(sc, cfg).states[-1]
        b = run_micro(sc, cfg).states[-1]
        assert np.array_equal(a.rho, b.rho)
        assert np.array_equal(a.u, b.u)
        assert np.array_equal(a.l, b.l)

    def test_snapshot_cadence(self):
        sc = build_scenario("test1d", epsilon=1e-3)
        cfg = MicroConfig(N=500, dt=1e-3, T=0.01, seed=0, snapshots=3)
        series = run_micro(sc, cfg)
        assert series.steps == [0, 2, 5, 8, 10]
        assert series.times[-1] == pytest.approx(0.01)

    def test_free_transport_shifts_mean(self):
        # zero interaction rates leave a pure drift ensemble
        sc = build_scenario("test1d", epsilon=1e-3)
        from dataclasses import replace
        from functools import partial

        from swarmscale.scenarios import _const_1d

        sc = replace(sc, u0=partial(_const_1d, value=0.5))
        cfg = MicroConfig(N=20000, dt=1e-3, T=1.0, seed=8, snapshots=0)
        series = run_micro(sc, cfg, eff=zero_rates())
        st = series.states[-1]
        g = sc.grid()
        mean = (g.centers(0) * st.rho).sum() / st.rho.sum()
        assert mean == pytest.approx(25.0 + 0.5, abs=0.05)

    def test_absorption_removes_particles(self):
        sc = build_scenario("test1d", epsilon=1e-3, T=1.0)
        from dataclasses import replace
        from functools import partial

        from swarmscale.scenarios import _const_1d, _trunc_gauss_ppf

        # narrow packet near the right wall moving out fast
        sc = replace(
            sc,
            ppf=partial(_trunc_gauss_ppf, x0=49.5, sigma=0.2, lo=0.0, hi=50.0),
            u0=partial(_const_1d, value=2.0),
        )
        cfg = MicroConfig(N=5000, dt=1e-3, T=1.0, seed=0, snapshots=0)
        series = run_micro(sc, cfg, eff=zero_rates())
        assert series.meta["particles_remaining"] < 5000
        st = series.states[-1]
        assert st.rho.sum() * sc.grid().dx[0] < 1.0  # absorbed mass is gone

    def test_meta_payload(self):
        sc = build_scenario("test1d", epsilon=1e-3)
        cfg = MicroConfig(N=100, dt=1e-3, T=0.002, seed=1, snapshots=0)
        series = run_micro(sc, cfg)
        for key in ("scenario", "mode", "seed", "N", "dt", "T", "leadership_rule", "backend", "params", "counters"):
            assert key in series.meta
        assert series.meta["mode"] == "micro"

    def test_drift_step(self):
        ens = Ensemble(
            x=np.array([0.0, 1.0]),
            v=np.array([1.0, -2.0]),
            lam=np.zeros(2),
            rng=np.random.default_rng(0),
            seed=0,
        )
        drift_step(ens, 0.5)
        assert np.array_equal(ens.x, [0.5, 0.0])
