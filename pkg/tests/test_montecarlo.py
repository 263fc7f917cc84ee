import math
from dataclasses import replace

import numpy as np
import pytest

from fdiab.config import parse_config
from fdiab.metrics import epsilon_rate, outage_probability, spectral_efficiency
from fdiab.montecarlo import (
    Scenario,
    SweepSpec,
    TrialConfig,
    TrialContext,
    run_sweep,
    run_trial,
)

SMALL = [
    "channel.K=8",
    "channel.taps=4",
    "channel.cp=2",
    "system.n_ant_gnb=8",
    "system.n_ant_iab=8",
    "system.n_ant_ue=4",
]


@pytest.fixture(scope="module")
def small_system():
    return parse_config(None, SMALL).system_config()


@pytest.fixture(scope="module")
def small_trial_cfg(small_system):
    return TrialConfig(system=small_system, snr_db=10.0, si_power_db=40.0, noise_var=1.0)


class TestScenario:
    def test_tags(self):
        assert Scenario("fd", "hybrid", 4).tag == "fd:hybrid:b4"
        assert Scenario("hd", "all-digital", math.inf).tag == "hd:all-digital:binf"

    def test_validation(self):
        with pytest.raises(ValueError):
            Scenario("tdd", "hybrid")
        with pytest.raises(ValueError):
            Scenario("fd", "analog")


class TestRunTrial:
    def test_deterministic(self, small_trial_cfg):
        sc = Scenario("fd", "hybrid", 4)
        a = run_trial(3, sc, small_trial_cfg)
        b = run_trial(3, sc, small_trial_cfg)
        assert a == b

    def test_different_seeds_differ(self, small_trial_cfg):
        sc = Scenario("fd", "all-digital", 4)
        a = run_trial(0, sc, small_trial_cfg)
        b = run_trial(1, sc, small_trial_cfg)
        assert a.se_sum != b.se_sum

    def test_zeroed_interference_channel_matches_quiet_link(self, small_system):
        sc_fd = Scenario("fd", "all-digital", math.inf)
        sc_hd = Scenario("hd", "all-digital", math.inf)
        ctx = TrialContext(5, small_system)
        ctx.channels.si.subcarriers[:] = 0.0
        fd = ctx.evaluate(sc_fd, 10.0, 40.0, 1.0)
        hd = ctx.evaluate(sc_hd, 10.0, 40.0, 1.0)
        assert fd.se_backhaul == pytest.approx(2.0 * hd.se_backhaul, rel=1e-9)
        assert fd.se_sum == pytest.approx(2.0 * hd.se_sum, rel=1e-9)

    def test_half_duplex_factor_is_exact(self, small_system):
        sc = Scenario("hd", "hybrid", 4)
        ctx = TrialContext(7, small_system)
        res = ctx.evaluate(sc, 10.0, 40.0, 1.0)
        assert res.se_sum == pytest.approx(res.se_backhaul + res.se_access, rel=1e-12)
        # recompute the unhalved rates with the same design pipeline
        ctx2 = TrialContext(7, small_system)
        from fdiab.beamforming import design_all
        from fdiab.metrics import LinkPowers
        from fdiab.quantization import AdcModel

        powers = LinkPowers(rho_a=10.0, rho_b=10.0, rho_s=0.0)
        beams = design_all(
            ctx2.channels.backhaul,
            ctx2.channels.access,
            ctx2.channels.si,
            replace(small_system.link, architecture="hybrid"),
            powers,
            AdcModel.from_bits(4),
        )
        se_b = spectral_efficiency("backhaul", beams, ctx2.channels, powers, AdcModel.from_bits(4), "hd")
        assert res.se_backhaul == pytest.approx(0.5 * se_b, rel=1e-12)

    def test_bound_dominates_achieved_rate(self, small_trial_cfg):
        sc = Scenario("fd", "all-digital", math.inf)
        for seed in range(100):
            r = run_trial(seed, sc, small_trial_cfg)
            assert r.se_backhaul <= r.se_bound_backhaul + 1e-9
            assert r.se_access <= r.se_bound_access + 1e-9

    def test_bound_scenario_reports_bound(self, small_trial_cfg):
        r = run_trial(0, Scenario("fd", "bound", math.inf), small_trial_cfg)
        assert r.se_sum == r.se_bound_backhaul + r.se_bound_access
        assert r.bits == math.inf

    def test_failure_is_contextualized(self, small_system):
        bad = TrialConfig(system=small_system, snr_db=10.0, si_power_db=40.0, noise_var=-1.0)
        with pytest.raises(RuntimeError, match="seed 4"):
            run_trial(4, Scenario("fd", "hybrid", 4), bad)


def small_spec(system, **kw):
    base = dict(
        axis="snr_db",
        values=[0.0, 10.0],
        trials=3,
        base_seed=0,
        system=system,
        snr_db=10.0,
        si_power_db=40.0,
        noise_var=1.0,
    )
    base.update(kw)
    return SweepSpec(**base)


class TestRunSweep:
    def test_single_trial_mean_equals_trial(self, small_system, small_trial_cfg):
        spec = small_spec(small_system, values=[10.0], trials=1)
        sc = Scenario("fd", "hybrid", 4)
        res = run_sweep(spec, [sc])
        want = run_trial(0, sc, small_trial_cfg)
        assert res.rows[0].mean_se_sum == pytest.approx(want.se_sum, rel=1e-12)

    def test_seed_prefix_stability(self, small_system):
        sc = Scenario("hd", "all-digital", 4)
        small = run_sweep(small_spec(small_system, values=[10.0], trials=2), [sc])
        big = run_sweep(small_spec(small_system, values=[10.0], trials=4), [sc])
        np.testing.assert_array_equal(
            big.samples[(10.0, sc.tag)][:2], small.samples[(10.0, sc.tag)]
        )

    def test_parallel_equals_sequential(self, small_system):
        sc = Scenario("fd", "hybrid", 4)
        spec = small_spec(small_system, values=[10.0], trials=4)
        seq = run_sweep(spec, [sc], workers=1)
        par = run_sweep(spec, [sc], workers=2)
        np.testing.assert_array_equal(seq.samples[(10.0, sc.tag)], par.samples[(10.0, sc.tag)])
        assert seq.rows[0] == par.rows[0]

    def test_bits_axis_overrides_scenario_bits(self, small_system):
        spec = small_spec(small_system, axis="bits", values=[2.0, 4.0], trials=2)
        res = run_sweep(spec, [Scenario("fd", "hybrid", 1), Scenario("fd", "bound", math.inf)])
        bits = [(r.axis_value, r.bits) for r in res.rows]
        assert (2.0, 2.0) in bits and (4.0, 4.0) in bits
        bound_rows = [r for r in res.rows if r.architecture == "bound"]
        assert all(r.bits == math.inf for r in bound_rows)

    def test_mean_rate_increases_with_snr(self, small_system):
        spec = small_spec(small_system, values=[-5.0, 5.0, 15.0], trials=200)
        sc = Scenario("fd", "all-digital", math.inf)
        res = run_sweep(spec, [sc])
        means = [r.mean_se_sum for r in res.rows]
        assert means[0] < means[1] < means[2]

    def test_outage_and_quantile_columns_match_samples(self, small_system):
        spec = small_spec(small_system, values=[10.0], trials=8, outage_rate=1.0, epsilon=0.25)
        sc = Scenario("fd", "hybrid", 3)
        res = run_sweep(spec, [sc])
        samples = res.samples[(10.0, sc.tag)]
        assert res.rows[0].outage_p == outage_probability(samples, 1.0)
        assert res.rows[0].eps_rate == epsilon_rate(samples, 0.25)
        assert res.rows[0].stderr == pytest.approx(
            np.std(samples, ddof=1) / math.sqrt(len(samples)), rel=1e-12
        )

    def test_energy_efficiency_uses_architecture_power(self, small_system):
        from fdiab.metrics import PowerModel, energy_efficiency, power_total

        spec = small_spec(small_system, values=[10.0], trials=2)
        sc = Scenario("fd", "hybrid", 4)
        res = run_sweep(spec, [sc])
        model = PowerModel(bits=4.0)
        p = power_total("hybrid", 8, 4, model) + power_total("hybrid", 4, 4, model)
        want = energy_efficiency(res.rows[0].mean_se_sum, p)
        assert res.rows[0].ee_bits_per_joule == pytest.approx(want, rel=1e-12)

    def test_spec_validation(self, small_system):
        with pytest.raises(ValueError):
            small_spec(small_system, axis="power")
        with pytest.raises(ValueError):
            small_spec(small_system, trials=0)
        with pytest.raises(ValueError):
            small_spec(small_system, values=[10.0, 0.0])
        with pytest.raises(ValueError):
            SweepSpec(axis="snr_db", values=[1.0], trials=1, system=None)
