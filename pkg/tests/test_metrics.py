import math

import numpy as np
import pytest

from fdiab.beamforming import BeamformerSet, LinkConfig, design_all, svd_digital_design
from fdiab.channel import ChannelConfig, ChannelSet, FreqChannel, draw_freq_channel
from fdiab.metrics import (
    LinkPowers,
    PowerModel,
    TrialResult,
    energy_efficiency,
    epsilon_rate,
    outage_probability,
    power_total,
    spectral_efficiency,
    upper_bound,
)
from fdiab.quantization import AdcModel


def scalar_channelset(h=1.0, k=1):
    one = np.full((k, 1, 1), h, dtype=complex)
    fc = FreqChannel(subcarriers=one)
    return ChannelSet(backhaul=fc, access=fc, si=FreqChannel(subcarriers=np.zeros_like(one)))


def scalar_beams(k=1):
    eye = np.ones((1, 1), dtype=complex)
    stack = np.ones((k, 1, 1), dtype=complex)
    return BeamformerSet(
        architecture="all-digital",
        f_rf_gnb=eye,
        f_rf_iab=eye,
        w_rf_iab=eye,
        w_rf_ue=eye,
        f_bb_gnb=stack,
        f_bb_iab=stack,
        w_bb_iab=stack,
        w_bb_ue=stack,
    )


def rand_system(seed=0, n=8, n_ue=4, k=8):
    cfg_b = ChannelConfig(n_rx=n, n_tx=n, n_taps=4, n_subcarriers=k, sample_interval=1.0)
    cfg_a = ChannelConfig(n_rx=n_ue, n_tx=n, n_taps=4, n_subcarriers=k, sample_interval=1.0)
    rng = np.random.default_rng(seed)
    h_b = draw_freq_channel(cfg_b, rng)
    h_a = draw_freq_channel(cfg_a, rng)
    h_si = draw_freq_channel(cfg_b, rng)
    return ChannelSet(backhaul=h_b, access=h_a, si=h_si)


class TestSpectralEfficiency:
    def test_scalar_awgn_is_shannon(self):
        channels = scalar_channelset()
        powers = LinkPowers(rho_a=3.0, rho_b=3.0, rho_s=0.0)
        adc = AdcModel.from_bits(math.inf)
        se = spectral_efficiency("backhaul", scalar_beams(), channels, powers, adc, "hd")
        assert se == pytest.approx(math.log2(1.0 + 3.0), rel=1e-12)

    def test_zero_channel_gives_zero(self):
        channels = scalar_channelset(h=0.0)
        powers = LinkPowers(rho_a=3.0, rho_b=3.0, rho_s=0.0)
        se = spectral_efficiency("access", scalar_beams(), channels, powers, AdcModel.from_bits(4), "fd")
        assert se == 0.0

    def test_svd_beams_meet_upper_bound(self):
        channels = rand_system(1)
        k = channels.backhaul.n_subcarriers
        dig = svd_digital_design(channels.backhaul, channels.access, 2, 2, 2)
        snr = 10.0
        beams = BeamformerSet(
            architecture="all-digital",
            f_rf_gnb=np.eye(8, dtype=complex),
            f_rf_iab=np.eye(8, dtype=complex),
            w_rf_iab=np.eye(8, dtype=complex),
            w_rf_ue=np.eye(4, dtype=complex),
            f_bb_gnb=dig.f_gnb,
            f_bb_iab=dig.f_iab,
            w_bb_iab=dig.w_iab,
            w_bb_ue=dig.w_ue,
        )
        powers = LinkPowers(rho_a=snr, rho_b=snr, rho_s=0.0)
        adc = AdcModel.from_bits(math.inf)
        se = spectral_efficiency("backhaul", beams, channels, powers, adc, "hd")
        want = upper_bound(channels.backhaul, snr, 2)
        assert se == pytest.approx(want, rel=1e-10)

    def test_designed_combiner_attains_bound_when_interference_free(self):
        channels = rand_system(2)
        powers = LinkPowers(rho_a=10.0, rho_b=10.0, rho_s=0.0)
        adc = AdcModel.from_bits(math.inf)
        cfg = LinkConfig(architecture="all-digital")
        beams = design_all(channels.backhaul, channels.access, channels.si, cfg, powers, adc)
        se = spectral_efficiency("backhaul", beams, channels, powers, adc, "hd")
        # the LMMSE baseband is information-lossless here, so the rate equals
        # the equal-power waterline on the same singular values
        assert se == pytest.approx(upper_bound(channels.backhaul, 10.0, 2), rel=1e-9)

    def test_interference_leak_reduces_backhaul_rate(self):
        channels = rand_system(3)
        adc = AdcModel.from_bits(math.inf)
        cfg = LinkConfig(architecture="all-digital")
        fd = LinkPowers(rho_a=10.0, rho_b=10.0, rho_s=1e4)
        beams = design_all(channels.backhaul, channels.access, channels.si, cfg, fd, adc)
        se_fd = spectral_efficiency("backhaul", beams, channels, fd, adc, "fd")
        se_quiet = spectral_efficiency(
            "backhaul", beams, channels, LinkPowers(rho_a=10.0, rho_b=10.0, rho_s=0.0), adc, "hd"
        )
        assert se_fd < se_quiet

    def test_quantization_reduces_rate_monotonically(self):
        channels = rand_system(4)
        powers = LinkPowers(rho_a=10.0, rho_b=10.0, rho_s=0.0)
        cfg = LinkConfig(architecture="all-digital")
        rates = []
        for bits in (1, 2, 4, 8, math.inf):
            adc = AdcModel.from_bits(bits)
            beams = design_all(channels.backhaul, channels.access, channels.si, cfg, powers, adc)
            rates.append(spectral_efficiency("access", beams, channels, powers, adc, "fd"))
        assert all(a < b for a, b in zip(rates, rates[1:]))

    def test_invalid_link_and_duplex_rejected(self):
        channels = scalar_channelset()
        powers = LinkPowers(rho_a=1.0, rho_b=1.0)
        with pytest.raises(ValueError):
            spectral_efficiency("sidehaul", scalar_beams(), channels, powers, AdcModel.from_bits(4))
        with pytest.raises(ValueError):
            spectral_efficiency("access", scalar_beams(), channels, powers, AdcModel.from_bits(4), "tdd")


class TestUpperBound:
    def test_identity_channel_is_shannon(self):
        fc = FreqChannel(subcarriers=np.eye(1, dtype=complex)[None])
        assert upper_bound(fc, 5.0, 1) == pytest.approx(math.log2(6.0))

    def test_zero_snr_gives_zero(self):
        fc = FreqChannel(subcarriers=np.eye(4, dtype=complex)[None])
        assert upper_bound(fc, 0.0, 2) == 0.0

    def test_matches_direct_singular_value_sum(self):
        rng = np.random.default_rng(5)
        h = rng.standard_normal((2, 4, 4)) + 1j * rng.standard_normal((2, 4, 4))
        fc = FreqChannel(subcarriers=h)
        snr, n_s, k = 7.0, 2, 2
        want = 0.0
        for kk in range(k):
            s = np.linalg.svd(h[kk], compute_uv=False)[:n_s]
            want += np.sum(np.log2(1.0 + snr / (k * n_s) * s**2))
        assert upper_bound(fc, snr, n_s) == pytest.approx(want / k, rel=1e-12)

    def test_stream_count_validated(self):
        fc = FreqChannel(subcarriers=np.eye(2, dtype=complex)[None])
        with pytest.raises(ValueError):
            upper_bound(fc, 1.0, 3)


class TestPowerModel:
    def test_rf_chain_power_from_device_table(self):
        assert PowerModel().rho_rf == pytest.approx(40.8e-3, rel=1e-12)

    def test_adc_power(self):
        m = PowerModel(bits=4)
        assert m.rho_adc == pytest.approx(5e-15 * 850e6 * 16, rel=1e-12)
        assert PowerModel(bits=math.inf).rho_adc == math.inf

    def test_all_digital_total(self):
        m = PowerModel(bits=4)
        want = 64 * (39e-3 + 40.8e-3 + 2 * 5e-15 * 850e6 * 16)
        got = power_total("all-digital", 64, 4, m)
        assert got == pytest.approx(want, rel=1e-9)
        assert got == pytest.approx(5.115904, rel=1e-9)

    def test_hybrid_total(self):
        m = PowerModel(bits=4)
        rho_adc = 5e-15 * 850e6 * 16
        want = 64 * (39e-3 + 19.5e-3 + 4 * 2e-3) + 4 * (40.8e-3 + 19.5e-3 + 2 * rho_adc)
        got = power_total("hybrid", 64, 4, m)
        assert got == pytest.approx(want, rel=1e-9)
        assert got == pytest.approx(4.497744, rel=1e-9)

    def test_unknown_architecture_rejected(self):
        with pytest.raises(ValueError):
            power_total("analog", 4, 4, PowerModel())


class TestEnergyEfficiency:
    def test_simple_quotient(self):
        assert energy_efficiency(10.0, 2.0) == 5.0
        assert energy_efficiency(0.0, 2.0) == 0.0

    def test_composition_with_power_model(self):
        se = math.log2(1.0 + 3.0)
        p = power_total("hybrid", 64, 4, PowerModel(bits=4))
        assert energy_efficiency(se, p) == pytest.approx(se / p, rel=1e-12)

    def test_nonpositive_power_rejected(self):
        with pytest.raises(ValueError):
            energy_efficiency(1.0, 0.0)


class TestOutageAndEpsilonRate:
    def test_counting(self):
        assert outage_probability([1.0, 2.0, 3.0], 2.5) == pytest.approx(2.0 / 3.0)
        assert outage_probability([1.0, 2.0, 3.0], 0.0) == 0.0
        assert outage_probability([1.0, 2.0, 3.0], 5.0) == 1.0

    def test_epsilon_rate_order_statistics(self):
        assert epsilon_rate([1.0, 2.0, 3.0, 4.0], 0.0) == 1.0
        assert epsilon_rate([1.0, 2.0, 3.0, 4.0], 0.25) == 2.0
        assert epsilon_rate([1.0, 2.0, 3.0, 4.0], 0.999) == 4.0

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(6)
        samples = rng.uniform(0.0, 10.0, 10)
        for eps in (0.0, 0.05, 0.1, 0.3, 0.5, 0.9):
            candidates = [
                z for z in samples if np.mean(samples < z) <= eps
            ]
            want = max(candidates)
            assert epsilon_rate(samples, eps) == pytest.approx(want, rel=1e-12)
        for rate in np.linspace(0.0, 11.0, 23):
            want = np.sum(samples < rate) / samples.size
            assert outage_probability(samples, rate) == pytest.approx(want, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            outage_probability([], 1.0)
        with pytest.raises(ValueError):
            epsilon_rate([1.0], 1.0)


def test_trial_result_rejects_negative_rates():
    with pytest.raises(ValueError):
        TrialResult(se_backhaul=-1.0, se_access=0.0, se_sum=-1.0, se_bound_backhaul=0.0, se_bound_access=0.0)
