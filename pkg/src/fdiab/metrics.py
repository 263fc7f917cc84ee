"""Link metrics: spectral efficiency of the quantized links, the
interference-free upper bound, receiver power models and energy efficiency,
and empirical outage statistics.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamformerSet, rq_iab_stack, rq_ue_stack
from .channel import ChannelSet, FreqChannel
from .quantization import AdcModel

LN2 = math.log(2.0)


@dataclass
class LinkPowers:
    rho_a: float
    rho_b: float
    rho_s: float = 0.0
    noise_var: float = 1.0

    def __post_init__(self):
        if min(self.rho_a, self.rho_b, self.rho_s) < 0:
            raise ValueError("powers must be nonnegative")
        if self.noise_var <= 0:
            raise ValueError("noise_var must be positive")

    @property
    def snr_a(self) -> float:
        return self.rho_a / self.noise_var

    @property
    def snr_b(self) -> float:
        return self.rho_b / self.noise_var

    @property
    def sir(self) -> float:
        return self.rho_a / self.rho_s if self.rho_s > 0 else math.inf


@dataclass
class PowerModel:
    """Receiver device powers (Watts) and the ADC energy/step/Hz figure."""

    lna: float = 39e-3
    splitter: float = 19.5e-3
    combiner: float = 19.5e-3
    phase_shifter: float = 2e-3
    mixer: float = 16.8e-3
    local_osc: float = 5e-3
    lpf: float = 14e-3
    bb_amp: float = 5e-3
    adc_energy: float = 5e-15  # J/step/Hz, low-power ADC scenario
    bandwidth: float = 850e6
    bits: float = 4

    def __post_init__(self):
        for name in ("lna", "splitter", "combiner", "phase_shifter", "mixer",
                     "local_osc", "lpf", "bb_amp", "adc_energy", "bandwidth"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def rho_rf(self) -> float:
        return self.mixer + self.local_osc + self.lpf + self.bb_amp

    @property
    def rho_adc(self) -> float:
        if self.bits == math.inf:
            return math.inf
        return self.adc_energy * self.bandwidth * 2.0**self.bits


@dataclass
class TrialResult:
    se_backhaul: float
    se_access: float
    se_sum: float
    se_bound_backhaul: float
    se_bound_access: float
    duplex: str = "fd"
    architecture: str = "hybrid"
    bits: float = math.inf

    def __post_init__(self):
        if min(self.se_backhaul, self.se_access, self.se_sum) < -1e-12:
            raise ValueError("spectral efficiencies must be nonnegative")


def _logdet_ratio(cn: np.ndarray, sig: np.ndarray) -> float:
    """log2 det(I + Cn^{-1} S) via logdet(Cn + S) - logdet(Cn), both HPD."""
    sign, logdet_n = np.linalg.slogdet(cn)
    if sign == 0:
        warnings.warn("singular effective noise covariance; regularizing", RuntimeWarning)
        cn = cn + 1e-12 * np.eye(cn.shape[0])
        _, logdet_n = np.linalg.slogdet(cn)
    _, logdet_t = np.linalg.slogdet(cn + sig)
    return float((logdet_t - logdet_n).real) / LN2


def spectral_efficiency(
    link: str,
    beams: BeamformerSet,
    channels: ChannelSet,
    powers: LinkPowers,
    adc: AdcModel,
    duplex: str = "fd",
) -> float:
    """Per-link achievable rate in bits/s/Hz, averaged over subcarriers.

    Gaussian-signaling log-det with effective noise aggregating thermal
    noise through the full combiner chain, quantization noise through the
    baseband combiner, and (full-duplex backhaul only) the residual
    self-interference.  Symbol covariance is I/(K n_s); the duplex
    time-sharing factor is NOT applied here.
    """
    if link not in ("backhaul", "access"):
        raise ValueError(f"unknown link {link!r}")
    if duplex not in ("fd", "hd"):
        raise ValueError(f"unknown duplex {duplex!r}")
    alpha = adc.alpha
    sigma2 = powers.noise_var
    k_sub = channels.backhaul.n_subcarriers
    n_s_iab = beams.n_s_iab
    n_s_gnb = beams.n_s_gnb

    if link == "access":
        w_full = beams.w_rf_ue[None] @ beams.w_bb_ue
        f_full = beams.f_rf_iab[None] @ beams.f_bb_iab
        h = channels.access.subcarriers
        w_bb = beams.w_bb_ue
        rq = None
        if not adc.infinite:
            rq = rq_ue_stack(
                channels.access,
                beams.w_rf_ue,
                beams.f_rf_iab,
                beams.f_bb_iab,
                powers.rho_a / (k_sub * n_s_iab),
                alpha,
            )
        sig_scale = powers.rho_a * alpha**2 / (k_sub * n_s_iab)
    else:
        w_full = beams.w_rf_iab[None] @ beams.w_bb_iab
        f_full = beams.f_rf_gnb[None] @ beams.f_bb_gnb
        h = channels.backhaul.subcarriers
        w_bb = beams.w_bb_iab
        rq = None
        if not adc.infinite:
            w_ue_full = beams.w_rf_ue[None] @ beams.w_bb_ue
            rq = rq_iab_stack(
                channels.backhaul,
                channels.si,
                channels.access,
                beams.w_rf_iab,
                beams.f_rf_gnb,
                beams.f_bb_gnb,
                beams.f_rf_iab,
                beams.f_bb_iab,
                w_ue_full,
                powers.rho_b / (k_sub * n_s_gnb),
                (powers.rho_s / (k_sub * n_s_iab)) if duplex == "fd" else 0.0,
                alpha,
                beams.si_quant_coupling,
            )
        sig_scale = powers.rho_b * alpha**2 / (k_sub * n_s_gnb)

    heff = np.conj(np.transpose(w_full, (0, 2, 1))) @ h @ f_full
    cn = alpha**2 * sigma2 * (np.conj(np.transpose(w_full, (0, 2, 1))) @ w_full)
    if rq is not None:
        cn = cn + np.conj(np.transpose(w_bb, (0, 2, 1))) @ rq @ w_bb
    if link == "backhaul" and duplex == "fd" and powers.rho_s > 0:
        f_si = beams.f_rf_iab[None] @ beams.f_bb_iab
        leak = np.conj(np.transpose(w_full, (0, 2, 1))) @ channels.si.subcarriers @ f_si
        cn = cn + (powers.rho_s * alpha**2 / (k_sub * n_s_iab)) * (
            leak @ np.conj(np.transpose(leak, (0, 2, 1)))
        )

    se = 0.0
    for k in range(k_sub):
        sig = sig_scale * (heff[k] @ heff[k].conj().T)
        se += _logdet_ratio(cn[k], sig)
    return max(se / k_sub, 0.0)


def upper_bound(channel: FreqChannel, snr: float, n_s: int) -> float:
    """Interference-free infinite-resolution bound from the per-subcarrier
    singular values with the uniform SNR/(K n_s) power split (bits/s/Hz)."""
    h = channel.subcarriers
    if n_s > min(h.shape[1:]):
        raise ValueError("n_s exceeds channel dimension")
    k_sub = h.shape[0]
    svals = np.linalg.svd(h, compute_uv=False)[:, :n_s]
    return float(np.sum(np.log2(1.0 + (snr / (k_sub * n_s)) * svals**2)) / k_sub)


def power_total(arch: str, n_rx: int, n_rf: int, model: PowerModel) -> float:
    """Total receive-chain power consumption in Watts."""
    if n_rx < 1 or n_rf < 1:
        raise ValueError("counts must be >= 1")
    if arch == "all-digital":
        return n_rx * (model.lna + model.rho_rf + 2.0 * model.rho_adc)
    if arch == "hybrid":
        return n_rx * (model.lna + model.splitter + n_rf * model.phase_shifter) + n_rf * (
            model.rho_rf + model.combiner + 2.0 * model.rho_adc
        )
    raise ValueError(f"unknown architecture {arch!r}")


def energy_efficiency(se: float, p_total: float) -> float:
    """bits/s/Hz per Watt; infinite power (infinite-resolution ADC) gives 0."""
    if p_total <= 0:
        raise ValueError("p_total must be positive")
    return se / p_total


def outage_probability(se_samples, rate: float) -> float:
    """Empirical P[SE < rate] (strict)."""
    s = np.asarray(se_samples, dtype=np.float64)
    if s.size == 0:
        raise ValueError("se_samples must be nonempty")
    return float(np.mean(s < rate))


def epsilon_rate(se_samples, epsilon: float) -> float:
    """Largest rate whose strict-below outage fraction stays <= epsilon
    (a plain order statistic of the sample, no interpolation)."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must be in [0, 1)")
    s = np.sort(np.asarray(se_samples, dtype=np.float64))
    if s.size == 0:
        raise ValueError("se_samples must be nonempty")
    below = np.searchsorted(s, s, side="left") / s.size
    return float(s[below <= epsilon].max())
