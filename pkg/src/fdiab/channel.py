"""Wideband geometric MIMO channels: backhaul/access clusters-and-rays model,
raised-cosine tap sampling, per-subcarrier DFT, and the loopback
self-interference channel (near-field LOS + far-field NLOS, Rician mix).

All randomness flows through an explicitly passed numpy Generator, so every
operation here is a pure function of (inputs, seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

DEFAULT_ANGLE_SPREAD = math.radians(5.0)


@dataclass
class ChannelConfig:
    n_rx: int
    n_tx: int
    n_clusters: int = 4
    n_rays: int = 5  # rays per cluster
    n_taps: int = 20
    n_subcarriers: int = 64
    roll_off: float = 1.0
    sample_interval: float = 1.0 / 850e6
    tau_max: float | None = None  # defaults to (L-1) * T_s
    angle_spread: float = DEFAULT_ANGLE_SPREAD
    enforce_cp: bool = False
    cp_len: int = 5
    pitch_over_lambda: float = 0.5

    def __post_init__(self):
        for name in ("n_rx", "n_tx", "n_clusters", "n_rays", "n_taps", "n_subcarriers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.roll_off <= 1.0:
            raise ValueError("roll_off must be in [0, 1]")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.tau_max is None:
            cap = self.cp_len if self.enforce_cp else self.n_taps - 1
            self.tau_max = cap * self.sample_interval
        if self.enforce_cp and self.tau_max > self.cp_len * self.sample_interval:
            raise ValueError("tau_max exceeds the cyclic prefix with enforce_cp set")

    @property
    def gamma(self) -> float:
        return math.sqrt(self.n_rx * self.n_tx / (self.n_clusters * self.n_rays))


@dataclass
class RayCluster:
    """One cluster of rays: complex gains, delays (s), AoA/AoD (rad)."""

    alpha: np.ndarray
    tau: np.ndarray
    theta: np.ndarray  # angle of arrival
    phi: np.ndarray  # angle of departure

    def __post_init__(self):
        n = len(self.alpha)
        if not (len(self.tau) == len(self.theta) == len(self.phi) == n):
            raise ValueError("ray arrays must share length")


@dataclass
class TapChannel:
    taps: np.ndarray  # (L, n_rx, n_tx) complex
    sample_interval: float

    def __post_init__(self):
        if self.taps.ndim != 3:
            raise ValueError("taps must be a (L, n_rx, n_tx) array")

    @property
    def n_taps(self) -> int:
        return self.taps.shape[0]


@dataclass
class FreqChannel:
    subcarriers: np.ndarray  # (K, n_rx, n_tx) complex

    @property
    def n_subcarriers(self) -> int:
        return self.subcarriers.shape[0]


@dataclass
class SiGeometry:
    """Transmit/receive array geometry of the full-duplex transceiver.

    Two uniform linear arrays separated by d meters with an inter-array
    angle omega, plus the Rician factor kappa (linear) weighting the static
    near-field component against the stochastic far-field one.
    """

    d: float
    omega: float
    wavelength: float
    antenna_pitch: float | None = None  # defaults to lambda / 2
    kappa: float = 10.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("d must be positive")
        if not 0.0 < self.omega < math.pi:
            raise ValueError("omega must lie in (0, pi)")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.antenna_pitch is None:
            self.antenna_pitch = self.wavelength / 2.0


@dataclass
class ChannelSet:
    """The three per-subcarrier channels one trial operates on."""

    backhaul: FreqChannel
    access: FreqChannel
    si: FreqChannel


def raised_cosine(t, beta: float, ts: float):
    """Raised-cosine pulse p(t) with roll-off beta and interval ts.

    Total function: the removable singularities at |t| = ts/(2 beta) return
    the analytic limit (pi/4) * sinc(1/(2 beta)).
    """
    if ts <= 0:
        raise ValueError("ts must be positive")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must be in [0, 1]")
    out = kernels.raised_cosine_np(t, beta, ts)
    if np.isscalar(t):
        return float(out)
    return out


def array_response(n: int, angle: float, pitch_over_lambda: float = 0.5) -> np.ndarray:
    """ULA response (1/sqrt(n)) * exp(j 2 pi (d/lambda) m sin(angle)), m = 0..n-1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = np.arange(n)
    return np.exp(1j * 2.0 * np.pi * pitch_over_lambda * m * np.sin(angle)) / math.sqrt(n)


def draw_clusters(cfg: ChannelConfig, rng: np.random.Generator) -> list[RayCluster]:
    """Draw C clusters of R_c rays each.

    Gains are unit-variance circularly-symmetric complex Gaussian, cluster
    centers uniform on [-pi/2, pi/2], per-ray offsets Laplacian with scale
    cfg.angle_spread, and all rays of a cluster share the cluster delay
    (uniform on [0, tau_max]).
    """
    clusters = []
    for _ in range(cfg.n_clusters):
        center_aoa = rng.uniform(-np.pi / 2, np.pi / 2)
        center_aod = rng.uniform(-np.pi / 2, np.pi / 2)
        delay = rng.uniform(0.0, cfg.tau_max)
        alpha = (rng.standard_normal(cfg.n_rays) + 1j * rng.standard_normal(cfg.n_rays)) / math.sqrt(2.0)
        theta = center_aoa + rng.laplace(0.0, cfg.angle_spread, cfg.n_rays)
        phi = center_aod + rng.laplace(0.0, cfg.angle_spread, cfg.n_rays)
        tau = np.full(cfg.n_rays, delay)
        clusters.append(RayCluster(alpha=alpha, tau=tau, theta=theta, phi=phi))
    return clusters


def assemble_taps(clusters: list[RayCluster], cfg: ChannelConfig) -> TapChannel:
    """Sample the continuous cluster-ray response into L discrete tap matrices.

    H[l] = gamma * sum_rays alpha * p(l Ts - tau) * a_rx(theta) a_tx(phi)^*
    with gamma = sqrt(n_rx n_tx / (C R_c)).
    """
    if not clusters:
        raise ValueError("clusters must be nonempty")
    for c in clusters:
        if len(c.alpha) != cfg.n_rays:
            raise ValueError("cluster ray count does not match config")
    alpha = np.concatenate([c.alpha for c in clusters]).astype(np.complex128)
    tau = np.concatenate([c.tau for c in clusters]).astype(np.float64)
    theta = np.concatenate([c.theta for c in clusters]).astype(np.float64)
    phi = np.concatenate([c.phi for c in clusters]).astype(np.float64)
    taps = kernels.assemble_taps_kernel(
        alpha,
        tau,
        theta,
        phi,
        cfg.n_rx,
        cfg.n_tx,
        cfg.n_taps,
        cfg.sample_interval,
        cfg.roll_off,
        cfg.pitch_over_lambda,
        cfg.gamma,
    )
    return TapChannel(taps=taps, sample_interval=cfg.sample_interval)


def taps_to_subcarriers(taps: TapChannel, n_subcarriers: int) -> FreqChannel:
    """Length-K DFT of the zero-padded tap sequence: H[k] = sum_l H[l] e^{-j2pi kl/K}."""
    if n_subcarriers < taps.n_taps:
        raise ValueError("K must be >= number of taps")
    freq = np.fft.fft(taps.taps, n=n_subcarriers, axis=0)
    return FreqChannel(subcarriers=freq)


def si_distance_matrix(geom: SiGeometry, n_rx: int, n_tx: int) -> np.ndarray:
    """Pairwise TX/RX antenna distances d_pq from the law-of-cosines geometry."""
    q = np.arange(n_tx)[None, :]
    p = np.arange(n_rx)[:, None]
    a = geom.d / math.tan(geom.omega) + q * geom.antenna_pitch
    b = geom.d / math.sin(geom.omega) + p * geom.antenna_pitch
    d2 = a**2 + b**2 - 2.0 * a * b * math.cos(geom.omega)
    # clip tiny negative round-off before the square root
    return np.sqrt(np.maximum(d2, 0.0))


def los_si_matrix(geom: SiGeometry, n_rx: int, n_tx: int) -> np.ndarray:
    """Near-field LOS leakage matrix: entry (p,q) = (1/d_pq) exp(-j 2 pi d_pq / lambda)."""
    d = si_distance_matrix(geom, n_rx, n_tx)
    return np.exp(-1j * 2.0 * np.pi * d / geom.wavelength) / d


def si_channel(
    geom: SiGeometry,
    nlos: TapChannel,
    los_all_taps: bool = False,
    normalize_los: bool = True,
) -> TapChannel:
    """Rician aggregation of the static LOS leakage with the NLOS tap channel.

    The LOS term lands on tap 0 only (a static path has no excess delay)
    unless los_all_taps is set, which reproduces the literal per-tap sum.
    With normalize_los the LOS block is rescaled to the same average entry
    power as a unit-variance geometric channel (||H||_F^2 = n_rx * n_tx) so
    that kappa keeps its meaning as a LOS/NLOS power ratio.
    """
    n_rx, n_tx = nlos.taps.shape[1:]
    h_los = los_si_matrix(geom, n_rx, n_tx)
    if normalize_los:
        h_los = h_los * (math.sqrt(n_rx * n_tx) / np.linalg.norm(h_los))
    k = geom.kappa
    w_los = math.sqrt(k / (k + 1.0))
    w_nlos = math.sqrt(1.0 / (k + 1.0))
    taps = w_nlos * nlos.taps.copy()
    if los_all_taps:
        taps += w_los * h_los[None, :, :]
    else:
        taps[0] += w_los * h_los
    return TapChannel(taps=taps, sample_interval=nlos.sample_interval)


def draw_freq_channel(cfg: ChannelConfig, rng: np.random.Generator) -> FreqChannel:
    """Convenience: clusters -> taps -> subcarriers in one call."""
    taps = assemble_taps(draw_clusters(cfg, rng), cfg)
    return taps_to_subcarriers(taps, cfg.n_subcarriers)


def dump_taps_csv(taps: TapChannel, path) -> None:
    """Debug dump: tap-major, row-major, interleaved real/imag columns."""
    flat = taps.taps.reshape(taps.n_taps, -1)
    inter = np.empty((flat.shape[0], 2 * flat.shape[1]))
    inter[:, 0::2] = flat.real
    inter[:, 1::2] = flat.imag
    np.savetxt(path, inter, delimiter=",")
