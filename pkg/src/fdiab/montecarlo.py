"""Seeded Monte Carlo trials and sweeps.

One trial draws fresh backhaul/access/SI channels, designs beamformers for
the requested scenario, and evaluates all metrics.  Trial t of a sweep uses
seed base_seed + t, and the drawn channels are shared by every scenario and
axis value at that trial index, so scenario comparisons are paired and
results are independent of worker count and execution order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .beamforming import LinkConfig, design_all
from .channel import (
    ChannelConfig,
    ChannelSet,
    SiGeometry,
    assemble_taps,
    draw_clusters,
    si_channel,
    taps_to_subcarriers,
)
from .metrics import (
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
from .quantization import AdcModel

_ARCHS = ("all-digital", "hybrid", "bound")


@dataclass(frozen=True)
class Scenario:
    duplex: str  # "fd" | "hd"
    architecture: str  # "all-digital" | "hybrid" | "bound"
    adc_bits: float = math.inf
    include_bound: bool = True

    def __post_init__(self):
        if self.duplex not in ("fd", "hd"):
            raise ValueError(f"unknown duplex {self.duplex!r}")
        if self.architecture not in _ARCHS:
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def tag(self) -> str:
        bits = "inf" if self.adc_bits == math.inf else str(int(self.adc_bits))
        return f"{self.duplex}:{self.architecture}:b{bits}"


@dataclass
class SystemConfig:
    backhaul: ChannelConfig
    access: ChannelConfig
    si: ChannelConfig  # NLOS part of the self-interference channel
    si_geom: SiGeometry
    link: LinkConfig
    los_all_taps: bool = False
    normalize_los: bool = True


@dataclass
class TrialConfig:
    system: SystemConfig
    snr_db: float = 10.0
    si_power_db: float = 40.0  # rho_s / rho_a in dB
    noise_var: float = 1.0


@dataclass
class SweepSpec:
    axis: str  # "snr_db" | "bits"
    values: list
    trials: int
    base_seed: int = 0
    system: SystemConfig = None
    snr_db: float = 10.0  # fixed SNR when sweeping bits
    si_power_db: float = 40.0
    noise_var: float = 1.0
    power: PowerModel = field(default_factory=PowerModel)
    outage_rate: float = 1.0
    epsilon: float = 0.05

    def __post_init__(self):
        if self.axis not in ("snr_db", "bits"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.values) == 0:
            raise ValueError("values must be nonempty")
        if list(self.values) != sorted(self.values):
            raise ValueError("values must be sorted ascending")
        if self.system is None:
            raise ValueError("system config is required")


@dataclass
class SweepRow:
    axis_name: str
    axis_value: float
    duplex: str
    architecture: str
    bits: float
    mean_se_sum: float
    mean_se_backhaul: float
    mean_se_access: float
    stderr: float
    bound_sum: float
    ee_bits_per_joule: float
    outage_p: float
    eps_rate: float


@dataclass
class SweepResult:
    axis_name: str
    rows: list
    samples: dict  # (axis_value, scenario tag) -> array of per-trial sum SE


class TrialContext:
    """Channels and reusable design stages for one realization (one seed)."""

    def __init__(self, seed: int, system: SystemConfig):
        self.seed = seed
        self.system = system
        rng = np.random.default_rng(seed)
        # fixed draw order so every scenario sees the same channels
        hb = taps_to_subcarriers(
            assemble_taps(draw_clusters(system.backhaul, rng), system.backhaul),
            system.backhaul.n_subcarriers,
        )
        ha = taps_to_subcarriers(
            assemble_taps(draw_clusters(system.access, rng), system.access),
            system.access.n_subcarriers,
        )
        nlos = assemble_taps(draw_clusters(system.si, rng), system.si)
        si = taps_to_subcarriers(
            si_channel(system.si_geom, nlos, system.los_all_taps, system.normalize_los),
            system.si.n_subcarriers,
        )
        self.channels = ChannelSet(backhaul=hb, access=ha, si=si)
        self._stage_cache: dict = {}

    def evaluate(self, scenario: Scenario, snr_db: float, si_power_db: float, noise_var: float) -> TrialResult:
        link = self.system.link
        rho = 10.0 ** (snr_db / 10.0) * noise_var
        snr = rho / noise_var
        ub_b = upper_bound(self.channels.backhaul, snr, link.n_s_gnb)
        ub_a = upper_bound(self.channels.access, snr, link.n_s_iab)
        if scenario.architecture == "bound":
            return TrialResult(
                se_backhaul=ub_b,
                se_access=ub_a,
                se_sum=ub_b + ub_a,
                se_bound_backhaul=ub_b,
                se_bound_access=ub_a,
                duplex=scenario.duplex,
                architecture="bound",
                bits=math.inf,
            )
        rho_s = rho * 10.0 ** (si_power_db / 10.0) if scenario.duplex == "fd" else 0.0
        powers = LinkPowers(rho_a=rho, rho_b=rho, rho_s=rho_s, noise_var=noise_var)
        adc = AdcModel.from_bits(scenario.adc_bits)
        cfg = replace(link, architecture=scenario.architecture)
        beams = design_all(
            self.channels.backhaul,
            self.channels.access,
            self.channels.si,
            cfg,
            powers,
            adc,
            stage_cache=self._stage_cache,
        )
        se_b = spectral_efficiency("backhaul", beams, self.channels, powers, adc, scenario.duplex)
        se_a = spectral_efficiency("access", beams, self.channels, powers, adc, scenario.duplex)
        factor = 0.5 if scenario.duplex == "hd" else 1.0
        return TrialResult(
            se_backhaul=factor * se_b,
            se_access=factor * se_a,
            se_sum=factor * (se_b + se_a),
            se_bound_backhaul=ub_b,
            se_bound_access=ub_a,
            duplex=scenario.duplex,
            architecture=scenario.architecture,
            bits=scenario.adc_bits,
        )


def run_trial(seed: int, scenario: Scenario, cfg: TrialConfig) -> TrialResult:
    """One seeded realization; deterministic in (seed, scenario, cfg)."""
    try:
        ctx = TrialContext(seed, cfg.system)
        return ctx.evaluate(scenario, cfg.snr_db, cfg.si_power_db, cfg.noise_var)
    except Exception as exc:
        raise RuntimeError(f"trial with seed {seed} failed: {exc}") from exc


def _sweep_cells(spec: SweepSpec, scenarios):
    for value in spec.values:
        for sc in scenarios:
            if spec.axis == "bits" and sc.architecture != "bound":
                yield value, replace(sc, adc_bits=value)
            else:
                yield value, sc


def _run_trial_block(spec: SweepSpec, scenarios, t: int):
    ctx = TrialContext(spec.base_seed + t, spec.system)
    out = []
    for value, sc in _sweep_cells(spec, scenarios):
        snr_db = value if spec.axis == "snr_db" else spec.snr_db
        try:
            out.append(ctx.evaluate(sc, snr_db, spec.si_power_db, spec.noise_var))
        except Exception as exc:
            raise RuntimeError(
                f"sweep cell ({spec.axis}={value}, {sc.tag}, seed {spec.base_seed + t}) failed: {exc}"
            ) from exc
    return out


def run_sweep(spec: SweepSpec, scenarios, workers: int = 1) -> SweepResult:
    """Run trials x (axis values x scenarios) and aggregate.

    Trials are embarrassingly parallel; aggregation is a deterministic
    reduction in trial order, so any worker count reproduces the
    sequential result exactly.
    """
    scenarios = list(scenarios)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(
                pool.map(_run_trial_block, [spec] * spec.trials, [scenarios] * spec.trials, range(spec.trials))
            )
    else:
        per_trial = [_run_trial_block(spec, scenarios, t) for t in range(spec.trials)]

    cells = list(_sweep_cells(spec, scenarios))
    rows = []
    samples = {}
    for i, (value, sc) in enumerate(cells):
        results = [per_trial[t][i] for t in range(spec.trials)]
        se_sum = np.array([r.se_sum for r in results])
        se_b = np.array([r.se_backhaul for r in results])
        se_a = np.array([r.se_access for r in results])
        bound = np.array([r.se_bound_backhaul + r.se_bound_access for r in results])
        stderr = float(np.std(se_sum, ddof=1) / math.sqrt(len(se_sum))) if len(se_sum) > 1 else 0.0
        bits = results[0].bits
        if sc.architecture == "bound":
            ee = 0.0
        else:
            model = replace(spec.power, bits=bits)
            link = spec.system.link
            p_total = power_total(
                sc.architecture, spec.system.backhaul.n_rx, link.n_rf_iab, model
            ) + power_total(sc.architecture, spec.system.access.n_rx, link.n_rf_ue, model)
            ee = energy_efficiency(float(np.mean(se_sum)), p_total)
        rows.append(
            SweepRow(
                axis_name=spec.axis,
                axis_value=value,
                duplex=sc.duplex,
                architecture=sc.architecture,
                bits=bits,
                mean_se_sum=float(np.mean(se_sum)),
                mean_se_backhaul=float(np.mean(se_b)),
                mean_se_access=float(np.mean(se_a)),
                stderr=stderr,
                bound_sum=float(np.mean(bound)),
                ee_bits_per_joule=ee,
                outage_p=outage_probability(se_sum, spec.outage_rate),
                eps_rate=epsilon_rate(se_sum, spec.epsilon),
            )
        )
        samples[(value, sc.tag)] = se_sum
    return SweepResult(axis_name=spec.axis, rows=rows, samples=samples)
