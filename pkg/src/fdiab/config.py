"""Run configuration: TOML-compatible key-value files with dotted sections,
command-line overrides, and validated defaults matching the reference
system parameters (850 MHz bandwidth at 28 GHz, 64 antennas at gNB/IAB,
8 at the UE, 4 RF chains, 2 streams, 40 dB SI power, roll-off 1,
20 delay taps, CP 5).
"""
from __future__ import annotations

import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass

from .beamforming import LinkConfig
from .channel import ChannelConfig, SiGeometry
from .metrics import PowerModel
from .montecarlo import Scenario, SweepSpec, SystemConfig, TrialConfig

SPEED_OF_LIGHT = 299792458.0

SCENARIO_TOKENS = {
    "fd-hyb": ("fd", "hybrid"),
    "fd-dig": ("fd", "all-digital"),
    "hd-hyb": ("hd", "hybrid"),
    "hd-dig": ("hd", "all-digital"),
    "bound": ("fd", "bound"),
}


class ConfigError(Exception):
    pass


DEFAULTS = {
    "channel.K": 64,
    "channel.taps": 20,
    "channel.cp": 5,
    "channel.enforce_cp": False,
    "channel.clusters": 4,
    "channel.rays": 5,
    "channel.angle_spread_deg": 5.0,
    "channel.roll_off": 1.0,
    "system.bandwidth_hz": 850e6,
    "system.carrier_hz": 28e9,
    "system.n_ant_gnb": 64,
    "system.n_ant_iab": 64,
    "system.n_ant_ue": 8,
    "system.n_rf": 4,
    "system.n_streams": 2,
    "system.noise_var": 1.0,
    "si.power_db": 40.0,
    "si.kappa": 10.0,
    "si.d_over_lambda": 2.0,
    "si.omega_deg": 90.0,
    "si.los_all_taps": False,
    "si.normalize_los": True,
    "si.quant_coupling": "physical",
    "beams.oversampling": 4,
    "adc.bits": 4.0,  # positive integer or inf
    "sweep.trials": 500,
    "sweep.seed": 0,
    "sweep.snr_db": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
    "sweep.bits": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
    "sweep.fixed_snr_db": 10.0,
    "sweep.outage_rate": 1.0,
    "sweep.epsilon": 0.05,
    "power.lna": 39e-3,
    "power.splitter": 19.5e-3,
    "power.combiner": 19.5e-3,
    "power.phase_shifter": 2e-3,
    "power.mixer": 16.8e-3,
    "power.local_osc": 5e-3,
    "power.lpf": 14e-3,
    "power.bb_amp": 5e-3,
    "power.adc_energy": 5e-15,
}


def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _coerce(key: str, value):
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{key} must be a list of numbers, got {value!r}")
        return [float(v) for v in value]
    raise ConfigError(f"unsupported default type for {key}")


def _validate(values: dict) -> None:
    def check(cond, msg):
        if not cond:
            raise ConfigError(msg)

    check(values["channel.K"] >= 1, "channel.K must be >= 1")
    check(values["channel.taps"] >= 1, "channel.taps must be >= 1")
    check(values["channel.K"] >= values["channel.taps"], "channel.K must be >= channel.taps")
    check(values["channel.cp"] >= 1, "channel.cp must be >= 1")
    check(values["channel.clusters"] >= 1, "channel.clusters must be >= 1")
    check(values["channel.rays"] >= 1, "channel.rays must be >= 1")
    check(0.0 <= values["channel.roll_off"] <= 1.0, "channel.roll_off must be in [0, 1]")
    for key in ("system.bandwidth_hz", "system.carrier_hz", "system.noise_var"):
        check(values[key] > 0, f"{key} must be positive")
    for key in ("system.n_ant_gnb", "system.n_ant_iab", "system.n_ant_ue", "system.n_rf", "system.n_streams"):
        check(values[key] >= 1, f"{key} must be >= 1")
    check(
        values["system.n_streams"] <= values["system.n_rf"],
        "system.n_streams must be <= system.n_rf",
    )
    check(values["si.kappa"] >= 0, "si.kappa must be >= 0")
    check(0.0 < values["si.omega_deg"] < 180.0, "si.omega_deg must lie in (0, 180)")
    check(values["si.d_over_lambda"] > 0, "si.d_over_lambda must be positive")
    check(
        values["si.quant_coupling"] in ("physical", "verbatim"),
        "si.quant_coupling must be 'physical' or 'verbatim'",
    )
    check(values["beams.oversampling"] >= 1, "beams.oversampling must be >= 1")
    bits = values["adc.bits"]
    check(
        bits == math.inf or (bits >= 1 and bits == int(bits)),
        "adc.bits must be a positive integer or inf",
    )
    check(values["sweep.trials"] >= 1, "sweep.trials must be >= 1")
    check(0.0 <= values["sweep.epsilon"] < 1.0, "sweep.epsilon must lie in [0, 1)")
    for key in ("sweep.snr_db", "sweep.bits"):
        check(len(values[key]) > 0, f"{key} must be nonempty")
        check(list(values[key]) == sorted(values[key]), f"{key} must be sorted ascending")
    for key, val in values.items():
        if key.startswith("power."):
            check(val >= 0, f"{key} must be nonnegative")


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, key: str):
        return self.values[key]

    def system_config(self) -> SystemConfig:
        v = self.values
        t_s = 1.0 / v["system.bandwidth_hz"]
        wavelength = SPEED_OF_LIGHT / v["system.carrier_hz"]
        common = dict(
            n_clusters=v["channel.clusters"],
            n_rays=v["channel.rays"],
            n_taps=v["channel.taps"],
            n_subcarriers=v["channel.K"],
            roll_off=v["channel.roll_off"],
            sample_interval=t_s,
            angle_spread=math.radians(v["channel.angle_spread_deg"]),
            enforce_cp=v["channel.enforce_cp"],
            cp_len=v["channel.cp"],
        )
        try:
            backhaul = ChannelConfig(n_rx=v["system.n_ant_iab"], n_tx=v["system.n_ant_gnb"], **common)
            access = ChannelConfig(n_rx=v["system.n_ant_ue"], n_tx=v["system.n_ant_iab"], **common)
            si = ChannelConfig(n_rx=v["system.n_ant_iab"], n_tx=v["system.n_ant_iab"], **common)
            geom = SiGeometry(
                d=v["si.d_over_lambda"] * wavelength,
                omega=math.radians(v["si.omega_deg"]),
                wavelength=wavelength,
                kappa=v["si.kappa"],
            )
            link = LinkConfig(
                n_rf_gnb=v["system.n_rf"],
                n_rf_iab=v["system.n_rf"],
                n_rf_ue=v["system.n_rf"],
                n_s_gnb=v["system.n_streams"],
                n_s_iab=v["system.n_streams"],
                n_s_ue=v["system.n_streams"],
                oversampling=v["beams.oversampling"],
                si_quant_coupling=v["si.quant_coupling"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return SystemConfig(
            backhaul=backhaul,
            access=access,
            si=si,
            si_geom=geom,
            link=link,
            los_all_taps=v["si.los_all_taps"],
            normalize_los=v["si.normalize_los"],
        )

    def power_model(self) -> PowerModel:
        v = self.values
        return PowerModel(
            lna=v["power.lna"],
            splitter=v["power.splitter"],
            combiner=v["power.combiner"],
            phase_shifter=v["power.phase_shifter"],
            mixer=v["power.mixer"],
            local_osc=v["power.local_osc"],
            lpf=v["power.lpf"],
            bb_amp=v["power.bb_amp"],
            adc_energy=v["power.adc_energy"],
            bandwidth=v["system.bandwidth_hz"],
            bits=v["adc.bits"],
        )

    def sweep_spec(self, axis: str, trials: int | None = None, seed: int | None = None) -> SweepSpec:
        v = self.values
        values = v["sweep.snr_db"] if axis == "snr_db" else v["sweep.bits"]
        return SweepSpec(
            axis=axis,
            values=list(values),
            trials=trials if trials is not None else v["sweep.trials"],
            base_seed=seed if seed is not None else v["sweep.seed"],
            system=self.system_config(),
            snr_db=v["sweep.fixed_snr_db"],
            si_power_db=v["si.power_db"],
            noise_var=v["system.noise_var"],
            power=self.power_model(),
            outage_rate=v["sweep.outage_rate"],
            epsilon=v["sweep.epsilon"],
        )

    def trial_config(self, snr_db: float | None = None) -> TrialConfig:
        v = self.values
        return TrialConfig(
            system=self.system_config(),
            snr_db=snr_db if snr_db is not None else v["sweep.fixed_snr_db"],
            si_power_db=v["si.power_db"],
            noise_var=v["system.noise_var"],
        )

    def scenarios(self, tokens: str) -> list[Scenario]:
        out = []
        for token in tokens.split(","):
            token = token.strip()
            if token not in SCENARIO_TOKENS:
                raise ConfigError(
                    f"unknown scenario {token!r}; expected one of {', '.join(SCENARIO_TOKENS)}"
                )
            duplex, arch = SCENARIO_TOKENS[token]
            bits = math.inf if arch == "bound" else self.values["adc.bits"]
            out.append(Scenario(duplex=duplex, architecture=arch, adc_bits=bits))
        return out


def parse_config(path=None, overrides=()) -> RunConfig:
    """Load a TOML config file (all keys optional) and apply key=value
    overrides on top; every value is validated before any trial runs."""
    values = dict(DEFAULTS)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                tree = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}")
        for key, value in _flatten(tree).items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, value)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            value = tomllib.loads(f"v = {raw.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw.strip()
        values[key] = _coerce(key, value)
    _validate(values)
    return RunConfig(values=values)
