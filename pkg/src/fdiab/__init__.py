"""Link-level Monte Carlo simulator for a full-duplex wideband mmWave
integrated-access-and-backhaul link with low-resolution ADCs."""

from .beamforming import (
    BeamformerSet,
    Codebook,
    LinkConfig,
    design_all,
    dft_codebook,
    greedy_hybrid,
    greedy_select,
    lmmse_iab,
    lmmse_ue,
    pack,
    refine_combiner,
    subset_rate,
    svd_digital_design,
    unpack,
)
from .channel import (
    ChannelConfig,
    ChannelSet,
    FreqChannel,
    RayCluster,
    SiGeometry,
    TapChannel,
    array_response,
    assemble_taps,
    draw_clusters,
    draw_freq_channel,
    los_si_matrix,
    raised_cosine,
    si_channel,
    taps_to_subcarriers,
)
from .config import ConfigError, RunConfig, parse_config
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
from .montecarlo import (
    Scenario,
    SweepResult,
    SweepSpec,
    SystemConfig,
    TrialConfig,
    TrialContext,
    run_sweep,
    run_trial,
)
from .quantization import AdcModel, apply_aqnm, aqnm_cov_iab, aqnm_cov_ue, eta_of_bits

__version__ = "0.1.0"
