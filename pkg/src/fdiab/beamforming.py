"""Beamformer design: per-subcarrier SVD solutions, greedy dictionary
factorization into frequency-flat RF and per-subcarrier baseband matrices,
and the LMMSE digital combiners that absorb self-interference and
quantization noise.

All-digital mode runs the same pipeline with identity RF matrices and no
dictionary projection.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import FreqChannel, array_response
from .quantization import AdcModel, aqnm_cov_iab, aqnm_cov_ue


@dataclass
class Codebook:
    """Dictionary of candidate RF columns (unit-norm)."""

    columns: np.ndarray  # (antennas, words)

    def __post_init__(self):
        norms = np.linalg.norm(self.columns, axis=0)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("codebook columns must be unit-norm")

    @property
    def size(self) -> int:
        return self.columns.shape[1]


def dft_codebook(n_ant: int, oversampling: int = 4, pitch: float = 0.5) -> Codebook:
    """Array-response dictionary on a uniform sin-angle grid (oversampled DFT)."""
    n_words = n_ant * oversampling
    sines = -1.0 + 2.0 * np.arange(n_words) / n_words
    m = np.arange(n_ant)[:, None]
    cols = np.exp(1j * 2.0 * np.pi * pitch * m * sines[None, :]) / math.sqrt(n_ant)
    return Codebook(columns=cols)


@dataclass
class DigitalDesign:
    """Per-subcarrier all-digital SVD beamformers (orthonormal columns)."""

    f_gnb: np.ndarray  # (K, n_tx_b, ns_gnb) leading right singular vectors of H_b
    w_iab: np.ndarray  # (K, n_rx_b, ns_iab) leading left singular vectors of H_b
    f_iab: np.ndarray  # (K, n_tx_a, ns_iab) leading right singular vectors of H_a
    w_ue: np.ndarray  # (K, n_rx_a, ns_ue) leading left singular vectors of H_a


@dataclass
class LinkConfig:
    n_rf_gnb: int = 4
    n_rf_iab: int = 4
    n_rf_ue: int = 4
    n_s_gnb: int = 2
    n_s_iab: int = 2
    n_s_ue: int = 2
    architecture: str = "hybrid"  # "hybrid" | "all-digital"
    oversampling: int = 4
    si_quant_coupling: str = "physical"  # "physical" | "verbatim"

    def __post_init__(self):
        if self.architecture not in ("hybrid", "all-digital"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.si_quant_coupling not in ("physical", "verbatim"):
            raise ValueError(f"unknown si_quant_coupling {self.si_quant_coupling!r}")


@dataclass
class BeamformerSet:
    architecture: str
    f_rf_gnb: np.ndarray
    f_rf_iab: np.ndarray
    w_rf_iab: np.ndarray
    w_rf_ue: np.ndarray
    f_bb_gnb: np.ndarray  # (K, n_rf, n_s)
    f_bb_iab: np.ndarray
    w_bb_iab: np.ndarray
    w_bb_ue: np.ndarray
    si_quant_coupling: str = "physical"

    @property
    def n_s_gnb(self) -> int:
        return self.f_bb_gnb.shape[2]

    @property
    def n_s_iab(self) -> int:
        return self.f_bb_iab.shape[2]

    def dump(self, path) -> None:
        """Binary export of every matrix for offline inspection."""
        np.savez(
            path,
            architecture=self.architecture,
            f_rf_gnb=self.f_rf_gnb,
            f_rf_iab=self.f_rf_iab,
            w_rf_iab=self.w_rf_iab,
            w_rf_ue=self.w_rf_ue,
            f_bb_gnb=self.f_bb_gnb,
            f_bb_iab=self.f_bb_iab,
            w_bb_iab=self.w_bb_iab,
            w_bb_ue=self.w_bb_ue,
        )


def svd_digital_design(
    h_b: FreqChannel, h_a: FreqChannel, ns_gnb: int, ns_iab: int, ns_ue: int
) -> DigitalDesign:
    """Leading singular-vector beamformers on every subcarrier."""
    hb = h_b.subcarriers
    ha = h_a.subcarriers
    if not (np.all(np.isfinite(hb)) and np.all(np.isfinite(ha))):
        raise ValueError("non-finite channel input to SVD design")
    if ns_gnb > min(hb.shape[1:]) or ns_iab > min(hb.shape[1:]):
        raise ValueError("backhaul stream count exceeds channel rank budget")
    if ns_iab > min(ha.shape[1:]) or ns_ue > min(ha.shape[1:]):
        raise ValueError("access stream count exceeds channel rank budget")
    u_b, _, vh_b = np.linalg.svd(hb, full_matrices=False)
    u_a, _, vh_a = np.linalg.svd(ha, full_matrices=False)
    return DigitalDesign(
        f_gnb=np.conj(np.transpose(vh_b, (0, 2, 1)))[:, :, :ns_gnb],
        w_iab=u_b[:, :, :ns_iab],
        f_iab=np.conj(np.transpose(vh_a, (0, 2, 1)))[:, :, :ns_iab],
        w_ue=u_a[:, :, :ns_ue],
    )


def pack(matrices: np.ndarray) -> np.ndarray:
    """Horizontal concatenation of the K per-subcarrier matrices."""
    m = np.asarray(matrices)
    if m.ndim != 3:
        raise ValueError("expected a (K, rows, cols) stack")
    return np.concatenate(list(m), axis=1)


def unpack(wide: np.ndarray, n_subcarriers: int) -> np.ndarray:
    """Inverse of pack: split the wide matrix back into K blocks."""
    if wide.shape[1] % n_subcarriers != 0:
        raise ValueError("column count not divisible by K")
    return np.stack(np.split(wide, n_subcarriers, axis=1))


def greedy_select(target: np.ndarray, n_rf: int, codebook: Codebook):
    """Greedy dictionary factorization of a (packed) target matrix.

    Iteratively selects the codebook column most correlated with the current
    residual, then re-solves the least-squares baseband for the selected
    set.  Returns (indices, baseband); the residual
    ||target - columns[indices] @ baseband||_F is non-increasing in n_rf.
    Ties break toward the lowest codebook index.
    """
    a = codebook.columns
    if n_rf > a.shape[1]:
        raise ValueError("n_rf exceeds dictionary size")
    if n_rf < 1:
        raise ValueError("n_rf must be >= 1")
    selected: list[int] = []
    residual = target
    bb = None
    for _ in range(n_rf):
        corr = np.sum(np.abs(a.conj().T @ residual) ** 2, axis=1)
        if selected:
            corr[np.array(selected)] = -1.0
        selected.append(int(np.argmax(corr)))
        rf = a[:, selected]
        # lstsq falls back to the pseudo-inverse when rf is rank deficient
        bb = np.linalg.lstsq(rf, target, rcond=None)[0]
        residual = target - rf @ bb
    return selected, bb


def greedy_hybrid(target: np.ndarray, n_rf: int, codebook: Codebook):
    """Greedy factorization returning (rf, baseband) with rf columns drawn
    from the codebook; see greedy_select for the algorithm."""
    selected, bb = greedy_select(target, n_rf, codebook)
    return codebook.columns[:, selected], bb


def subset_rate(indices, g_sig, g_int, gram, rho_sig, rho_int):
    """Average per-subcarrier rate of a candidate receive-beam subset.

    g_sig[k] holds the beam-domain signal responses (dictionary^* H F)[k]
    and g_int the interference responses; gram is the dictionary Gram
    matrix, so gram[indices][:, indices] is the post-combining noise
    covariance for unit noise variance.  Interference enters as colored
    noise with per-stream power rho_int.
    """
    idx = list(indices)
    h_s = g_sig[:, idx, :]
    cov = gram[np.ix_(idx, idx)][None].copy()
    if g_int is not None and rho_int > 0.0:
        h_i = g_int[:, idx, :]
        cov = cov + rho_int * h_i @ np.conj(np.transpose(h_i, (0, 2, 1)))
    sol = np.linalg.solve(cov, h_s)
    n_s = h_s.shape[2]
    inner = np.eye(n_s) + rho_sig * np.conj(np.transpose(h_s, (0, 2, 1))) @ sol
    _, logdet = np.linalg.slogdet(inner)
    return float(logdet.sum() / math.log(2) / h_s.shape[0])


def refine_combiner(indices, codebook, g_sig, g_int, rho_sig, rho_int, max_passes=8):
    """Beam-swap local search maximizing the achievable rate of a hybrid
    receive combiner.

    Starting from the greedy selection, each pass tries replacing every
    selected beam with every unselected dictionary word and keeps the best
    improving swap per slot; the rate model treats residual interference as
    colored noise, so the search trades beamforming gain against
    interference leakage directly.  Deterministic and monotone; stops at a
    local optimum or after max_passes sweeps.
    """
    best = list(indices)
    gram = codebook.columns.conj().T @ codebook.columns
    current = subset_rate(best, g_sig, g_int, gram, rho_sig, rho_int)
    for _ in range(max_passes):
        improved = False
        for pos in range(len(best)):
            best_c, best_r = best[pos], current
            for c in range(codebook.size):
                if c in best:
                    continue
                trial = best.copy()
                trial[pos] = c
                r = subset_rate(trial, g_sig, g_int, gram, rho_sig, rho_int)
                if r > best_r + 1e-9:
                    best_r, best_c = r, c
            if best_c != best[pos]:
                best[pos] = best_c
                current = best_r
                improved = True
        if not improved:
            break
    return best


def lmmse_ue(h_bar, snr, alpha, n_rf, r_q, rho, n_s):
    """LMMSE baseband combiner for the interference-free receiver.

    W = (1/alpha) (Hb Hb^* + (n_rf/snr) I + R_q/(alpha^2 rho))^{-1} Hb,
    first n_s columns.  r_q may be None for infinite resolution.
    """
    gram = h_bar @ h_bar.conj().T
    return _lmmse_solve(gram, h_bar, snr, alpha, n_rf, r_q, rho, n_s)


def lmmse_iab(h_bar_b, h_bar_si, sir, snr_b, alpha_b, n_rf, r_q, rho_b, n_s):
    """LMMSE combiner at the full-duplex node; adds (1/SIR) Hsi Hsi^* inside
    the inverse to steer nulls onto the residual self-interference."""
    gram = h_bar_b @ h_bar_b.conj().T
    if np.isfinite(sir) and sir > 0:
        gram = gram + (1.0 / sir) * (h_bar_si @ h_bar_si.conj().T)
    return _lmmse_solve(gram, h_bar_b, snr_b, alpha_b, n_rf, r_q, rho_b, n_s)


def _lmmse_solve(gram, h_bar, snr, alpha, n_rf, r_q, rho, n_s):
    a = gram.astype(np.complex128, copy=True)
    if np.isfinite(snr):
        a += (n_rf / snr) * np.eye(a.shape[0])
    if r_q is not None and alpha < 1.0:
        a += r_q / (alpha**2 * rho)
    try:
        w = np.linalg.solve(a, h_bar)
    except np.linalg.LinAlgError:
        warnings.warn("singular LMMSE system; using pseudo-inverse", RuntimeWarning)
        w = np.linalg.pinv(a) @ h_bar
    return (w / alpha)[:, :n_s]


def _eff_stack(w_rf, h: FreqChannel, f_rf, f_bb) -> np.ndarray:
    """Per-subcarrier effective channel W_rf^* H[k] F_rf F_bb[k]."""
    f_full = f_rf[None] @ f_bb
    return w_rf.conj().T[None] @ h.subcarriers @ f_full


def rq_ue_stack(h_a, w_rf_ue, f_rf_iab, f_bb_iab, rho_a_eff, alpha):
    h_bar = _eff_stack(w_rf_ue, h_a, f_rf_iab, f_bb_iab)
    return np.stack([aqnm_cov_ue(h_bar[k], rho_a_eff, alpha) for k in range(h_bar.shape[0])])


def rq_iab_stack(
    h_b,
    h_si,
    h_a,
    w_rf_iab,
    f_rf_gnb,
    f_bb_gnb,
    f_rf_iab,
    f_bb_iab,
    w_ue_full,
    rho_b_eff,
    rho_s_eff,
    alpha,
    coupling,
):
    """AQNM covariance stack at the full-duplex node.

    coupling="physical" feeds the identity for the access factor so the SI
    quantization term reduces to the actual quantizer-input SI power;
    "verbatim" uses the full access effective channel as printed.
    """
    h_bar_b = _eff_stack(w_rf_iab, h_b, f_rf_gnb, f_bb_gnb)
    h_bar_si = _eff_stack(w_rf_iab, h_si, f_rf_iab, f_bb_iab)
    k_sub = h_bar_b.shape[0]
    n_s_iab = f_bb_iab.shape[2]
    out = []
    for k in range(k_sub):
        if rho_s_eff == 0.0:
            h_a_fac = np.eye(n_s_iab)
        elif coupling == "physical":
            h_a_fac = np.eye(n_s_iab)
        else:
            f_full = f_rf_iab @ f_bb_iab[k]
            h_a_fac = w_ue_full[k].conj().T @ h_a.subcarriers[k] @ f_full
        out.append(aqnm_cov_iab(h_bar_b[k], h_bar_si[k], h_a_fac, rho_b_eff, rho_s_eff, alpha))
    return np.stack(out)


def design_all(
    h_b: FreqChannel,
    h_a: FreqChannel,
    h_si: FreqChannel,
    cfg: LinkConfig,
    powers,
    adc: AdcModel,
    stage_cache: dict | None = None,
) -> BeamformerSet:
    """End-to-end beamformer design.

    SVD solutions per subcarrier; for the hybrid architecture these are
    packed, projected onto the codebook via the greedy factorization, and
    the precoders renormalized to meet the per-subcarrier power constraint;
    receive basebands are then replaced by the LMMSE combiners.  A caller
    may pass stage_cache (a dict) to reuse the SVD/greedy stages across
    repeated designs on the same channels.
    """
    cache = stage_cache if stage_cache is not None else {}
    k_sub = h_b.n_subcarriers
    if "svd" not in cache:
        cache["svd"] = svd_digital_design(h_b, h_a, cfg.n_s_gnb, cfg.n_s_iab, cfg.n_s_ue)
    dig = cache["svd"]

    if cfg.architecture == "hybrid" and cfg.n_rf_iab < cfg.n_s_iab + cfg.n_s_gnb:
        warnings.warn(
            "n_rf_iab < n_s_iab + n_s_gnb: not enough degrees of freedom to "
            "cancel self-interference",
            RuntimeWarning,
        )

    if cfg.architecture == "all-digital":
        n_tx_b = h_b.subcarriers.shape[2]
        n_rx_b = h_b.subcarriers.shape[1]
        n_tx_a = h_a.subcarriers.shape[2]
        n_rx_a = h_a.subcarriers.shape[1]
        f_rf_gnb = np.eye(n_tx_b, dtype=np.complex128)
        f_rf_iab = np.eye(n_tx_a, dtype=np.complex128)
        w_rf_iab = np.eye(n_rx_b, dtype=np.complex128)
        w_rf_ue = np.eye(n_rx_a, dtype=np.complex128)
        f_bb_gnb = dig.f_gnb
        f_bb_iab = dig.f_iab
    alpha = adc.alpha
    snr_a = powers.snr_a
    snr_b = powers.snr_b
    sir = powers.sir
    rho_a_eff = powers.rho_a / (k_sub * cfg.n_s_iab)
    rho_b_eff = powers.rho_b / (k_sub * cfg.n_s_gnb)
    rho_s_eff = powers.rho_s / (k_sub * cfg.n_s_iab)

    if cfg.architecture == "hybrid":
        if "ghb" not in cache:
            cb = {}
            for n in {
                h_b.subcarriers.shape[2],
                h_a.subcarriers.shape[2],
                h_b.subcarriers.shape[1],
                h_a.subcarriers.shape[1],
            }:
                cb[n] = dft_codebook(n, cfg.oversampling)
            f_rf_gnb, f_bb_gnb = _hybrid_precoder(dig.f_gnb, cfg.n_rf_gnb, cb, k_sub, cfg.n_s_gnb)
            f_rf_iab, f_bb_iab = _hybrid_precoder(dig.f_iab, cfg.n_rf_iab, cb, k_sub, cfg.n_s_iab)
            iab_sel, _ = greedy_select(pack(dig.w_iab), cfg.n_rf_iab, cb[h_b.subcarriers.shape[1]])
            w_rf_ue, _ = greedy_hybrid(pack(dig.w_ue), cfg.n_rf_ue, cb[h_a.subcarriers.shape[1]])
            cache["ghb"] = (f_rf_gnb, f_bb_gnb, f_rf_iab, f_bb_iab, iab_sel, w_rf_ue, cb)
        f_rf_gnb, f_bb_gnb, f_rf_iab, f_bb_iab, iab_sel, w_rf_ue, cb = cache["ghb"]
        # Refine the in-band receiver's beams against the interference and
        # signal levels it will actually see; cache per power operating point
        # so paired duplex comparisons reuse their own refined selections.
        rx_key = ("wrf_iab", rho_b_eff / powers.noise_var, rho_s_eff / powers.noise_var)
        if rx_key not in cache:
            cb_rx = cb[h_b.subcarriers.shape[1]]
            g_sig = np.einsum(
                "im,kij->kmj", cb_rx.columns.conj(), h_b.subcarriers @ f_rf_gnb @ f_bb_gnb
            )
            g_int = None
            if rho_s_eff > 0.0:
                g_int = np.einsum(
                    "im,kij->kmj", cb_rx.columns.conj(), h_si.subcarriers @ f_rf_iab @ f_bb_iab
                )
            refined = refine_combiner(
                iab_sel,
                cb_rx,
                g_sig,
                g_int,
                rho_b_eff / powers.noise_var,
                rho_s_eff / powers.noise_var,
            )
            cache[rx_key] = cb_rx.columns[:, refined]
        w_rf_iab = cache[rx_key]

    # UE combiner first: the access effective channel may feed the IAB AQNM.
    h_bar_a = _eff_stack(w_rf_ue, h_a, f_rf_iab, f_bb_iab)
    rq_ue = None
    if not adc.infinite:
        rq_ue = rq_ue_stack(h_a, w_rf_ue, f_rf_iab, f_bb_iab, rho_a_eff, alpha)
    n_rf_ue_dim = w_rf_ue.shape[1]
    w_bb_ue = np.stack(
        [
            lmmse_ue(
                h_bar_a[k],
                snr_a,
                alpha,
                n_rf_ue_dim,
                None if rq_ue is None else rq_ue[k],
                rho_a_eff,
                cfg.n_s_ue,
            )
            for k in range(k_sub)
        ]
    )

    h_bar_b = _eff_stack(w_rf_iab, h_b, f_rf_gnb, f_bb_gnb)
    h_bar_si = _eff_stack(w_rf_iab, h_si, f_rf_iab, f_bb_iab)
    rq_iab = None
    if not adc.infinite:
        w_ue_full = w_rf_ue[None] @ w_bb_ue
        rq_iab = rq_iab_stack(
            h_b,
            h_si,
            h_a,
            w_rf_iab,
            f_rf_gnb,
            f_bb_gnb,
            f_rf_iab,
            f_bb_iab,
            w_ue_full,
            rho_b_eff,
            rho_s_eff,
            alpha,
            cfg.si_quant_coupling,
        )
    n_rf_iab_dim = w_rf_iab.shape[1]
    w_bb_iab = np.stack(
        [
            lmmse_iab(
                h_bar_b[k],
                h_bar_si[k],
                sir,
                snr_b,
                alpha,
                n_rf_iab_dim,
                None if rq_iab is None else rq_iab[k],
                rho_b_eff,
                cfg.n_s_iab,
            )
            for k in range(k_sub)
        ]
    )

    return BeamformerSet(
        architecture=cfg.architecture,
        f_rf_gnb=f_rf_gnb,
        f_rf_iab=f_rf_iab,
        w_rf_iab=w_rf_iab,
        w_rf_ue=w_rf_ue,
        f_bb_gnb=f_bb_gnb,
        f_bb_iab=f_bb_iab,
        w_bb_iab=w_bb_iab,
        w_bb_ue=w_bb_ue,
        si_quant_coupling=cfg.si_quant_coupling,
    )


def _hybrid_precoder(digital, n_rf, codebooks, k_sub, n_s):
    n_ant = digital.shape[1]
    rf, bb_wide = greedy_hybrid(pack(digital), n_rf, codebooks[n_ant])
    bb = unpack(bb_wide, k_sub)
    # per-subcarrier power constraint ||F_rf F_bb[k]||_F^2 = n_s
    for k in range(k_sub):
        scale = np.linalg.norm(rf @ bb[k])
        if scale > 0:
            bb[k] *= math.sqrt(n_s) / scale
    return rf, bb
