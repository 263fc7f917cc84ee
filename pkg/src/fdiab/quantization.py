"""Additive quantization noise model (AQNM).

A b-bit ADC is modeled as y_q = alpha * y + q with gain alpha = 1 - eta and
q a zero-mean Gaussian whose covariance depends on the quantizer input power.
Only second-order statistics are needed for spectral efficiency, so the
noise enters the pipeline in covariance form; apply_aqnm draws samples for
tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF_BITS = math.inf

# Lloyd-Max optimal distortion factors for small bit depths; beyond the table
# the closed form (pi sqrt(3) / 2) * 2^(-2b) is used.
ETA_TABLE = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}


def eta_of_bits(bits) -> float:
    """Distortion factor eta (inverse SQNR) for a b-bit ADC."""
    if bits == INF_BITS:
        return 0.0
    if bits != int(bits) or bits <= 0:
        raise ValueError("bits must be a positive integer or inf")
    bits = int(bits)
    if bits in ETA_TABLE:
        return ETA_TABLE[bits]
    return (math.pi * math.sqrt(3.0) / 2.0) * 2.0 ** (-2 * bits)


@dataclass(frozen=True)
class AdcModel:
    bits: float  # positive integer or math.inf
    eta: float
    alpha: float

    @classmethod
    def from_bits(cls, bits) -> "AdcModel":
        eta = eta_of_bits(bits)
        return cls(bits=bits, eta=eta, alpha=1.0 - eta)

    @property
    def infinite(self) -> bool:
        return self.bits == INF_BITS


def _check_finite(*mats):
    for m in mats:
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite entries in AQNM input")


def aqnm_cov_ue(h_a_eff: np.ndarray, rho_a: float, alpha_a: float) -> np.ndarray:
    """Quantization-noise covariance at the UE receiver.

    R_q = alpha (1 - alpha) diag(rho * H_eff H_eff^* + I), with H_eff the
    effective channel seen at the quantizer input (after the RF combiner).
    Diagonal, real, nonnegative.
    """
    h = np.asarray(h_a_eff)
    _check_finite(h)
    if not np.isfinite(rho_a) or not np.isfinite(alpha_a):
        raise ValueError("rho and alpha must be finite")
    diag = rho_a * np.einsum("ij,ij->i", h, h.conj()).real + 1.0
    return alpha_a * (1.0 - alpha_a) * np.diag(diag)


def aqnm_cov_iab(
    h_b_eff: np.ndarray,
    h_si_eff: np.ndarray,
    h_a_eff: np.ndarray,
    rho_b: float,
    rho_s: float,
    alpha_b: float,
) -> np.ndarray:
    """Quantization-noise covariance at the IAB receiver.

    R_q = a(1-a) diag(rho_b H_b H_b^* + rho_s a^2 H_si H_a H_a^* H_si^* + I)
    with a = alpha_b.  The self-interference term couples the SI and access
    effective channels; the caller chooses what to supply for h_a_eff.
    """
    h_b = np.asarray(h_b_eff)
    h_si = np.asarray(h_si_eff)
    h_a = np.asarray(h_a_eff)
    _check_finite(h_b, h_si)
    if h_si.shape[1] != h_a.shape[0]:
        raise ValueError("h_si_eff columns must match h_a_eff rows")
    diag = rho_b * np.einsum("ij,ij->i", h_b, h_b.conj()).real + 1.0
    if rho_s != 0.0:
        _check_finite(h_a)
        m = h_si @ h_a
        diag = diag + rho_s * alpha_b**2 * np.einsum("ij,ij->i", m, m.conj()).real
    return alpha_b * (1.0 - alpha_b) * np.diag(diag)


def apply_aqnm(y: np.ndarray, alpha: float, r_q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample-level quantizer surrogate: alpha*y + q, q ~ CN(0, R_q) (R_q diagonal)."""
    std = np.sqrt(np.diag(r_q).real / 2.0)
    q = std * (rng.standard_normal(y.shape[0]) + 1j * rng.standard_normal(y.shape[0]))
    return alpha * y + q
