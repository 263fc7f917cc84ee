"""Hot numeric kernels for channel tap assembly.

Two implementations are provided: numba-jitted loops (default) and a
vectorized pure-numpy path.  Set FDIAB_DISABLE_NUMBA=1 in the environment
to force the numpy path (any value other than "" or "0" disables numba).
Tests assert both paths agree to 1e-12; benchmarks/bench_kernels.py
compares their throughput.

The heavy linear-algebra stages (SVD, LMMSE solves) stay on LAPACK via
numpy.linalg and are not duplicated here.
"""
import cmath
import math
import os

import numpy as np

NUMBA_DISABLED = os.environ.get("FDIAB_DISABLE_NUMBA", "0") not in ("", "0")

try:
    if NUMBA_DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # no-op decorator fallback
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _rc_scalar(t, beta, ts):
    """Raised-cosine pulse value at time t (seconds)."""
    x = t / ts
    if x == 0.0:
        s = 1.0
    else:
        s = math.sin(math.pi * x) / (math.pi * x)
    if beta == 0.0:
        return s
    denom = 1.0 - (2.0 * beta * x) ** 2
    if abs(denom) < 1e-10:
        # analytic limit at |t| = ts / (2 beta)
        xs = 1.0 / (2.0 * beta)
        return (math.pi / 4.0) * math.sin(math.pi * xs) / (math.pi * xs)
    return s * math.cos(math.pi * beta * x) / denom


@njit(cache=True)
def _taps_numba(alpha, tau, theta, phi, n_rx, n_tx, n_taps, ts, beta, pitch, gamma):
    out = np.zeros((n_taps, n_rx, n_tx), dtype=np.complex128)
    arx = np.empty(n_rx, dtype=np.complex128)
    atxc = np.empty(n_tx, dtype=np.complex128)
    norm = 1.0 / math.sqrt(n_rx * n_tx)
    for r in range(alpha.shape[0]):
        srx = math.sin(theta[r])
        stx = math.sin(phi[r])
        for m in range(n_rx):
            arx[m] = cmath.exp(1j * TWO_PI * pitch * m * srx)
        for m in range(n_tx):
            atxc[m] = cmath.exp(-1j * TWO_PI * pitch * m * stx)
        for ell in range(n_taps):
            p = _rc_scalar(ell * ts - tau[r], beta, ts)
            if p == 0.0:
                continue
            w = gamma * alpha[r] * p * norm
            for i in range(n_rx):
                wi = w * arx[i]
                for j in range(n_tx):
                    out[ell, i, j] += wi * atxc[j]
    return out


def raised_cosine_np(t, beta, ts):
    """Vectorized raised-cosine pulse (numpy path)."""
    x = np.asarray(t, dtype=np.float64) / ts
    s = np.sinc(x)
    if beta == 0.0:
        return s
    denom = 1.0 - (2.0 * beta * x) ** 2
    singular = np.abs(denom) < 1e-10
    safe = np.where(singular, 1.0, denom)
    out = s * np.cos(np.pi * beta * x) / safe
    limit = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * beta))
    return np.where(singular, limit, out)


def _taps_numpy(alpha, tau, theta, phi, n_rx, n_tx, n_taps, ts, beta, pitch, gamma):
    ell = np.arange(n_taps, dtype=np.float64)
    pulse = raised_cosine_np(ell[:, None] * ts - tau[None, :], beta, ts)  # (L, R)
    m_rx = np.arange(n_rx)
    m_tx = np.arange(n_tx)
    arx = np.exp(1j * TWO_PI * pitch * np.outer(np.sin(theta), m_rx)) / math.sqrt(n_rx)
    atxc = np.exp(-1j * TWO_PI * pitch * np.outer(np.sin(phi), m_tx)) / math.sqrt(n_tx)
    weighted = pulse * alpha[None, :]  # (L, R)
    return gamma * np.einsum("lr,ri,rj->lij", weighted, arx, atxc)


if HAVE_NUMBA:
    assemble_taps_kernel = _taps_numba
else:
    assemble_taps_kernel = _taps_numpy
