"""Pure-numpy implementations of the numerical hot kernels.

This is the fallback backend used when the compiled extension is not
available. The scalar special functions are evaluated through vectorized
series in the natural-log domain; running log terms are accumulated in
extended precision (longdouble) because sequential rounding over a few
thousand series terms would otherwise eat into the advertised tolerances.

All functions assume arguments already validated by the public wrappers.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "reference"

_LOG_TINY = -745.0  # below exp() underflow for float64


# ---------------------------------------------------------------------------
# regularized incomplete gamma
# ---------------------------------------------------------------------------

def reg_gamma_lower(shape: float, x: float) -> float:
    """Regularized lower incomplete gamma P(shape, x), in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x < shape + 1.0:
        return _gamma_p_series(shape, x)
    return 1.0 - _gamma_q_contfrac(shape, x)


def _gamma_log_prefactor(shape: float, x: float) -> float:
    return shape * math.log(x) - x - math.lgamma(shape)


def _gamma_p_series(shape: float, x: float) -> float:
    # power series for P(shape, x), converges fast for x < shape + 1
    term = 1.0 / shape
    total = term
    a = shape
    for _ in range(10000):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    lp = _gamma_log_prefactor(shape, x) + math.log(total)
    return min(1.0, math.exp(lp)) if lp > _LOG_TINY else 0.0


def _gamma_q_contfrac(shape: float, x: float) -> float:
    # modified Lentz continued fraction for Q(shape, x), x >= shape + 1
    tiny = 1e-300
    b = x + 1.0 - shape
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    lq = _gamma_log_prefactor(shape, x) + math.log(abs(h))
    return min(1.0, math.exp(lq)) if lq > _LOG_TINY else 0.0


# ---------------------------------------------------------------------------
# log modified Bessel function of the first kind, integer order
# ---------------------------------------------------------------------------

def log_bessel_i(order: int, x: float) -> float:
    """ln I_order(x) for integer order >= 0 and x >= 0, overflow free."""
    if x == 0.0:
        return 0.0 if order == 0 else -math.inf
    # the large-argument expansion is accurate once x dominates order**2
    if x >= max(1000.0, 4.0 * order * order):
        return _log_bessel_asymptotic(order, x)
    return _log_bessel_series(order, x)


def _log_bessel_series(order: int, x: float) -> float:
    # ascending series: sum_k (x/2)^(2k+order) / (k! (order+k)!)
    half = 0.5 * x
    lh = math.log(half)
    # term index of the series maximum, plus a tail window that leaves the
    # truncated mass far below double precision
    k_peak = 0.5 * (math.sqrt(order * order + x * x) - order)
    n_terms = int(k_peak + 12.0 * math.sqrt(k_peak + order + 10.0) + 30.0)
    k = np.arange(1, n_terms + 1, dtype=np.float64)
    incr = 2.0 * lh - np.log(k) - np.log(order + k)
    lt0 = order * lh - math.lgamma(order + 1.0)
    # extended-precision running sum of the log-term increments
    lt = np.empty(n_terms + 1)
    lt[0] = lt0
    lt[1:] = lt0 + np.cumsum(incr.astype(np.longdouble)).astype(np.float64)
    m = lt.max()
    return float(m + math.log(np.exp(lt - m).sum()))


def _log_bessel_asymptotic(order: int, x: float) -> float:
    # exponentially scaled expansion: I(x) ~ e^x / sqrt(2 pi x) * S
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    prev = math.inf
    for j in range(1, 60):
        factor = -(mu - (2.0 * j - 1.0) ** 2) / (8.0 * j * x)
        term *= factor
        if abs(term) >= prev:  # asymptotic tail started to diverge
            break
        total += term
        prev = abs(term)
        if abs(term) < 1e-18 * abs(total):
            break
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(total)


# ---------------------------------------------------------------------------
# Marcum Q
# ---------------------------------------------------------------------------

def marcum_q(order: int, a: float, b: float) -> float:
    """Marcum Q_order(a, b) via the canonical noncentrality series."""
    if b == 0.0:
        return 1.0
    y = 0.5 * b * b
    if a == 0.0:
        return 1.0 - reg_gamma_lower(float(order), y)
    hl = 0.5 * a * a  # Poisson intensity of the mixture
    mean = 2.0 * order + a * a
    sd = math.sqrt(4.0 * order + 4.0 * a * a)
    z = (b * b - mean) / sd
    if z < -45.0:
        return 1.0
    if z > 45.0:
        return 0.0
    k_lo, k_hi = _poisson_window(hl)
    k = np.arange(k_lo, k_hi + 1, dtype=np.float64)
    lp = _log_poisson(hl, k_lo, k)
    # survival of the gamma part, built by upward recurrence from k_lo
    g_lo = 1.0 - reg_gamma_lower(float(order + k_lo), y)
    lt = (order + k[:-1]) * math.log(y) - y - _lgamma_vector(order + k[:-1] + 1.0)
    g = np.empty_like(k)
    g[0] = g_lo
    g[1:] = g_lo + np.cumsum(np.exp(lt).astype(np.longdouble)).astype(np.float64)
    np.clip(g, 0.0, 1.0, out=g)
    # normalize over the window: the mixture weights sum to one up to the
    # discarded tails, and dividing cancels the absolute rounding drift of
    # the large-argument log-pmf anchor
    w = np.exp(lp - lp.max())
    q = float((w @ g) / w.sum())
    return min(1.0, max(0.0, q))


def marcum_q_diff(order: int, a: float, b: float) -> float:
    """Q_order(a, b) - Q_(order-1)(a, b) from the shared series."""
    if b == 0.0:
        return 0.0
    y = 0.5 * b * b
    ly = math.log(y)
    if a == 0.0:
        lt = (order - 1.0) * ly - y - math.lgamma(float(order))
        return math.exp(lt) if lt > _LOG_TINY else 0.0
    hl = 0.5 * a * a
    k_lo, k_hi = _poisson_window(hl)
    k = np.arange(k_lo, k_hi + 1, dtype=np.float64)
    lp = _log_poisson(hl, k_lo, k)
    lt = (order + k - 1.0) * ly - y - _lgamma_vector(order + k)
    # mixture-weight normalization as in marcum_q
    w = np.exp(lp - lp.max())
    return float((w * np.exp(lt)).sum() / w.sum())


def _poisson_window(hl: float) -> tuple[int, int]:
    # window holding all but ~1e-20 of the Poisson(hl) mass
    w = 10.0 * math.sqrt(hl + 1.0) + 30.0
    k_lo = max(0, int(hl - w))
    k_hi = int(hl + w) + 1
    return k_lo, k_hi


def _log_poisson(hl: float, k_lo: int, k: np.ndarray) -> np.ndarray:
    # log of Poisson(hl) pmf over k, anchored at k_lo with one lgamma call
    lp0 = k_lo * math.log(hl) - hl - math.lgamma(k_lo + 1.0)
    incr = math.log(hl) - np.log(k[1:])
    out = np.empty_like(k)
    out[0] = lp0
    out[1:] = lp0 + np.cumsum(incr.astype(np.longdouble)).astype(np.float64)
    return out


def _lgamma_vector(v: np.ndarray) -> np.ndarray:
    # lgamma over an integer-valued ascending vector via one anchor call
    out = np.empty_like(v)
    out[0] = math.lgamma(v[0])
    if len(v) > 1:
        out[1:] = out[0] + np.cumsum(np.log(v[:-1]).astype(np.longdouble)).astype(np.float64)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo frame powers
# ---------------------------------------------------------------------------

def frame_powers(bases: np.ndarray, bits: np.ndarray, coefs: np.ndarray,
                 normals: np.ndarray) -> np.ndarray:
    """Average power per symbol frame of base[bit] + sum_j coef[bit, j] * zeta_j.

    bases:   complex (2,), per-bit deterministic sample value
    bits:    uint8 (n_frames,), transmitted bit per frame
    coefs:   complex (2, n_streams), per-bit mixing weight of each unit-normal
             pair (real and imaginary parts drawn independently as N(0, 1))
    normals: float64 (n_frames, n_samples, 2 * n_streams), interleaved re/im
    """
    n_frames, n_samples, _ = normals.shape
    psi = np.empty(n_frames)
    zr = normals[:, :, 0::2]
    zi = normals[:, :, 1::2]
    for bit in (0, 1):
        sel = bits == bit
        if not sel.any():
            continue
        cr = coefs[bit].real
        ci = coefs[bit].imag
        yr = zr[sel] @ cr - zi[sel] @ ci + bases[bit].real
        yi = zr[sel] @ ci + zi[sel] @ cr + bases[bit].imag
        psi[sel] = np.mean(yr * yr + yi * yi, axis=1)
    return psi
