# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the numerical hot kernels.

Mirrors the reference backend exactly: same series formulations, same
truncation rules, same extended-precision accumulation of running log
terms. See reference.py for the algorithm notes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, isnan, lgamma, log, pi, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

DEF LOG_TINY = -745.0


# ---------------------------------------------------------------------------
# regularized incomplete gamma
# ---------------------------------------------------------------------------

cdef double _gamma_p_series(double shape, double x) noexcept:
    cdef double term = 1.0 / shape
    cdef double total = term
    cdef double a = shape
    cdef int i
    for i in range(10000):
        a += 1.0
        term *= x / a
        total += term
        if fabs(term) < fabs(total) * 1e-17:
            break
    cdef double lp = shape * log(x) - x - lgamma(shape) + log(total)
    if lp <= LOG_TINY:
        return 0.0
    return min(1.0, exp(lp))


cdef double _gamma_q_contfrac(double shape, double x) noexcept:
    cdef double tiny = 1e-300
    cdef double b = x + 1.0 - shape
    cdef double c = 1.0 / tiny
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta
    cdef int i
    for i in range(1, 10000):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if fabs(d) < tiny:
            d = tiny
        c = b + an / c
        if fabs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < 1e-17:
            break
    cdef double lq = shape * log(x) - x - lgamma(shape) + log(fabs(h))
    if lq <= LOG_TINY:
        return 0.0
    return min(1.0, exp(lq))


cdef double _reg_gamma_lower(double shape, double x) noexcept:
    if x <= 0.0:
        return 0.0
    if x < shape + 1.0:
        return _gamma_p_series(shape, x)
    return 1.0 - _gamma_q_contfrac(shape, x)


def reg_gamma_lower(double shape, double x):
    """Regularized lower incomplete gamma P(shape, x), in [0, 1]."""
    return _reg_gamma_lower(shape, x)


# ---------------------------------------------------------------------------
# log modified Bessel function of the first kind, integer order
# ---------------------------------------------------------------------------

cdef double _log_bessel_series(long order, double x) noexcept:
    cdef double half = 0.5 * x
    cdef double lh = log(half)
    cdef double k_peak = 0.5 * (sqrt(<double>order * order + x * x) - order)
    cdef long n_terms = <long>(k_peak + 12.0 * sqrt(k_peak + order + 10.0) + 30.0)
    # streaming logsumexp over the ascending series, log term accumulated
    # in extended precision
    cdef long double lt = order * <long double>lh - lgamma(order + 1.0)
    cdef double m = <double>lt
    cdef double s = 1.0
    cdef double lt_d
    cdef long k
    for k in range(1, n_terms + 1):
        lt += 2.0 * lh - log(<double>k) - log(<double>(order + k))
        lt_d = <double>lt
        if lt_d <= m:
            s += exp(lt_d - m)
        else:
            s = s * exp(m - lt_d) + 1.0
            m = lt_d
    return m + log(s)


cdef double _log_bessel_asymptotic(long order, double x) noexcept:
    cdef double mu = 4.0 * <double>order * order
    cdef double term = 1.0
    cdef double total = 1.0
    cdef double prev = INFINITY
    cdef double factor
    cdef int j
    for j in range(1, 60):
        factor = -(mu - (2.0 * j - 1.0) ** 2) / (8.0 * j * x)
        term *= factor
        if fabs(term) >= prev:
            break
        total += term
        prev = fabs(term)
        if fabs(term) < 1e-18 * fabs(total):
            break
    return x - 0.5 * log(2.0 * pi * x) + log(total)


def log_bessel_i(long order, double x):
    """ln I_order(x) for integer order >= 0 and x >= 0, overflow free."""
    if x == 0.0:
        return 0.0 if order == 0 else -INFINITY
    if x >= max(1000.0, 4.0 * <double>order * order):
        return _log_bessel_asymptotic(order, x)
    return _log_bessel_series(order, x)


# ---------------------------------------------------------------------------
# Marcum Q
# ---------------------------------------------------------------------------

cdef (long, long) _poisson_window(double hl) noexcept:
    cdef double w = 10.0 * sqrt(hl + 1.0) + 30.0
    cdef long k_lo = <long>(hl - w)
    if k_lo < 0:
        k_lo = 0
    cdef long k_hi = <long>(hl + w) + 1
    return k_lo, k_hi


def marcum_q(long order, double a, double b):
    """Marcum Q_order(a, b) via the canonical noncentrality series."""
    if b == 0.0:
        return 1.0
    cdef double y = 0.5 * b * b
    if a == 0.0:
        return 1.0 - _reg_gamma_lower(<double>order, y)
    cdef double hl = 0.5 * a * a
    cdef double mean = 2.0 * order + a * a
    cdef double sd = sqrt(4.0 * order + 4.0 * a * a)
    cdef double z = (b * b - mean) / sd
    if z < -45.0:
        return 1.0
    if z > 45.0:
        return 0.0
    cdef long k_lo, k_hi
    k_lo, k_hi = _poisson_window(hl)
    cdef double lhl = log(hl)
    cdef double ly = log(y)
    # running quantities, anchored at k_lo; the mixture weights are
    # normalized over the window at the end, which cancels the absolute
    # rounding drift of the large-argument log-pmf anchor
    cdef long double lp = k_lo * <long double>lhl - hl - lgamma(k_lo + 1.0)
    cdef long double lt = (order + k_lo) * <long double>ly - y - lgamma(<double>(order + k_lo + 1))
    cdef long double g = _reg_gamma_lower(<double>(order + k_lo), y)
    g = 1.0 - g
    cdef long double num = 0.0
    cdef long double den = 0.0
    cdef long double w
    cdef long k
    for k in range(k_lo, k_hi + 1):
        if g > 1.0:
            g = 1.0
        w = exp(<double>lp)
        num += w * g
        den += w
        lp += lhl - log(<double>(k + 1))
        g += exp(<double>lt)
        lt += ly - log(<double>(order + k + 1))
    if den <= 0.0:
        return 0.0
    cdef long double q = num / den
    if q > 1.0:
        return 1.0
    if q < 0.0:
        return 0.0
    return <double>q


def marcum_q_diff(long order, double a, double b):
    """Q_order(a, b) - Q_(order-1)(a, b) from the shared series."""
    if b == 0.0:
        return 0.0
    cdef double y = 0.5 * b * b
    cdef double ly = log(y)
    cdef double lt0
    if a == 0.0:
        lt0 = (order - 1.0) * ly - y - lgamma(<double>order)
        return exp(lt0) if lt0 > LOG_TINY else 0.0
    cdef double hl = 0.5 * a * a
    cdef double lhl = log(hl)
    cdef long k_lo, k_hi
    k_lo, k_hi = _poisson_window(hl)
    cdef long double lp = k_lo * <long double>lhl - hl - lgamma(k_lo + 1.0)
    cdef long double lt = (order + k_lo - 1.0) * <long double>ly - y - lgamma(<double>(order + k_lo))
    # mixture-weight normalization as in marcum_q
    cdef long double num = 0.0
    cdef long double den = 0.0
    cdef long double w
    cdef double expo
    cdef long k
    for k in range(k_lo, k_hi + 1):
        w = exp(<double>lp)
        den += w
        expo = <double>lt
        if expo > LOG_TINY:
            num += w * exp(expo)
        lp += lhl - log(<double>(k + 1))
        lt += ly - log(<double>(order + k))
    if den <= 0.0:
        return 0.0
    return <double>(num / den)


# ---------------------------------------------------------------------------
# Monte Carlo frame powers
# ---------------------------------------------------------------------------

def frame_powers(cnp.ndarray bases_arr, cnp.ndarray bits_arr,
                 cnp.ndarray coefs_arr, cnp.ndarray normals_arr):
    """Average power per symbol frame; see the reference backend docstring."""
    cdef cnp.complex128_t[::1] bases = np.ascontiguousarray(bases_arr, dtype=np.complex128)
    cdef cnp.uint8_t[::1] bits = np.ascontiguousarray(bits_arr, dtype=np.uint8)
    cdef cnp.complex128_t[:, ::1] coefs = np.ascontiguousarray(coefs_arr, dtype=np.complex128)
    cdef double[:, :, ::1] normals = np.ascontiguousarray(normals_arr, dtype=np.float64)

    cdef Py_ssize_t n_frames = normals.shape[0]
    cdef Py_ssize_t n_samples = normals.shape[1]
    cdef Py_ssize_t n_streams = coefs.shape[1]
    if normals.shape[2] != 2 * n_streams:
        raise ValueError("normals last axis must be twice the stream count")
    if bits.shape[0] != n_frames:
        raise ValueError("bits length must match the frame count")

    psi_arr = np.empty(n_frames, dtype=np.float64)
    cdef double[::1] psi = psi_arr
    cdef double[4] cr
    cdef double[4] ci
    if n_streams > 4:
        raise ValueError("at most 4 noise streams supported")

    cdef Py_ssize_t m, n, j
    cdef int bit
    cdef double br, bi, yr, yi, acc, zr, zi
    for m in range(n_frames):
        bit = bits[m]
        br = bases[bit].real
        bi = bases[bit].imag
        for j in range(n_streams):
            cr[j] = coefs[bit, j].real
            ci[j] = coefs[bit, j].imag
        acc = 0.0
        for n in range(n_samples):
            yr = br
            yi = bi
            for j in range(n_streams):
                zr = normals[m, n, 2 * j]
                zi = normals[m, n, 2 * j + 1]
                yr += cr[j] * zr - ci[j] * zi
                yi += ci[j] * zr + cr[j] * zi
            acc += yr * yr + yi * yi
        psi[m] = acc / n_samples
    return psi_arr
