# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the numerical kernels.

Mirrors ``taskcurve._kernels._fallback`` function for function; see that
module for the stream-layout documentation.  Keep the two in sync: the
cross-implementation tests compare their outputs directly.
"""

import numpy as np

from libc.math cimport cos, exp, fabs, log, sin, sqrt

from taskcurve.exceptions import ConvergenceError

BACKEND = "compiled"

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15
cdef unsigned long long MIX_A = 0xBF58476D1CE4E5B9
cdef unsigned long long MIX_B = 0x94D049BB133111EB
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 2.0 ** -53


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

cdef double LANCZOS[9]
LANCZOS[0] = 0.99999999999980993
LANCZOS[1] = 676.5203681218851
LANCZOS[2] = -1259.1392167224028
LANCZOS[3] = 771.32342877765313
LANCZOS[4] = -176.61502916214059
LANCZOS[5] = 12.507343278686905
LANCZOS[6] = -0.13857109526572012
LANCZOS[7] = 9.9843695780195716e-6
LANCZOS[8] = 1.5056327351493116e-7

cdef double HALF_LOG_TWO_PI = 0.9189385332046727


cdef double _ln_gamma(double x):
    cdef double shift = 0.0
    cdef double s, base, xx
    cdef int i
    while x < 0.5:
        shift -= log(x)
        x += 1.0
    xx = x - 1.0
    s = LANCZOS[0]
    for i in range(1, 9):
        s += LANCZOS[i] / (xx + i)
    base = xx + 7.5
    return shift + HALF_LOG_TWO_PI + (xx + 0.5) * log(base) - base + log(s)


def ln_gamma(double x):
    """Natural log of the gamma function for x > 0 (Lanczos, g=7)."""
    return _ln_gamma(x)


def reg_lower_gamma(double s, double x, double eps, int itmax):
    """Regularized lower incomplete gamma P(s, x); see the fallback twin."""
    cdef double ap, term, total, p, q
    cdef double tiny = 1e-300
    cdef double b, c, d, h, an, delta
    cdef int i
    if x <= 0.0:
        return 0.0
    if x < s + 1.0:
        ap = s
        term = 1.0 / s
        total = term
        for i in range(itmax):
            ap += 1.0
            term *= x / ap
            total += term
            if fabs(term) < fabs(total) * eps:
                p = total * exp(-x + s * log(x) - _ln_gamma(s))
                return min(1.0, max(0.0, p))
        raise ConvergenceError(
            f"reg_lower_gamma series did not converge for s={s!r}, x={x!r}"
        )
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, itmax + 1):
        an = -i * (i - s)
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
        if fabs(delta - 1.0) < eps:
            q = exp(-x + s * log(x) - _ln_gamma(s)) * h
            return min(1.0, max(0.0, 1.0 - q))
    raise ConvergenceError(
        f"reg_lower_gamma continued fraction did not converge for s={s!r}, x={x!r}"
    )


cdef double _beta_cf(double a, double b, double x, double eps, int itmax) except? -1.0:
    cdef double tiny = 1e-300
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, itmax + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if fabs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if fabs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < eps:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for "
        f"a={a!r}, b={b!r}, x={x!r}"
    )


def reg_inc_beta(double a, double b, double x, double eps, int itmax):
    """Regularized incomplete beta I_x(a, b); see the fallback twin."""
    cdef double front, val
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(
        _ln_gamma(a + b) - _ln_gamma(a) - _ln_gamma(b)
        + a * log(x) + b * log(1.0 - x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        val = front * _beta_cf(a, b, x, eps, itmax) / a
    else:
        val = 1.0 - front * _beta_cf(b, a, 1.0 - x, eps, itmax) / b
    return min(1.0, max(0.0, val))


# ---------------------------------------------------------------------------
# counter-based sampling
# ---------------------------------------------------------------------------

cdef inline unsigned long long _mix(unsigned long long z):
    z ^= z >> 30
    z *= MIX_A
    z ^= z >> 27
    z *= MIX_B
    z ^= z >> 31
    return z


cdef inline double _uniform(unsigned long long key, unsigned long long i):
    cdef unsigned long long z = _mix(key + (i + 1) * GOLDEN)
    return <double>((z >> 11) + 1) * INV_2_53


def uniforms(key, start, count):
    """Uniform (0, 1] doubles at positions [start, start + count)."""
    cdef unsigned long long k = key & 0xFFFFFFFFFFFFFFFF
    cdef unsigned long long s = start
    cdef Py_ssize_t n = count
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    for i in range(n):
        view[i] = _uniform(k, s + i)
    return out


def gaussians(key, start, count):
    """Standard normal doubles at positions [start, start + count)."""
    cdef unsigned long long k = key & 0xFFFFFFFFFFFFFFFF
    cdef Py_ssize_t lo = start
    cdef Py_ssize_t n = count
    cdef Py_ssize_t p0 = lo >> 1
    cdef Py_ssize_t p1 = (lo + n + 1) >> 1
    cdef Py_ssize_t p, j
    cdef double u1, u2, radius, theta
    if n <= 0:
        return np.empty(0, dtype=np.float64)
    buf = np.empty(2 * (p1 - p0), dtype=np.float64)
    cdef double[::1] view = buf
    j = 0
    for p in range(p0, p1):
        u1 = _uniform(k, 2 * p)
        u2 = _uniform(k, 2 * p + 1)
        radius = sqrt(-2.0 * log(u1))
        theta = TWO_PI * u2
        view[j] = radius * cos(theta)
        view[j + 1] = radius * sin(theta)
        j += 2
    off = lo - 2 * p0
    return buf[off:off + n]


def count_below_threshold(key, n_samples, dim, double variance, double threshold_sq):
    """Count dim-dimensional N(0, variance * I) samples with squared norm
    below threshold_sq; sample i uses gaussians [i*dim, (i+1)*dim)."""
    cdef unsigned long long k = key & 0xFFFFFFFFFFFFFFFF
    cdef Py_ssize_t ns = n_samples
    cdef Py_ssize_t q = dim
    cdef Py_ssize_t i, j
    cdef unsigned long long pos, p
    cdef double u1, u2, radius, g, acc
    cdef double pending = 0.0
    cdef bint have_pending = False
    cdef Py_ssize_t total = 0
    pos = 0
    for i in range(ns):
        acc = 0.0
        for j in range(q):
            if have_pending:
                g = pending
                have_pending = False
            else:
                p = pos >> 1
                u1 = _uniform(k, 2 * p)
                u2 = _uniform(k, 2 * p + 1)
                radius = sqrt(-2.0 * log(u1))
                g = radius * cos(TWO_PI * u2)
                pending = radius * sin(TWO_PI * u2)
                have_pending = True
            pos += 1
            acc += g * g
        if variance * acc < threshold_sq:
            total += 1
    return total


def binomial_count(key, start, n, double p):
    """Binomial(n, p) draw: count of uniforms at [start, start + n) below p."""
    cdef unsigned long long k = key & 0xFFFFFFFFFFFFFFFF
    cdef unsigned long long s = start
    cdef Py_ssize_t nn = n
    cdef Py_ssize_t i
    cdef Py_ssize_t total = 0
    for i in range(nn):
        if _uniform(k, s + i) < p:
            total += 1
    return total
