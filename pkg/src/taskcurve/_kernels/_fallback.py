"""Pure-Python / NumPy implementation of the numerical kernels.

This module and ``_core`` (the Cython twin) expose the same interface and
must produce the same numbers.  Scalar special functions are plain Python;
the sampling routines are vectorized with NumPy.

Random stream layout
--------------------
All randomness derives from a counter-based generator: output ``i`` of the
stream with key ``k`` is ``mix64(k + (i + 1) * GOLDEN) mod 2**64`` where
``mix64`` is the splitmix64 finalizer.  Because output ``i`` is a pure
function of ``(k, i)``, any slice of a stream can be generated in any
order, in chunks of any size, with identical results.

Uniforms map the top 53 bits into (0, 1]:  ``u = ((x >> 11) + 1) * 2**-53``.
Gaussians come from the Box-Muller transform applied to uniform pairs:
pair ``p`` consumes uniforms ``2p`` and ``2p + 1`` and yields gaussians
``2p`` (cosine branch) and ``2p + 1`` (sine branch).  Gaussian ``g`` of a
stream therefore has a fixed position independent of how many values are
requested at a time.
"""

import math

import numpy as np

from taskcurve.exceptions import ConvergenceError

BACKEND = "fallback"

GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
_TWO_PI = 6.283185307179586
_INV_2_53 = 2.0 ** -53
_U64 = np.uint64


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

# Lanczos coefficients, g = 7, 9 terms
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.9189385332046727


def ln_gamma(x):
    """Natural log of the gamma function for x > 0 (Lanczos, g=7).

    Inputs below 0.5 go through the recurrence
    ln Gamma(x) = ln Gamma(x + 1) - ln x, which keeps the approximation
    inside its accurate range without trigonometric reflection.
    """
    if x < 0.5:
        return ln_gamma(x + 1.0) - math.log(x)
    xx = x - 1.0
    s = _LANCZOS[0]
    for i in range(1, 9):
        s += _LANCZOS[i] / (xx + i)
    base = xx + 7.5
    return _HALF_LOG_TWO_PI + (xx + 0.5) * math.log(base) - base + math.log(s)


def reg_lower_gamma(s, x, eps, itmax):
    """Regularized lower incomplete gamma P(s, x), s > 0, x >= 0.

    Power series for x < s + 1, Lentz continued fraction for the upper
    function otherwise; both stop at relative change < eps and raise
    ConvergenceError after itmax iterations.  Result clamped to [0, 1].
    """
    if x <= 0.0:
        return 0.0
    if x < s + 1.0:
        # series: P = x^s e^-x / Gamma(s) * sum_n x^n / (s(s+1)...(s+n))
        ap = s
        term = 1.0 / s
        total = term
        for _ in range(itmax):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * eps:
                p = total * math.exp(-x + s * math.log(x) - ln_gamma(s))
                return min(1.0, max(0.0, p))
        raise ConvergenceError(
            f"reg_lower_gamma series did not converge for s={s!r}, x={x!r}"
        )
    # continued fraction for Q(s, x), modified Lentz
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, itmax + 1):
        an = -i * (i - s)
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
        if abs(delta - 1.0) < eps:
            q = math.exp(-x + s * math.log(x) - ln_gamma(s)) * h
            return min(1.0, max(0.0, 1.0 - q))
    raise ConvergenceError(
        f"reg_lower_gamma continued fraction did not converge for s={s!r}, x={x!r}"
    )


def _beta_cf(a, b, x, eps, itmax):
    # continued fraction from the incomplete-beta recurrence, modified Lentz
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, itmax + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for "
        f"a={a!r}, b={b!r}, x={x!r}"
    )


def reg_inc_beta(a, b, x, eps, itmax):
    """Regularized incomplete beta I_x(a, b), a > 0, b > 0, 0 <= x <= 1.

    Continued fraction evaluated on whichever side of the symmetry point
    x = (a + 1)/(a + b + 2) converges fast; the other side uses
    I_x(a, b) = 1 - I_{1-x}(b, a).  Result clamped to [0, 1].
    """
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        val = front * _beta_cf(a, b, x, eps, itmax) / a
    else:
        val = 1.0 - front * _beta_cf(b, a, 1.0 - x, eps, itmax) / b
    return min(1.0, max(0.0, val))


# ---------------------------------------------------------------------------
# counter-based sampling
# ---------------------------------------------------------------------------

def _raw(key, start, count):
    idx = np.arange(start, start + count, dtype=_U64)
    z = _U64(key & 0xFFFFFFFFFFFFFFFF) + (idx + _U64(1)) * _U64(GOLDEN)
    z ^= z >> _U64(30)
    z *= _U64(MIX_A)
    z ^= z >> _U64(27)
    z *= _U64(MIX_B)
    z ^= z >> _U64(31)
    return z


def uniforms(key, start, count):
    """Uniform (0, 1] doubles at positions [start, start + count)."""
    z = _raw(key, start, count)
    return ((z >> _U64(11)).astype(np.float64) + 1.0) * _INV_2_53


def gaussians(key, start, count):
    """Standard normal doubles at positions [start, start + count)."""
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    p0 = start >> 1
    p1 = (start + count + 1) >> 1
    u = uniforms(key, 2 * p0, 2 * (p1 - p0))
    u1 = u[0::2]
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = _TWO_PI * u2
    out = np.empty(2 * (p1 - p0), dtype=np.float64)
    out[0::2] = radius * np.cos(theta)
    out[1::2] = radius * np.sin(theta)
    off = start - 2 * p0
    return out[off:off + count]


def count_below_threshold(key, n_samples, dim, variance, threshold_sq):
    """Count samples of a dim-dimensional N(0, variance * I) vector whose
    squared norm falls below threshold_sq.

    Sample i consumes gaussians [i * dim, (i + 1) * dim) of the stream, so
    the result does not depend on chunking.
    """
    chunk = max(1, (1 << 22) // max(1, dim))
    total = 0
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        g = gaussians(key, done * dim, n * dim).reshape(n, dim)
        norm_sq = variance * np.einsum("ij,ij->i", g, g)
        total += int(np.count_nonzero(norm_sq < threshold_sq))
        done += n
    return total


def binomial_count(key, start, n, p):
    """Binomial(n, p) draw: count of uniforms at [start, start + n) below p."""
    if n <= 0:
        return 0
    return int(np.count_nonzero(uniforms(key, start, n) < p))
