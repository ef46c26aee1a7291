"""Deterministic counter-based randomness.

Everything random in this package flows through one documented generator so
that results are reproducible bit for bit across platforms, chunk sizes and
backend implementations.

Definition
----------
All arithmetic is modulo 2**64.

    mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27;  z *= 0x94D049BB133111EB
               z ^= z >> 31;  return z

    raw(key, i)     = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
    uniform(key, i) = ((raw(key, i) >> 11) + 1) * 2.0**-53        # in (0, 1]

Gaussians use the Box-Muller transform on uniform pairs: pair p reads
uniforms 2p and 2p + 1 and produces gaussians 2p (cosine branch) and
2p + 1 (sine branch).  Every value is addressed by (key, position), so any
sub-range can be regenerated independently.

Independent streams are split off a parent key with

    derive_key(key, j) = mix64((key ^ 0x9E6C63D0876A9A35) + (j + 1) * 0x9E3779B97F4A7C15)

The xor constant separates the derivation stream from the parent's own
output stream; nested calls give hierarchical splitting.

This generator is for simulation only.  It is not cryptographic.
"""

import hashlib

from taskcurve import _kernels

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_DERIVE_SALT = 0x9E6C63D0876A9A35


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


def raw(key: int, index: int) -> int:
    """Output ``index`` of the stream with the given key, as a uint64."""
    return mix64((key + (index + 1) * _GOLDEN) & _MASK)


def uniform(key: int, index: int) -> float:
    """Scalar uniform draw in (0, 1] at the given stream position."""
    return ((raw(key, index) >> 11) + 1) * 2.0 ** -53


def derive_key(key: int, index: int) -> int:
    """Child stream key ``index`` of ``key``; see the module docstring."""
    return mix64(((key ^ _DERIVE_SALT) + (index + 1) * _GOLDEN) & _MASK)


def digest64(data: bytes) -> int:
    """Stable 64-bit digest of a byte string (first 8 bytes of SHA-256,
    big endian).  Used to key content-addressed randomness."""
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "big")


def uniforms(key: int, start: int, count: int):
    """Array of uniforms at positions [start, start + count)."""
    return _kernels.uniforms(key, start, count)


def gaussians(key: int, start: int, count: int):
    """Array of standard normals at positions [start, start + count)."""
    return _kernels.gaussians(key, start, count)


def binomial(key: int, n: int, p: float, start: int = 0) -> int:
    """Binomial(n, p) draw: the count of stream uniforms at
    [start, start + n) that fall below p."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return _kernels.binomial_count(key, start, n, p)


class Stream:
    """Sequential reader over one uniform stream.

    Thin stateful convenience for generators that consume draws one at a
    time (including rejection loops); the state is just the count of values
    consumed, so a Stream is as reproducible as the positional interface.
    """

    def __init__(self, key: int):
        self.key = key & _MASK
        self.position = 0

    def next_uniform(self) -> float:
        u = uniform(self.key, self.position)
        self.position += 1
        return u

    def next_int(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], consuming one draw."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        # u in (0, 1] makes int(u * span) == span possible only at u == 1
        v = int(self.next_uniform() * span)
        return lo + min(v, span - 1)

    def shuffle(self, items: list) -> list:
        """Fisher-Yates shuffle, in place, consuming len(items) - 1 draws."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_int(0, i)
            items[i], items[j] = items[j], items[i]
        return items
