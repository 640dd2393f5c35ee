"""Exact arithmetic in Z[zeta_m].

A value is stored as its coefficient vector in the power basis
``1, zeta, ..., zeta^(phi(m)-1)`` after reduction modulo the m-th cyclotomic
polynomial, so two values are equal iff their reduced vectors are equal.
"""

import cmath
from functools import lru_cache
from math import gcd

import numpy as np


def lcm(a, b):
    return a * b // gcd(a, b)


def _poly_div_exact(num, den):
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1]  # den is monic
        out[k] = c
        if c:
            for i, d in enumerate(den):
                num[k + i] -= c * d
    if any(num):
        raise AssertionError("inexact cyclotomic division")  # pragma: no cover
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(m):
    """Ascending integer coefficients of Phi_m."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _poly_div_exact(num, cyclotomic_poly(d))
    return tuple(num)


def totient(m):
    return len(cyclotomic_poly(m)) - 1


def reduce_exponent_counts(m, counts):
    """Reduce ``sum counts[k] zeta_m^k`` (k may exceed m) to canonical form."""
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    folded = [0] * m
    for k, c in enumerate(counts):
        if c:
            folded[k % m] += int(c)
    for k in range(m - 1, deg - 1, -1):
        c = folded[k]
        if c:
            for i in range(deg + 1):
                folded[k - deg + i] -= c * phi[i]
    return tuple(folded[:deg])


def reduce_count_array(counts, m):
    """Vectorised ``reduce_exponent_counts`` over the last axis (length m)."""
    counts = np.array(counts, dtype=np.int64, copy=True)
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    for k in range(m - 1, deg - 1, -1):
        c = counts[..., k].copy()
        for i in range(deg + 1):
            if phi[i]:
                counts[..., k - deg + i] -= c * phi[i]
    return counts[..., :deg]


class CyclotomicValue:
    __slots__ = ("m", "coeffs")

    def __init__(self, m, coeffs):
        self.m = m
        self.coeffs = tuple(coeffs)
        if len(self.coeffs) != totient(m):
            raise ValueError("use from_counts for unreduced input")

    @classmethod
    def from_counts(cls, m, counts):
        return cls(m, reduce_exponent_counts(m, counts))

    @classmethod
    def root(cls, m, k=1):
        counts = [0] * m
        counts[k % m] = 1
        return cls.from_counts(m, counts)

    @classmethod
    def integer(cls, value, m=1):
        return cls.from_counts(m, [value])

    def exponent_counts(self, M=None):
        """Length-M vector c with self == sum c_k zeta_M^k (M a multiple of m)."""
        M = M or self.m
        if M % self.m:
            raise ValueError(f"{M} is not a multiple of {self.m}")
        step = M // self.m
        out = [0] * M
        for k, c in enumerate(self.coeffs):
            out[k * step] = c
        return out

    def lift(self, M):
        return CyclotomicValue.from_counts(M, self.exponent_counts(M))

    def _common(self, other):
        if isinstance(other, int):
            other = CyclotomicValue.integer(other)
        M = lcm(self.m, other.m)
        return M, self.exponent_counts(M), other.exponent_counts(M)

    def __add__(self, other):
        M, a, b = self._common(other)
        return CyclotomicValue.from_counts(M, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicValue(self.m, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, CyclotomicValue) else -other)

    def __mul__(self, other):
        M, a, b = self._common(other)
        out = [0] * M
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[(i + j) % M] += x * y
        return CyclotomicValue.from_counts(M, out)

    __rmul__ = __mul__

    def conj(self):
        m = self.m
        out = [0] * m
        for k, c in enumerate(self.coeffs):
            out[(-k) % m] += c
        return CyclotomicValue.from_counts(m, out)

    def abs2(self):
        return self * self.conj()

    def is_integer(self):
        return all(c == 0 for c in self.coeffs[1:])

    def to_int(self):
        if not self.is_integer():
            raise ValueError(f"{self!r} is not a rational integer")
        return self.coeffs[0]

    def to_complex(self):
        z = cmath.exp(2j * cmath.pi / self.m)
        return sum(c * z ** k for k, c in enumerate(self.coeffs) if c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = CyclotomicValue.integer(other)
        if not isinstance(other, CyclotomicValue):
            return NotImplemented
        M, a, b = self._common(other)
        return reduce_exponent_counts(M, a) == reduce_exponent_counts(M, b)

    def __hash__(self):
        # canonical form depends on m; hash only the rational part
        return hash(self.coeffs[0]) if self.is_integer() else hash((self.m, self.coeffs))

    def __repr__(self):
        return f"CyclotomicValue(m={self.m}, coeffs={list(self.coeffs)})"

    def to_dict(self):
        return {"m": self.m, "coeffs": list(self.coeffs)}
