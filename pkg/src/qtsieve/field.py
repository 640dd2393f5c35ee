"""Finite fields F_q = F_p[u]/(m(u)) with table-driven arithmetic.

Elements are encoded as integers ``c_0 + c_1 p + ... + c_{n-1} p^{n-1}``
where ``(c_0, ..., c_{n-1})`` are the coordinates in the basis
``1, u, ..., u^{n-1}``.  Integer order on the codes is the canonical element
order everywhere in the package: lexicographic on ``(c_{n-1}, ..., c_0)``,
so the constant coordinate is the least significant one.  For F_4 this gives
``0, 1, u, u+1``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, UsageError, check_cap

# Fixed moduli so element encodings are stable across runs.
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 2): (2, 0, 1),
    (7, 2): (1, 0, 1),
}


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_power(q):
    """Return ``(p, n)`` with ``q == p**n``; raise UsageError otherwise."""
    if q < 2:
        raise UsageError(f"q={q} is not a prime power")
    p = 2
    while q % p:
        p += 1
    n, rest = 0, q
    while rest % p == 0:
        rest //= p
        n += 1
    if rest != 1:
        raise UsageError(f"q={q} is not a prime power")
    return p, n


# -- dense polynomials over Z/p, used only to build and validate moduli -------

def _zp_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _zp_mod(a, b, p):
    a = _zp_trim(a)
    b = _zp_trim(b)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a = _zp_trim(a)
    return a


def _zp_irreducible(m, p):
    d = len(m) - 1
    if d < 1:
        return False
    # trial division by every monic polynomial of degree 1..d//2
    for k in range(1, d // 2 + 1):
        for low in range(p ** k):
            div = [(low // p ** i) % p for i in range(k)] + [1]
            if not _zp_mod(m, div, p):
                return False
    return True


def default_modulus(p, n):
    if (p, n) in DEFAULT_MODULI:
        return DEFAULT_MODULI[(p, n)]
    if n == 1:
        return (0, 1)
    for low in range(p ** n):
        m = tuple((low // p ** i) % p for i in range(n)) + (1,)
        if _zp_irreducible(m, p):
            return m
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True)
class FieldSpec:
    """The field F_{p^n} presented as F_p[u]/(modulus).

    ``modulus`` lists the coefficients of a monic irreducible polynomial of
    degree ``n`` in ascending order.  Construction validates it and builds
    the addition, multiplication and trace tables over element codes.
    """

    p: int
    n: int
    modulus: tuple
    add_table: list = field(init=False, repr=False, compare=False)
    mul_table: list = field(init=False, repr=False, compare=False)
    neg_table: list = field(init=False, repr=False, compare=False)
    inv_table: list = field(init=False, repr=False, compare=False)
    trace_table: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p, n, m = self.p, self.n, tuple(int(c) for c in self.modulus)
        object.__setattr__(self, "modulus", m)
        if not is_prime(p):
            raise UsageError(f"p={p} is not prime")
        if n < 1:
            raise UsageError("n must be positive")
        if len(m) != n + 1 or m[-1] != 1 or any(not 0 <= c < p for c in m):
            raise UsageError(f"modulus {m} is not a monic degree-{n} polynomial over Z/{p}")
        if not _zp_irreducible(m, p):
            raise UsageError(f"modulus {m} is reducible over Z/{p}")
        q = p ** n
        check_cap("field", q, "field enumeration")
        vecs = [self._vec(x) for x in range(q)]
        add = [[self._code([(a + b) % p for a, b in zip(vecs[x], vecs[y])]) for y in range(q)]
               for x in range(q)]
        mul = [[0] * q for _ in range(q)]
        for x in range(q):
            for y in range(x, q):
                mul[x][y] = mul[y][x] = self._code(self._mulvec(vecs[x], vecs[y]))
        neg = [self._code([(-a) % p for a in vecs[x]]) for x in range(q)]
        inv = [0] * q
        for x in range(1, q):
            inv[x] = next(y for y in range(1, q) if mul[x][y] == 1)
        tr = []
        for x in range(q):
            acc, power = 0, x
            for _ in range(n):
                acc = add[acc][power]
                power = self._pow_code(mul, power, p)  # Frobenius
            if acc >= p:
                raise AssertionError("trace left the prime field")  # pragma: no cover
            tr.append(acc)
        object.__setattr__(self, "add_table", add)
        object.__setattr__(self, "mul_table", mul)
        object.__setattr__(self, "neg_table", neg)
        object.__setattr__(self, "inv_table", inv)
        object.__setattr__(self, "trace_table", tr)

    # internal helpers on coordinate vectors
    def _vec(self, code):
        return [(code // self.p ** i) % self.p for i in range(self.n)]

    def _code(self, vec):
        return sum(int(c) * self.p ** i for i, c in enumerate(vec))

    def _mulvec(self, a, b):
        p, n, m = self.p, self.n, self.modulus
        prod = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] = (prod[i + j] + ai * bj) % p
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for i in range(n):
                    prod[k - n + i] = (prod[k - n + i] - c * m[i]) % p
        return prod[:n]

    @staticmethod
    def _pow_code(mul, x, e):
        acc = 1
        for _ in range(e):
            acc = mul[acc][x]
        return acc

    @property
    def q(self):
        return self.p ** self.n

    @property
    def tables(self):
        """Numpy copies of (add, mul, neg, trace) tables for vectorised code."""
        return _np_tables(self)

    def element(self, value):
        """Build an element from a code or a coordinate sequence."""
        if isinstance(value, FieldElement):
            if value.spec != self:
                raise UsageError("element belongs to a different field")
            return value
        if isinstance(value, (list, tuple)):
            if len(value) > self.n:
                raise UsageError(f"too many coordinates for F_{self.q}")
            value = self._code([int(c) % self.p for c in value])
        value = int(value)
        if not 0 <= value < self.q:
            raise UsageError(f"code {value} outside F_{self.q}")
        return FieldElement(self, value)

    def zero(self):
        return FieldElement(self, 0)

    def one(self):
        return FieldElement(self, 1)

    def render(self, code):
        """Human-readable element: ``2``, ``u``, ``u+1``, ``2*u^2+1``."""
        if self.n == 1:
            return str(code)
        terms = []
        for i, c in reversed(list(enumerate(self._vec(code)))):
            if not c:
                continue
            mono = "" if i == 0 else ("u" if i == 1 else f"u^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(terms) or "0"

    def to_dict(self):
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    @classmethod
    def from_dict(cls, data):
        return get_field(int(data["p"]), int(data["n"]), tuple(data["modulus"]))


@lru_cache(maxsize=None)
def _np_tables(spec):
    return (np.array(spec.add_table, dtype=np.int64),
            np.array(spec.mul_table, dtype=np.int64),
            np.array(spec.neg_table, dtype=np.int64),
            np.array(spec.trace_table, dtype=np.int64))


@lru_cache(maxsize=None)
def get_field(p, n=1, modulus=None):
    """Cached FieldSpec; ``modulus`` defaults to the built-in choice."""
    if modulus is None:
        if not is_prime(p):
            raise UsageError(f"p={p} is not prime")
        modulus = default_modulus(p, n)
    return FieldSpec(p, n, tuple(modulus))


def field_of_order(q):
    p, n = prime_power(q)
    return get_field(p, n)


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    value: int

    @property
    def coeffs(self):
        return tuple(self.spec._vec(self.value))

    def _check(self, other):
        if not isinstance(other, FieldElement):
            other = self.spec.element(other)
        if other.spec != self.spec:
            raise UsageError("field elements from different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FieldElement(self.spec, self.spec.add_table[self.value][other.value])

    def __sub__(self, other):
        other = self._check(other)
        s = self.spec
        return FieldElement(s, s.add_table[self.value][s.neg_table[other.value]])

    def __mul__(self, other):
        other = self._check(other)
        return FieldElement(self.spec, self.spec.mul_table[self.value][other.value])

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg_table[self.value])

    def inverse(self):
        if self.value == 0:
            raise DomainError("inverse of zero in a finite field")
        return FieldElement(self.spec, self.spec.inv_table[self.value])

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        acc = self.spec.one()
        base = self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def __bool__(self):
        return self.value != 0

    def __str__(self):
        return self.spec.render(self.value)


def field_arithmetic(a, b, op):
    """Apply ``op`` in {"add", "sub", "mul", "inv"}; ``inv`` ignores ``b``."""
    if op == "inv":
        return a.inverse()
    if b is None or a.spec != b.spec:
        raise UsageError("operands must share a FieldSpec")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise UsageError(f"unknown field operation {op!r}")


def trace(x):
    """Absolute trace F_q -> F_p, returned as an int in [0, p)."""
    return x.spec.trace_table[x.value]


def enumerate_field(spec):
    check_cap("field", spec.q, "enumerate_field")
    return [FieldElement(spec, v) for v in range(spec.q)]
