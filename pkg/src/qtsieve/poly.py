"""Dense polynomials over F_q and the multiplicative structure of F_q[t].

A ``Poly`` stores ascending coefficient codes (see ``field``) with no
trailing zeros.  The integer ``index`` ``sum c_i q^i`` is the enumeration
order used everywhere: all polynomials of degree <= N are exactly the
indices ``0 .. q^(N+1)-1`` and monic polynomials of degree d occupy
``q^d .. 2 q^d - 1``.
"""

from functools import lru_cache

from .errors import DomainError, UsageError, check_cap
from .field import FieldSpec, field_of_order

NEG_INF = float("-inf")


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class Poly:
    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field, coeffs=()):
        if not isinstance(field, FieldSpec):
            raise UsageError("Poly needs a FieldSpec")
        q = field.q
        coeffs = _trim(int(c) for c in coeffs)
        if any(not 0 <= c < q for c in coeffs):
            raise UsageError(f"coefficient outside F_{q}: {coeffs}")
        self.field = field
        self.coeffs = coeffs
        self._hash = None

    # -- construction ------------------------------------------------------
    @classmethod
    def from_index(cls, field, index):
        q = field.q
        out = []
        while index:
            index, c = divmod(index, q)
            out.append(c)
        return cls(field, out)

    @classmethod
    def t(cls, field):
        return cls(field, (0, 1))

    @classmethod
    def const(cls, field, c):
        return cls(field, (field.element(c).value,))

    @classmethod
    def parse(cls, field, text):
        """Parse the rendering produced by ``str``, e.g. ``t^2+2*t+1``.

        Coefficients are codes (``2``) or, for n > 1, bracketed field
        renderings such as ``(u+1)*t``.
        """
        text = text.replace(" ", "")
        if text == "0":
            return cls(field)
        terms, depth, cur = [], 0, ""
        for ch in text:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == "+" and depth == 0:
                terms.append(cur)
                cur = ""
            else:
                cur += ch
        terms.append(cur)
        coeffs = {}
        for term in terms:
            coef, _, mono = term.rpartition("*") if "t" in term else (term, "", "")
            if "t" not in term:
                coef, mono = term, ""
            elif not coef:
                coef = "1"
            if mono == "":
                exp = 0
            elif mono == "t":
                exp = 1
            elif mono.startswith("t^"):
                exp = int(mono[2:])
            else:
                raise UsageError(f"cannot parse term {term!r}")
            code = _parse_field_code(field, coef.strip("()"))
            coeffs[exp] = field.add_table[coeffs.get(exp, 0)][code]
        top = max(coeffs) if coeffs else -1
        return cls(field, [coeffs.get(i, 0) for i in range(top + 1)])

    # -- basic properties ----------------------------------------------------
    @property
    def q(self):
        return self.field.q

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def index(self):
        q = self.field.q
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self):
        return not self.coeffs

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def norm(self):
        """|f|_inf = q^deg f, and 0 for the zero polynomial."""
        return 0 if self.is_zero() else self.field.q ** self.degree

    def coefficient(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    # -- arithmetic ----------------------------------------------------------
    def _same(self, other):
        if isinstance(other, int):
            return Poly.const(self.field, other)
        if not isinstance(other, Poly):
            return NotImplemented
        if other.field != self.field:
            raise UsageError("polynomials over different fields")
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        add = self.field.add_table
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = add[out[i]][c]
        return Poly(self.field, out)

    __radd__ = __add__

    def __neg__(self):
        neg = self.field.neg_table
        return Poly(self.field, [neg[c] for c in self.coeffs])

    def __sub__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(self.field)
        add, mul = self.field.add_table, self.field.mul_table
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                row = mul[ai]
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] = add[out[i + j]][row[bj]]
        return Poly(self.field, out)

    __rmul__ = __mul__

    def scale(self, c):
        mul = self.field.mul_table[c]
        return Poly(self.field, [mul[x] for x in self.coeffs])

    def __divmod__(self, other):
        other = self._same(other)
        if other.is_zero():
            raise DomainError("polynomial division by zero")
        fld = self.field
        add, mul, neg = fld.add_table, fld.mul_table, fld.neg_table
        b = other.coeffs
        db = len(b) - 1
        inv_lead = fld.inv_table[b[-1]]
        rem = list(self.coeffs)
        quot = [0] * max(len(rem) - db, 0)
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k]
            if c:
                factor = mul[c][inv_lead]
                quot[k - db] = factor
                nf = neg[factor]
                for i, bi in enumerate(b):
                    if bi:
                        rem[k - db + i] = add[rem[k - db + i]][mul[nf][bi]]
        return Poly(fld, quot), Poly(fld, rem[:db] if db > 0 else ())

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, e):
        acc = Poly.const(self.field, 1)
        base = self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def monic(self):
        if self.is_zero():
            raise DomainError("the zero polynomial has no monic associate")
        return self.scale(self.field.inv_table[self.lead])

    def divides(self, other):
        """True iff self | other (every polynomial divides 0)."""
        if self.is_zero():
            return other.is_zero()
        return (other % self).is_zero()

    # -- protocol ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.field, other % self.field.q) if other < self.field.q else None
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.p, self.field.n, self.coeffs))
        return self._hash

    def __lt__(self, other):
        return self.index < other.index

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        fld = self.field
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            cs = fld.render(c)
            if fld.n > 1 and "+" in cs and mono:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{cs}*{mono}")
        return "+".join(parts)

    def to_list(self):
        """Ascending coefficients as coordinate vectors (serialised form)."""
        return [list(self.field._vec(c)) for c in self.coeffs]

    @classmethod
    def from_list(cls, field, data):
        return cls(field, [field.element(list(v)).value for v in data])


def _parse_field_code(field, text):
    if field.n == 1:
        return int(text) % field.p
    vec = [0] * field.n
    for term in text.split("+"):
        coef, _, mono = term.rpartition("*") if "u" in term else (term, "", "")
        if "u" not in term:
            vec[0] = (vec[0] + int(term)) % field.p
            continue
        coef = int(coef) if coef else 1
        exp = 1 if mono == "u" else int(mono[2:])
        vec[exp] = (vec[exp] + coef) % field.p
    return field.element(vec).value


# -- ring operations ---------------------------------------------------------

def gcd(a, b):
    """Monic gcd; gcd(0, 0) is undefined."""
    if a.is_zero() and b.is_zero():
        raise DomainError("gcd(0, 0) is undefined")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_arithmetic(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "divmod":
        return divmod(a, b)
    if op == "gcd":
        return gcd(a, b)
    raise UsageError(f"unknown polynomial operation {op!r}")


def formal_derivative(f):
    p = f.field.p
    add = f.field.add_table
    out = []
    for k in range(1, len(f.coeffs)):
        acc = 0
        for _ in range(k % p):  # (k mod p) * c as repeated addition
            acc = add[acc][f.coeffs[k]]
        out.append(acc)
    return Poly(f.field, out)


def is_squarefree(f):
    """0 is not square-free; nonzero constants are."""
    if f.is_zero():
        return False
    if f.degree == 0:
        return True
    d = formal_derivative(f)
    if d.is_zero():
        return False  # f is a p-th power
    return gcd(f, d).degree == 0


def is_irreducible(f):
    if f.is_zero() or f.degree < 1:
        raise DomainError("irreducibility is only defined for degree >= 1")
    m = f.monic()
    for d in range(1, m.degree // 2 + 1):
        for P in irreducibles(m.field, d):
            if P.divides(m):
                return False
    return True


@lru_cache(maxsize=None)
def _irreducibles(field, d):
    return tuple(f for f in iter_monic(field, d) if is_irreducible(f))


def irreducibles(field, d):
    """Monic irreducibles of exact degree d, in index order."""
    return _irreducibles(field, d)


def iter_monic(field, d):
    q = field.q
    base = q ** d
    for k in range(base):
        yield Poly.from_index(field, base + k)


def enumerate_polys(q, d, mode="monic-exact-degree"):
    """List polynomials over F_q.

    ``monic-exact-degree`` yields the q^d monic polynomials of degree d;
    ``all-deg-at-most`` yields all q^(d+1) polynomials of degree <= d,
    including 0.  Both are in index order.
    """
    field = q if isinstance(q, FieldSpec) else field_of_order(q)
    qq = field.q
    if mode == "monic-exact-degree":
        check_cap("polys", qq ** d, "enumerate_polys")
        return list(iter_monic(field, d))
    if mode == "all-deg-at-most":
        if d < 0:
            return [Poly(field)]
        check_cap("polys", qq ** (d + 1), "enumerate_polys")
        return [Poly.from_index(field, i) for i in range(qq ** (d + 1))]
    if mode == "monic-deg-at-most":
        check_cap("polys", 2 * qq ** d, "enumerate_polys")
        return [f for k in range(d + 1) for f in iter_monic(field, k)]
    raise UsageError(f"unknown enumeration mode {mode!r}")


def factorize(f):
    """Factor f into monic irreducibles: ``{P: multiplicity}`` (index order).

    The leading coefficient is ``f.lead``; ``lead * prod P^e == f``.
    """
    if f.is_zero():
        raise DomainError("cannot factor the zero polynomial")
    rest = f.monic()
    out = {}
    d = 1
    while rest.degree >= 2 * d:
        for P in irreducibles(f.field, d):
            while True:
                quo, rem = divmod(rest, P)
                if not rem.is_zero():
                    break
                out[P] = out.get(P, 0) + 1
                rest = quo
        d += 1
    if rest.degree >= 1:
        out[rest] = out.get(rest, 0) + 1
    return dict(sorted(out.items(), key=lambda kv: kv[0].index))


def euler_phi(f):
    if f.is_zero():
        raise DomainError("phi(0) is undefined")
    q = f.field.q
    phi = 1
    for P, k in factorize(f).items():
        d = P.degree
        phi *= q ** (k * d) - q ** ((k - 1) * d)
    return phi


def mobius(n):
    if n < 1:
        raise DomainError("mobius needs n >= 1")
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def count_irreducibles(q, d):
    """Number of monic irreducibles of degree d: (1/d) sum_{e|d} mu(e) q^(d/e)."""
    if d < 1:
        raise DomainError("degree must be >= 1")
    total = sum(mobius(e) * q ** (d // e) for e in range(1, d + 1) if d % e == 0)
    return total // d


def monic_divisors(f):
    """All monic divisors of f in index order."""
    divs = [Poly.const(f.field, 1)]
    for P, k in factorize(f).items():
        divs = [D * P ** j for D in divs for j in range(k + 1)]
    return sorted(divs, key=lambda D: D.index)


def residues(f):
    """Canonical residues mod f: all polynomials of degree < deg f."""
    q = f.field.q
    return [Poly.from_index(f.field, i) for i in range(q ** f.degree)]
