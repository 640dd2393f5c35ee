"""Additive and multiplicative characters of F_q[t] and Gauss sums.

The additive character ``e(g r / f)`` is evaluated through the residue
shortcut: it equals ``E(c)`` where ``c`` is the coefficient of
``t^(deg f - 1)`` in ``g r mod f``.  Multiplicative characters are indexed by
exponent vectors against an invariant-factor basis of (F_q[t]/f)^x.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import prod

import numpy as np

from .cyclotomic import CyclotomicValue, lcm, reduce_count_array
from .errors import DomainError, IdentityFailure, ResourceError, check_cap
from .field import trace
from .poly import Poly, gcd, monic_divisors


def char_E(x):
    """E(x) = exp(2 pi i Tr(x) / p), exactly."""
    return CyclotomicValue.root(x.spec.p, trace(x))


def _check_modulus(f):
    if f.is_zero() or not f.is_monic():
        raise DomainError(f"modulus {f} must be monic and nonzero")


def additive_exponent(g, r, f):
    """k in Z/p with e(g r / f) = zeta_p^k."""
    _check_modulus(f)
    if f.degree == 0:
        return 0
    c = ((g * r) % f).coefficient(f.degree - 1)
    return f.field.trace_table[c]


def additive_char(g, r, f):
    """e(g r / f) as an exact p-th root of unity."""
    return CyclotomicValue.root(f.field.p, additive_exponent(g, r, f))


# -- vectorised residue tables ----------------------------------------------

def _digits(field, count, width):
    q = field.q
    idx = np.arange(count, dtype=np.int64)
    return np.stack([(idx // q ** i) % q for i in range(width)], axis=1) if width else \
        np.zeros((count, 0), dtype=np.int64)


@lru_cache(maxsize=256)
def residue_map(f, N):
    """Array mapping the index of every g with deg g <= N to the index of g mod f."""
    _check_modulus(f)
    fld = f.field
    q, d = fld.q, f.degree
    count = q ** (N + 1)
    check_cap("polys", count, "residue_map")
    if d == 0:
        return np.zeros(count, dtype=np.int64)
    add, mul, _, _ = fld.tables
    digits = _digits(fld, count, N + 1)
    res = np.zeros((count, d), dtype=np.int64)
    x = Poly.const(fld, 1)
    t = Poly.t(fld)
    for i in range(N + 1):
        basis = x % f
        for j in range(d):
            b = basis.coefficient(j)
            if b:
                res[:, j] = add[res[:, j], mul[digits[:, i], b]]
        x = x * t
    weights = q ** np.arange(d, dtype=np.int64)
    out = res @ weights
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def top_trace_table(f):
    """T[h, r] = Tr(coefficient of t^(d-1) in h r mod f), for residues h, r.

    The map is bilinear: with c_k the t^(d-1) coefficient of t^k mod f,
    the coefficient equals sum_{i,j} h_i r_j c_{i+j}.
    """
    _check_modulus(f)
    fld = f.field
    q, d = fld.q, f.degree
    if d == 0:
        return np.zeros((1, 1), dtype=np.int64)
    n = q ** d
    check_cap("polys", n * n, "top_trace_table")
    add, mul, _, tr = fld.tables
    t = Poly.t(fld)
    c = [((t ** k) % f).coefficient(d - 1) for k in range(2 * d - 1)]
    digits = _digits(fld, n, d)
    acc = np.zeros((n, n), dtype=np.int64)
    for i in range(d):
        hi = digits[:, i][:, None]
        for j in range(d):
            if c[i + j]:
                term = mul[mul[hi, digits[:, j][None, :]], c[i + j]]
                acc = add[acc, term]
    out = tr[acc]
    out.setflags(write=False)
    return out


# -- unit groups ---------------------------------------------------------------

def _snf_column_transform(rel):
    """Smith normal form of a square integer matrix.

    Returns ``(diag, V, Vinv)`` with ``U rel V = diag(diag)`` for some
    unimodular U.  Only the column transform is needed downstream.
    """
    k = len(rel)
    A = [list(row) for row in rel]
    V = [[int(i == j) for j in range(k)] for i in range(k)]
    W = [[int(i == j) for j in range(k)] for i in range(k)]  # W = V^-1

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        W[i], W[j] = W[j], W[i]

    def add_col(dst, src, c):  # col_dst += c * col_src
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]
        W[src] = [a - c * b for a, b in zip(W[src], W[dst])]

    for t in range(k):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(t, k) for j in range(t, k) if A[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            A[t], A[i] = A[i], A[t]
            swap_cols(t, j)
            clean = True
            for i in range(t + 1, k):
                qt = A[i][t] // A[t][t]
                if qt:
                    A[i] = [a - qt * b for a, b in zip(A[i], A[t])]
                if A[i][t]:
                    clean = False
            for j in range(t + 1, k):
                qt = A[t][j] // A[t][t]
                if qt:
                    add_col(j, t, -qt)
                if A[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next((i for i in range(t + 1, k) for j in range(t + 1, k)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            A[t] = [a + b for a, b in zip(A[t], A[bad])]
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
    return [A[i][i] for i in range(k)], V, W


@dataclass(frozen=True)
class UnitGroupDecomposition:
    """Invariant-factor decomposition of (F_q[t]/f)^x.

    ``units`` lists residue indices of the units in increasing order and
    ``dlog`` maps each to its exponent vector against ``generators``.
    """

    modulus: Poly
    generators: tuple
    orders: tuple
    units: tuple
    dlog: dict = field(repr=False, compare=False)

    @property
    def size(self):
        return len(self.units)

    @property
    def exponent(self):
        out = 1
        for d in self.orders:
            out = lcm(out, d)
        return out

    def log(self, r):
        """Exponent vector of r, or None when gcd(r, f) != 1."""
        f = self.modulus
        key = (r % f).index if f.degree > 0 else 0
        return self.dlog.get(key)

    def element(self, exponents):
        f = self.modulus
        acc = Poly.const(f.field, 1) % f if f.degree > 0 else Poly(f.field)
        for g, e, d in zip(self.generators, exponents, self.orders):
            acc = (acc * g ** (e % d)) % f
        return acc

    @property
    def log_matrix(self):
        """(phi(f), k) integer array of exponent vectors in ``units`` order."""
        return _log_matrix(self)


@lru_cache(maxsize=512)
def _log_matrix(group):
    k = len(group.orders)
    return np.array([group.dlog[u] for u in group.units], dtype=np.int64).reshape(len(group.units), k)


@lru_cache(maxsize=512)
def unit_group(f):
    _check_modulus(f)
    fld = f.field
    if f.degree == 0:
        return UnitGroupDecomposition(f, (), (), (0,), {0: ()})
    q, d = fld.q, f.degree
    if q ** d > 4 * 10 ** 6:
        raise ResourceError(f"too many residues modulo {f}")
    res = [Poly.from_index(fld, i) for i in range(q ** d)]
    units = [i for i in range(1, q ** d) if gcd(res[i], f).degree == 0]
    check_cap("units", len(units), f"unit group of {f}")
    order = len(units)

    def mulidx(a, b):
        return ((res[a] * res[b]) % f).index

    one = 1
    H = {one: ()}  # residue index -> exponent vector over chosen gens
    gens, rel = [], []
    for u in units:
        if u in H:
            continue
        # smallest k with u^k in H
        powers = [one]
        x = u
        while x not in H:
            powers.append(x)
            x = mulidx(x, u)
        k = len(powers)
        back = H[x]
        H = {mulidx(h, pw): vec + (e,) for h, vec in H.items() for e, pw in enumerate(powers)}
        gens.append(u)
        rel.append([-c for c in back] + [k])
    kk = len(gens)
    rel = [r + [0] * (kk - len(r)) for r in rel]
    if len(H) != order:
        raise AssertionError("generated subgroup is not the full unit group")  # pragma: no cover
    diag, V, W = _snf_column_transform(rel)
    if prod(diag) != order:
        raise AssertionError("Smith form does not match the group order")  # pragma: no cover
    keep = [i for i, dd in enumerate(diag) if dd > 1]
    orders = tuple(diag[i] for i in keep)
    new_gens = []
    for i in keep:
        acc = one
        for j, e in enumerate(W[i]):
            acc = mulidx(acc, _powidx(mulidx, gens[j], e % order, one))
        new_gens.append(acc)
    dlog = {}
    for key, vec in H.items():
        vec = list(vec) + [0] * (kk - len(vec))
        dlog[key] = tuple(sum(vec[j] * V[j][i] for j in range(kk)) % diag[i] for i in keep)
    for g, dd in zip(new_gens, orders):
        if _element_order(mulidx, g, one) != dd:
            raise AssertionError("generator order mismatch")  # pragma: no cover
    return UnitGroupDecomposition(f, tuple(res[g] for g in new_gens), orders,
                                  tuple(sorted(units)), dlog)


def _powidx(mulidx, x, e, one):
    acc, base = one, x
    while e:
        if e & 1:
            acc = mulidx(acc, base)
        base = mulidx(base, base)
        e >>= 1
    return acc


def _element_order(mulidx, x, one):
    k, y = 1, x
    while y != one:
        y = mulidx(y, x)
        k += 1
    return k


# -- multiplicative characters ---------------------------------------------------

@dataclass(frozen=True)
class CharacterHandle:
    group: UnitGroupDecomposition
    exponents: tuple

    @property
    def modulus(self):
        return self.group.modulus

    @property
    def value_order(self):
        """m such that all values are m-th roots of unity (lcm of orders)."""
        return self.group.exponent

    @property
    def order(self):
        out = 1
        for a, d in zip(self.exponents, self.group.orders):
            out = lcm(out, d // np.gcd(a, d))
        return int(out)

    def is_principal(self):
        return not any(self.exponents)

    def exponent(self, r):
        """k with chi(r) = zeta_m^k (m = value_order), or None if chi(r) = 0."""
        vec = self.group.log(r)
        if vec is None:
            return None
        M = self.value_order
        return sum(a * e * (M // d) for a, e, d in zip(self.exponents, vec, self.group.orders)) % M

    def __call__(self, r):
        k = self.exponent(r)
        if k is None:
            return CyclotomicValue.integer(0)
        return CyclotomicValue.root(self.value_order, k)

    def unit_exponents(self):
        """Array of exponents on ``group.units`` (vectorised evaluation)."""
        M = self.value_order
        w = np.array([a * (M // d) for a, d in zip(self.exponents, self.group.orders)],
                     dtype=np.int64)
        return (self.group.log_matrix @ w) % M if len(w) else np.zeros(self.group.size, np.int64)

    def to_dict(self):
        return {"modulus": self.modulus.to_list(), "exponents": list(self.exponents),
                "order": self.order}


def enumerate_characters(f):
    group = f if isinstance(f, UnitGroupDecomposition) else unit_group(f)
    return [CharacterHandle(group, tuple(a)) for a in product(*(range(d) for d in group.orders))]


def character_exponent_matrix(group):
    """(phi, phi) array X[c, u] with chi_c(unit u) = zeta_M^X[c, u]."""
    M = group.exponent
    if not group.orders:
        return np.zeros((1, 1), dtype=np.int64)
    A = np.array(list(product(*(range(d) for d in group.orders))), dtype=np.int64)
    A = A * np.array([M // d for d in group.orders], dtype=np.int64)
    return (A @ group.log_matrix.T) % M


@lru_cache(maxsize=512)
def _kernel_units(group, D):
    f = group.modulus
    out = []
    for u in group.units:
        r = Poly.from_index(f.field, u)
        if D.degree == 0 or (r % D) == Poly.const(f.field, 1):
            out.append(u)
    return tuple(out)


def is_primitive(chi):
    """True iff chi is not induced from any proper monic divisor of its modulus."""
    group = chi.group
    f = group.modulus
    for D in monic_divisors(f):
        if D.degree >= f.degree:
            continue
        if all(chi.exponent(Poly.from_index(f.field, u)) == 0 for u in _kernel_units(group, D)):
            return False
    return True


def gauss_sum(chi):
    """tau(chi) = sum_{r mod f} chi(r) e(r / f), exactly."""
    f = chi.modulus
    p = f.field.p
    M = chi.value_order
    L = lcm(M, p)
    counts = [0] * L
    one = Poly.const(f.field, 1)
    for u in chi.group.units:
        r = Poly.from_index(f.field, u)
        k = chi.exponent(r)
        j = additive_exponent(one, r, f)
        counts[(k * (L // M) + j * (L // p)) % L] += 1
    return CyclotomicValue.from_counts(L, counts)


def orthogonality_suite(f, mult_cap=None):
    """Exact additive and multiplicative orthogonality for modulus f.

    Additive: for every g with deg g <= 2 deg f,
    sum_{r mod f} e(g r / f) == q^deg f * [f | g].
    Multiplicative (skipped when phi(f) > mult_cap): for all residues r, s,
    sum_chi chi(r) conj(chi(s)) == phi(f) * [r == s and gcd(r, f) == 1].
    Raises IdentityFailure with a witness on the first violation.
    """
    _check_modulus(f)
    fld = f.field
    q, p, d = fld.q, fld.p, f.degree
    n = q ** d
    T = top_trace_table(f)
    counts = np.zeros((n, p), dtype=np.int64)
    for k in range(p):
        counts[:, k] = (T == k).sum(axis=1)
    per_class = reduce_count_array(counts, p)
    expected = np.zeros_like(per_class)
    expected[0, 0] = n
    bad = np.nonzero((per_class != expected).any(axis=1))[0]
    if bad.size:
        h = Poly.from_index(fld, int(bad[0]))
        raise IdentityFailure("additive orthogonality failed",
                              {"modulus": str(f), "g_mod_f": str(h)})
    rmap = residue_map(f, 2 * d)
    g_values = per_class[rmap]
    divisible = rmap == 0
    exp_g = np.zeros_like(g_values)
    exp_g[divisible, 0] = n
    if (g_values != exp_g).any():  # pragma: no cover - implied by per-class check
        raise IdentityFailure("additive orthogonality failed on g", {"modulus": str(f)})
    report = {"modulus": str(f), "additive_checked": int(rmap.size), "multiplicative_checked": 0}

    group = unit_group(f)
    phi = group.size
    if mult_cap is not None and phi > mult_cap:
        return report
    M = group.exponent
    X = character_exponent_matrix(group)  # chars x units
    if X.shape[0] != phi:
        raise IdentityFailure("number of characters differs from phi(f)", {"modulus": str(f)})
    diff = (X[:, :, None] - X[:, None, :]) % M  # chars x r x s
    pair = np.arange(phi * phi, dtype=np.int64).reshape(phi, phi)
    flat = (pair[None, :, :] * M + diff).ravel()
    cnt = np.bincount(flat, minlength=phi * phi * M).reshape(phi * phi, M)
    val = reduce_count_array(cnt, M)
    exp_m = np.zeros_like(val)
    exp_m[np.arange(phi) * (phi + 1), 0] = phi
    wrong = np.nonzero((val != exp_m).any(axis=1))[0]
    if wrong.size:
        r, s = divmod(int(wrong[0]), phi)
        raise IdentityFailure("multiplicative orthogonality failed",
                              {"modulus": str(f),
                               "r": str(Poly.from_index(fld, group.units[r])),
                               "s": str(Poly.from_index(fld, group.units[s]))})
    # non-units: every character vanishes
    unit_set = set(group.units)
    chars = enumerate_characters(group)
    for idx in range(n if d > 0 else 1):
        if idx in unit_set:
            continue
        r = Poly.from_index(fld, idx)
        if any(chi.exponent(r) is not None for chi in chars):
            raise IdentityFailure("character nonzero off the unit group",
                                  {"modulus": str(f), "r": str(r)})
    report["multiplicative_checked"] = n * n if d > 0 else 1
    return report
