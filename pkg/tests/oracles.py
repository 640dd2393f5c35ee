"""Independent reference implementations used only by the tests.

None of these reuse the package's shortcuts: additive characters come from
a Laurent expansion at infinity, eigenvalues from the cluster structure of
Laurent prefixes, and the searches from plain subset enumeration.
"""

import cmath
import itertools
from collections import Counter

import numpy as np


# -- raw field and polynomial helpers (coefficient lists, ascending) ------------------

def f_add(fld, a, b):
    return fld.add_table[a][b]


def f_mul(fld, a, b):
    return fld.mul_table[a][b]


def f_neg(fld, a):
    return fld.neg_table[a]


def trace_by_frobenius(fld, x):
    """Tr(x) = x + x^p + ... + x^(p^(n-1)), projected to F_p (its constant coordinate)."""
    total, power = 0, x
    for _ in range(fld.n):
        total = f_add(fld, total, power)
        nxt = 1
        for _ in range(fld.p):
            nxt = f_mul(fld, nxt, power)
        power = nxt
    assert total < fld.p, "trace must land in the prime field"
    return total


def poly_mul_raw(fld, a, b):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = f_add(fld, out[i + j], f_mul(fld, x, y))
    return out


def laurent_tail(fld, h, f, depth):
    """Coefficients of t^-1, ..., t^-depth in the expansion of h / f at infinity.

    f must be monic.  1/f = t^-d * sum_j b_j t^-j with b_0 = 1 and
    b_j = -sum_{i=1..j} f_{d-i} b_{j-i}; the t^-k coefficient of h/f is
    sum_i h_i b_{i-d+k}.
    """
    d = len(f) - 1
    assert f[-1] == 1
    top = len(h) + depth
    b = [1]
    for j in range(1, top + 1):
        acc = 0
        for i in range(1, min(j, d) + 1):
            acc = f_add(fld, acc, f_mul(fld, f[d - i], b[j - i]))
        b.append(f_neg(fld, acc))
    out = []
    for k in range(1, depth + 1):
        acc = 0
        for i, hi in enumerate(h):
            j = i - d + k
            if j >= 0 and hi:
                acc = f_add(fld, acc, f_mul(fld, hi, b[j]))
        out.append(acc)
    return out


def laurent_additive_exponent(fld, g, r, f):
    """Exponent k in Z/p with e(g r / f) = zeta_p^k, via the Laurent oracle."""
    h = poly_mul_raw(fld, g, r)
    if not h:
        return 0
    a_minus_1 = laurent_tail(fld, h, f, 1)[0]
    return trace_by_frobenius(fld, a_minus_1)


def coeffs_of(poly):
    return [poly.coefficient(i) for i in range(poly.degree + 1)] if not poly.is_zero() else []


# -- large sieve oracles --------------------------------------------------------------

def farey_points(moduli):
    from qtsieve.poly import Poly, gcd

    out = []
    for f in sorted(moduli, key=lambda m: m.index):
        fld = f.field
        for i in range(fld.q ** f.degree if f.degree else 1):
            r = Poly.from_index(fld, i)
            if f.degree == 0 or gcd(r, f).degree == 0:
                out.append((f, r))
    return out


def cluster_lambda(fld, N, moduli):
    """Largest Gram eigenvalue from the cluster structure.

    sum_{deg g <= N} e(g alpha) is q^(N+1) when the t^-1 .. t^-(N+1) Laurent
    coefficients of alpha vanish and 0 otherwise, so the Gram matrix is
    q^(N+1) times the all-ones blocks of equal Laurent prefixes.
    """
    prefixes = Counter()
    for f, r in farey_points(moduli):
        prefixes[tuple(laurent_tail(fld, coeffs_of(r), coeffs_of(f), N + 1))] += 1
    if not prefixes:
        return 0
    return fld.q ** (N + 1) * max(prefixes.values())


def brute_exponential_sum(fld, N, coeffs, f, r):
    """sum_g a_g e(g r / f) with characters from the Laurent oracle."""
    from qtsieve.poly import Poly

    total = 0j
    zeta = cmath.exp(2j * cmath.pi / fld.p)
    for idx, a in enumerate(coeffs):
        if a:
            g = Poly.from_index(fld, idx)
            k = laurent_additive_exponent(fld, coeffs_of(g), coeffs_of(r), coeffs_of(f))
            total += a * zeta ** k
    return total


def brute_sieve_lhs(fld, N, moduli, coeffs):
    return sum(abs(brute_exponential_sum(fld, N, coeffs, f, r)) ** 2
               for f, r in farey_points(moduli))


# -- search oracles ---------------------------------------------------------------------

def clique_by_subsets(adj):
    """Maximum clique size by scanning every vertex subset (numpy, n <= 22)."""
    n = len(adj)
    if n == 0:
        return 0
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    for v in range(n):
        has_v = (masks >> v) & 1 == 1
        allowed = adj[v] | (1 << v)
        ok &= ~has_v | ((masks & ~allowed) == 0)
    sizes = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        sizes += (masks >> v) & 1
    return int(sizes[ok].max())


def pset_by_subsets(polys, predicate):
    """Largest subset passing ``predicate``, by enumerating subsets by size."""
    polys = list(polys)
    for size in range(len(polys), 0, -1):
        for combo in itertools.combinations(polys, size):
            if predicate(combo):
                return size
    return 0


def biclique_by_subsets(adj, n):
    best = 0
    for mask in range(1, 1 << n):
        common = (1 << n) - 1
        for i in range(n):
            if mask >> i & 1:
                common &= adj[i]
        best = max(best, min(bin(mask).count("1"), bin(common).count("1")))
    return best


def reducible_by_products(fld, d):
    """Indices of reducible monic degree-d polynomials, as products of lower-degree monics."""
    from qtsieve.poly import iter_monic

    out = set()
    for i in range(1, d // 2 + 1):
        for a in iter_monic(fld, i):
            for b in iter_monic(fld, d - i):
                out.add((a * b).index)
    return out
