"""Exhaustive searches for the extremal sets behind the three divisibility problems.

* P-sets: no element divides the sum of two members of larger degree.
* families with every f + f' square-free (maximum clique).
* pairs of families with every fg + 1 square-free (balanced biclique).

Witnesses are the lexicographically least vertex sets (by polynomial index)
among all maxima, so reports are reproducible.
"""

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import ResourceError, UsageError, check_cap
from .field import FieldSpec, field_of_order
from .poly import Poly, gcd, is_squarefree

INV_GOLDEN = 2 / (1 + math.sqrt(5))
TWO_THIRDS = 2 / 3
REFERENCE = {"pset": INV_GOLDEN, "sqfree-sum": TWO_THIRDS, "shifted-product": TWO_THIRDS}

# node budget for the exact biclique search before falling back to bounds
BICLIQUE_NODE_BUDGET = 2_000_000


def _field(q):
    return q if isinstance(q, FieldSpec) else field_of_order(q)


def monic_up_to(fld, N):
    """Monic polynomials of degree <= N in index order (degree, then coefficients)."""
    q = fld.q
    return [Poly.from_index(fld, i) for d in range(N + 1) for i in range(q ** d, 2 * q ** d)]


@dataclass
class ExtremalReport:
    kind: str
    q: int
    N: int
    max_size: int
    witness: tuple
    flags: dict = field(default_factory=dict)
    exact: bool = True
    upper_bound: int = None
    bound_method: str = None

    @property
    def empirical_exponent(self):
        if self.N == 0 or self.max_size <= 0:
            return None
        return math.log(self.max_size, self.q) / self.N

    @property
    def reference_exponent(self):
        return REFERENCE[self.kind]

    def to_dict(self):
        exp = self.empirical_exponent
        return {
            "kind": self.kind, "q": self.q, "N": self.N, "flags": dict(self.flags),
            "max_size": self.max_size, "exact": self.exact,
            "upper_bound": self.upper_bound, "bound_method": self.bound_method,
            "witness": [[str(f) for f in part] for part in self.witness],
            "empirical_exponent": None if exp is None else round(exp, 12),
            "reference_exponent": round(self.reference_exponent, 12),
        }


# -- P-sets -------------------------------------------------------------------------

def is_pset(S, require_coprime=False):
    """(True, None) if S is a P-set, else (False, witness).

    The witness is ("divides", P, U, V) or ("not-coprime", A, B).
    """
    S = sorted(set(S), key=lambda f: f.index)
    for f in S:
        if not f.is_monic():
            raise UsageError(f"{f} is not monic")
    if require_coprime:
        for i, A in enumerate(S):
            for B in S[i + 1:]:
                if gcd(A, B).degree != 0:
                    return False, ("not-coprime", A, B)
    for P in S:
        larger = [U for U in S if U.degree > P.degree]
        for i, U in enumerate(larger):
            for V in larger[i:]:
                if P.divides(U + V):
                    return False, ("divides", P, U, V)
    return True, None


def _pset_extends(current, X, require_coprime):
    for P in current:
        if require_coprime and gcd(P, X).degree != 0:
            return False
        if P.degree < X.degree:
            if P.divides(X + X):
                return False
            for V in current:
                if V.degree > P.degree and P.divides(X + V):
                    return False
    return True


def max_pset(q, N, require_coprime=False):
    """Exact maximum P-set among monic polynomials of degree <= N.

    Depth-first search in index order (so by degree), including before
    excluding; the first set of maximal size found is the lexicographically
    least.  Being a P-set is inherited by subsets, so pruning on a violation
    is exact.
    """
    fld = _field(q)
    cands = monic_up_to(fld, N)
    check_cap("pset", len(cands), "max_pset candidates")
    best = []
    cur = []

    def dfs(i):
        nonlocal best
        if len(cur) > len(best):
            best = list(cur)
        if i == len(cands) or len(cur) + len(cands) - i <= len(best):
            return
        X = cands[i]
        if _pset_extends(cur, X, require_coprime):
            cur.append(X)
            dfs(i + 1)
            cur.pop()
        dfs(i + 1)

    dfs(0)
    flags = {"require_coprime": bool(require_coprime), "char2": fld.p == 2}
    rep = ExtremalReport("pset", fld.q, N, len(best), (tuple(best),), flags)
    ok, witness = is_pset(best, require_coprime)
    if not ok:  # pragma: no cover - internal consistency
        raise AssertionError(f"search witness is not a P-set: {witness}")
    return rep


# -- maximum clique ---------------------------------------------------------------

def _color_bound(P, adj):
    """Greedy colouring of the vertex bitset P; returns the number of colours."""
    colors = 0
    while P:
        colors += 1
        Q = P
        while Q:
            v = (Q & -Q).bit_length() - 1
            Q &= ~adj[v] & ~(1 << v)
            P &= ~(1 << v)
    return colors


def max_clique(adj):
    """Lexicographically least maximum clique of a graph given as neighbour bitsets.

    Branch and bound: vertices are tried in increasing order, including
    before excluding, and a branch is cut when its size plus a greedy
    colouring bound of the candidates cannot beat the incumbent.
    """
    n = len(adj)
    check_cap("clique", n, "max_clique vertices")
    best = []
    cur = []

    def expand(P):
        nonlocal best
        if not P:
            if len(cur) > len(best):
                best = list(cur)
            return
        if len(cur) + _color_bound(P, adj) <= len(best):
            return
        while P:
            if len(cur) + bin(P).count("1") <= len(best):
                return
            v = (P & -P).bit_length() - 1
            cur.append(v)
            expand(P & adj[v] & ~((1 << (v + 1)) - 1))
            cur.pop()
            P &= ~(1 << v)
            if len(cur) > len(best):
                best = list(cur)

    expand((1 << n) - 1)
    return best


def _sqfree_graph(fld, N, include_self_pairs):
    verts = monic_up_to(fld, N)
    if include_self_pairs:
        verts = [f for f in verts if is_squarefree(f + f)]
    check_cap("clique", len(verts), "square-free-sum graph")
    adj = [0] * len(verts)
    for i, f in enumerate(verts):
        for j in range(i + 1, len(verts)):
            if is_squarefree(f + verts[j]):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return verts, adj


def is_sqfree_sum_family(F, include_self_pairs=True):
    F = list(F)
    for i, f in enumerate(F):
        for g in F[i if include_self_pairs else i + 1:]:
            if not is_squarefree(f + g):
                return False
    return True


def max_sqfree_sum_family(q, N, include_self_pairs=True):
    fld = _field(q)
    verts, adj = _sqfree_graph(fld, N, include_self_pairs)
    clique = max_clique(adj)
    witness = tuple(verts[i] for i in clique)
    if not is_sqfree_sum_family(witness, include_self_pairs):  # pragma: no cover
        raise AssertionError("clique witness fails the square-free predicate")
    flags = {"include_self_pairs": bool(include_self_pairs), "char2": fld.p == 2}
    return ExtremalReport("sqfree-sum", fld.q, N, len(witness), (witness,), flags)


# -- balanced biclique --------------------------------------------------------------

def _shifted_graph(fld, N, include_all_pairs):
    verts = monic_up_to(fld, N)
    check_cap("biclique", len(verts), "shifted-product graph")
    one = Poly.const(fld, 1)
    adj = [0] * len(verts)
    for i, f in enumerate(verts):
        for j, g in enumerate(verts):
            if (not include_all_pairs and i == j) or is_squarefree(f * g + one):
                adj[i] |= 1 << j
    return verts, adj


def is_shifted_product_pair(F, G, include_all_pairs=True):
    if not F or not G:
        return True
    one = Poly.const((list(F) + list(G))[0].field, 1)
    return all((not include_all_pairs and f == g) or is_squarefree(f * g + one)
               for f in F for g in G)


def _balanced_biclique(adj, n, budget):
    """Exact max of min(|A|, |B|) with B the common neighbourhood of A.

    Returns (value, A, B, finished).  ``finished`` is False when the node
    budget ran out, in which case the value is only a lower bound.
    """
    best = (0, [], 0)
    nodes = 0
    cur = []
    full = (1 << n) - 1

    def dfs(i, common):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            return False
        size = min(len(cur), bin(common).count("1"))
        if size > best[0]:
            best = (size, list(cur), common)
        if i == n or min(len(cur) + n - i, bin(common).count("1")) <= best[0]:
            return True
        nxt = common & adj[i]
        if bin(nxt).count("1") > best[0]:
            cur.append(i)
            ok = dfs(i + 1, nxt)
            cur.pop()
            if not ok:
                return False
        return dfs(i + 1, common)

    finished = dfs(0, full)
    return best[0], best[1], best[2], finished


def _degree_count_bound(adj, n):
    """Largest k with at least k vertices of degree >= k."""
    degs = sorted((bin(a).count("1") for a in adj), reverse=True)
    k = 0
    while k < n and degs[k] >= k + 1:
        k += 1
    return k


def max_shifted_product_family(q, N, include_all_pairs=True, budget=BICLIQUE_NODE_BUDGET):
    """Maximise min(#F, #G) with fg + 1 square-free for all f in F, g in G.

    With ``include_all_pairs=False`` the pairs with f == g are exempt.  The
    search is exact unless the node budget runs out; then the report carries
    the best pair found as a lower bound and a degree-count upper bound.
    """
    fld = _field(q)
    verts, adj = _shifted_graph(fld, N, include_all_pairs)
    n = len(verts)
    value, A, common, finished = _balanced_biclique(adj, n, budget)
    B = [j for j in range(n) if common >> j & 1]
    F = tuple(verts[i] for i in A[:value])
    G = tuple(verts[j] for j in B[:value])
    if not is_shifted_product_pair(F, G, include_all_pairs):  # pragma: no cover
        raise AssertionError("biclique witness fails the shifted-product predicate")
    flags = {"include_all_pairs": bool(include_all_pairs), "char2": fld.p == 2}
    rep = ExtremalReport("shifted-product", fld.q, N, value, (F, G), flags, exact=finished)
    if not finished:
        rep.upper_bound = _degree_count_bound(adj, n)
        rep.bound_method = "degree-count"
    return rep


# -- trajectories -----------------------------------------------------------------------

SEARCHES = {
    "pset": lambda q, N, flag: max_pset(q, N, flag),
    "sqfree-sum": lambda q, N, flag: max_sqfree_sum_family(q, N, flag),
    "shifted-product": lambda q, N, flag: max_shifted_product_family(q, N, flag),
}
DEFAULT_FLAG = {"pset": False, "sqfree-sum": True, "shifted-product": True}


def exponent_trajectory(kind, q, N_range, flag=None):
    """Rows (N, max_size, empirical_exponent, reference_exponent) for each N."""
    if kind not in SEARCHES:
        raise UsageError(f"unknown problem kind {kind!r}")
    flag = DEFAULT_FLAG[kind] if flag is None else flag
    rows = []
    for N in N_range:
        try:
            rep = SEARCHES[kind](q, N, flag)
        except ResourceError:
            break
        d = rep.to_dict()
        rows.append({"N": N, "max_size": rep.max_size, "exact": rep.exact,
                     "empirical_exponent": d["empirical_exponent"],
                     "reference_exponent": d["reference_exponent"]})
    return rows


def trajectory_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["N", "max_size", "exact", "empirical_exponent",
                                             "reference_exponent"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
