"""Both sides of the sparse-moduli large sieve over F_q[t].

The quadratic form is

    sum_{f in S} sum_{r mod f, (r, f) = 1} |sum_{deg g <= N} a_g e(g r / f)|^2

and its best constant is the largest eigenvalue of the Gram matrix of the
character vectors.  All character exponents are built once per modulus as
an integer matrix ``K[point, g]`` in Z/p, so every sum is exact before it is
embedded in C.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .characters import (character_exponent_matrix, enumerate_characters, is_primitive,
                         residue_map, top_trace_table, unit_group)
from .cyclotomic import CyclotomicValue, reduce_count_array
from .errors import IdentityFailure, NumericError, ResourceError, UsageError, cap, check_cap
from .field import FieldSpec, field_of_order
from .poly import Poly, euler_phi, gcd, iter_monic, irreducibles

log = logging.getLogger(__name__)

POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000
DUALITY_RTOL = 1e-6


def _field(q):
    return q if isinstance(q, FieldSpec) else field_of_order(q)


def _validate_moduli(field, Q, moduli):
    seen = set()
    for f in moduli:
        if f.field != field:
            raise UsageError("modulus over a different field")
        if f.is_zero() or not f.is_monic():
            raise UsageError(f"modulus {f} is not monic and nonzero")
        if f.degree > Q:
            raise UsageError(f"modulus {f} has degree > Q={Q}")
        if f in seen:
            raise UsageError(f"duplicate modulus {f}")
        seen.add(f)


@dataclass(frozen=True)
class FareySystem:
    """Points (f, r) with f in S and r a unit mod f (r = 0 for f = 1)."""

    points: tuple

    @classmethod
    def of(cls, moduli):
        pts = []
        for f in sorted(moduli, key=lambda m: m.index):
            for u in unit_group(f).units:
                pts.append((f, Poly.from_index(f.field, u)))
        return cls(tuple(pts))

    def __len__(self):
        return len(self.points)


@dataclass
class SieveInstance:
    field: FieldSpec
    N: int
    Q: int
    moduli: tuple
    coeffs: np.ndarray = None

    def __post_init__(self):
        self.field = _field(self.field)
        self.moduli = tuple(sorted(self.moduli, key=lambda m: m.index))
        _validate_moduli(self.field, self.Q, self.moduli)
        size = self.field.q ** (self.N + 1)
        if self.coeffs is None:
            self.coeffs = np.zeros(size, dtype=complex)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (size,):
            raise UsageError(f"expected {size} coefficients (all deg g <= {self.N}), "
                             f"got shape {self.coeffs.shape}")

    @property
    def q(self):
        return self.field.q

    @property
    def farey(self):
        return FareySystem.of(self.moduli)

    def with_coeffs(self, coeffs):
        return SieveInstance(self.field, self.N, self.Q, self.moduli, coeffs)

    def trivial_constant(self):
        """q^(N+1) + #S q^(Q-1)."""
        q = self.q
        return q ** (self.N + 1) + len(self.moduli) * q ** (self.Q - 1)

    def conjecture_base(self):
        """q^N + #S q^Q, the base of the epsilon-weakened bound."""
        q = self.q
        return q ** self.N + len(self.moduli) * q ** self.Q


# -- exponent matrices ----------------------------------------------------------

def exponent_matrix(field, N, moduli):
    """K[i, g] in Z/p with e(g r_i / f_i) = zeta_p^K[i, g], points in Farey order."""
    field = _field(field)
    blocks = []
    for f in sorted(moduli, key=lambda m: m.index):
        units = np.array(unit_group(f).units, dtype=np.int64)
        T = top_trace_table(f)
        rmap = residue_map(f, N)
        blocks.append(T[np.ix_(units, rmap)] if f.degree else np.zeros((1, rmap.size), np.int64))
    if not blocks:
        return np.zeros((0, field.q ** (N + 1)), dtype=np.int64)
    return np.vstack(blocks)


def _roots(p):
    return np.exp(2j * np.pi * np.arange(p) / p)


def exponential_sum(instance, f, r):
    """sum_{deg g <= N} a_g e(g r / f) for one Farey point."""
    if f not in instance.moduli:
        raise UsageError(f"{f} is not one of the instance moduli")
    if f.degree > 0 and gcd(r, f).degree != 0:
        raise UsageError(f"({r}, {f}) is not a Farey point")
    fld = instance.field
    if f.degree == 0:
        k = np.zeros(fld.q ** (instance.N + 1), dtype=np.int64)
    else:
        k = top_trace_table(f)[(r % f).index][residue_map(f, instance.N)]
    return complex(np.dot(instance.coeffs, _roots(fld.p)[k]))


def sieve_lhs(instance):
    K = exponent_matrix(instance.field, instance.N, instance.moduli)
    if K.shape[0] == 0:
        return 0.0
    A = _roots(instance.field.p)[K]
    return float(np.sum(np.abs(A @ instance.coeffs) ** 2))


def exact_exponential_sums(field, N, modulus, coeffs, residues=None):
    """Exact S(r / f) for integer coefficients, as count vectors over Z/p.

    Returns an integer array ``C[r, k] = sum_{g : e(g r/f) = zeta^k} a_g`` for
    every residue r mod f (or the given residue indices).
    """
    field = _field(field)
    p = field.p
    coeffs = np.asarray(coeffs, dtype=np.int64)
    if modulus.degree == 0:
        out = np.zeros((1, p), dtype=np.int64)
        out[0, 0] = coeffs.sum()
        return out
    T = top_trace_table(modulus)
    rmap = residue_map(modulus, N)
    rows = np.arange(T.shape[0]) if residues is None else np.asarray(residues, dtype=np.int64)
    K = T[np.ix_(rows, rmap)]
    out = np.zeros((len(rows), p), dtype=np.int64)
    for k in range(p):
        out[:, k] = (np.where(K == k, coeffs[None, :], 0)).sum(axis=1)
    return out


def exact_abs2(counts, p):
    """|sum_k c_k zeta_p^k|^2 for each row of ``counts``, reduced mod Phi_p."""
    counts = np.asarray(counts, dtype=np.int64)
    auto = np.stack([np.sum(counts * np.roll(counts, m, axis=-1), axis=-1) for m in range(p)],
                    axis=-1)
    return reduce_count_array(auto, p)


# -- Gram matrices and the operator norm --------------------------------------------

def _difference_counts(K, p, side):
    """C[d][i, j] = #{k : K_i[k] - K_j[k] = d}, along rows ("point") or columns."""
    M = K if side == "point" else K.T
    onehot = [(M == k).astype(np.float64) for k in range(p)]
    counts = []
    for d in range(p):
        acc = np.zeros((M.shape[0], M.shape[0]))
        for k in range(p):
            acc += onehot[k] @ onehot[(k - d) % p].T
        counts.append(np.rint(acc).astype(np.int64))
    return np.stack(counts, axis=-1)


def gram_matrix(field, N, moduli, side="point"):
    """Exact Gram matrix of the character vectors.

    ``side="point"`` gives G[x, y] = sum_{deg g <= N} e(g (x - y)) indexed by
    Farey points; ``side="coefficient"`` gives the dual Gram indexed by g.
    Returns ``(G_complex, G_exact)`` where ``G_exact[..., :]`` is the reduced
    cyclotomic coefficient vector of each entry.
    """
    field = _field(field)
    K = exponent_matrix(field, N, moduli)
    n = K.shape[0] if side == "point" else K.shape[1]
    check_cap("gram", n, f"{side}-side Gram matrix")
    p = field.p
    counts = _difference_counts(K, p, side)
    exact = reduce_count_array(counts, p)
    G = counts.astype(np.float64) @ _roots(p)
    return G, exact


def power_iteration(G, tol=POWER_TOL, max_iter=POWER_MAX_ITER, seed=0):
    """Largest eigenvalue of a Hermitian PSD matrix and a unit eigenvector.

    Starts from a fixed seeded complex Gaussian vector; stops once the
    Rayleigh quotient moves by less than ``tol`` (relative) between sweeps.
    """
    n = G.shape[0]
    if n == 0:
        return 0.0, np.zeros(0, dtype=complex), 0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam = float(np.real(np.vdot(x, G @ x)))
    drift = math.inf
    for it in range(1, max_iter + 1):
        y = G @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, x, it
        x = y / ny
        new = float(np.real(np.vdot(x, G @ x)))
        drift = abs(new - lam) / max(abs(new), 1e-300)
        lam = new
        if drift < tol:
            return lam, x, it
    raise NumericError(f"power iteration did not converge in {max_iter} steps", residual=drift)


@dataclass
class OperatorNorm:
    lam: float
    witness: np.ndarray          # unit coefficient vector attaining lam
    point_lam: float = None
    coefficient_lam: float = None
    iterations: int = 0

    @property
    def duality_checked(self):
        return self.point_lam is not None and self.coefficient_lam is not None


def operator_norm(q, N, S, duality=True, seed=0):
    """sup_a LHS / sum |a_g|^2 over the Farey points of S.

    With ``duality=True`` both Gram matrices are diagonalised and must agree
    to 1e-6 relative; otherwise only the smaller one is used.
    """
    field = _field(q)
    S = tuple(sorted(S, key=lambda m: m.index))
    K = exponent_matrix(field, N, S)
    npts, ncoef = K.shape
    if npts == 0:
        return OperatorNorm(0.0, np.zeros(ncoef, dtype=complex), 0.0, 0.0)
    A = _roots(field.p)[K]
    gram_cap = cap("gram")
    sides = ["point", "coefficient"] if duality else [("point" if npts <= ncoef else "coefficient")]
    if duality and max(npts, ncoef) > gram_cap:
        raise ResourceError(f"duality check needs a {max(npts, ncoef)}-square Gram matrix")
    lam_point = lam_coef = None
    witness = None
    iters = 0
    for side in sides:
        G, _ = gram_matrix(field, N, S, side)
        lam, vec, it = power_iteration(G, seed=seed)
        iters += it
        if side == "point":
            lam_point = lam
            if witness is None:
                w = A.conj().T @ vec
                witness = w / np.linalg.norm(w)
        else:
            lam_coef = lam
            witness = vec
    if duality:
        scale = max(abs(lam_point), abs(lam_coef), 1.0)
        if abs(lam_point - lam_coef) > DUALITY_RTOL * scale:
            raise NumericError(f"duality check failed: {lam_point} vs {lam_coef}",
                               residual=abs(lam_point - lam_coef))
    lam = lam_coef if lam_coef is not None else lam_point
    witness = _canonical_phase(witness)
    return OperatorNorm(lam, witness, lam_point, lam_coef, iters)


def _canonical_phase(v):
    """Rotate v so its largest entry (first on ties) is real positive."""
    if v.size == 0:
        return v
    i = int(np.argmax(np.round(np.abs(v), 12)))
    if abs(v[i]) == 0:
        return v
    return v * (abs(v[i]) / v[i])


# -- ratio reports ----------------------------------------------------------------

def _fmt(x, digits=9):
    return float(round(float(x), digits)) + 0.0


@dataclass
class RatioReport:
    q: int
    N: int
    Q: int
    moduli: tuple
    lhs: float
    sum_sq: float
    trivial_rhs_constant: int
    conjecture_base: int
    witness: np.ndarray = field(repr=False)
    mode: str = "eigen"

    @property
    def ratio(self):
        if self.sum_sq <= 0:
            return 0.0
        return self.lhs / (self.trivial_rhs_constant * self.sum_sq)

    @property
    def implied_epsilon_factor(self):
        if self.sum_sq <= 0:
            return 0.0
        return self.lhs / (self.conjecture_base * self.sum_sq)

    @property
    def is_counterexample(self):
        return self.ratio > 1.0 + 1e-9

    def sort_key(self):
        return (-round(self.ratio, 9), self.N, self.Q, len(self.moduli),
                tuple(f.index for f in self.moduli))

    def to_dict(self):
        return {
            "q": self.q, "N": self.N, "Q": self.Q, "mode": self.mode,
            "moduli": [str(f) for f in self.moduli],
            "lhs": _fmt(self.lhs), "sum_sq": _fmt(self.sum_sq),
            "trivial_rhs_constant": self.trivial_rhs_constant,
            "conjecture_base": self.conjecture_base,
            "ratio": _fmt(self.ratio),
            "implied_epsilon_factor": _fmt(self.implied_epsilon_factor),
            "counterexample": self.is_counterexample,
            "witness": [[_fmt(z.real), _fmt(z.imag)] for z in self.witness],
        }


def subset_family(q, N_values, Q, min_degree=0):
    """All nonempty S of monic moduli with min_degree <= deg <= Q, for each N."""
    field = _field(q)
    pool = [f for d in range(min_degree, Q + 1) for f in iter_monic(field, d)]
    for N in N_values:
        for mask in range(1, 1 << len(pool)):
            yield field.q, N, Q, tuple(f for i, f in enumerate(pool) if mask >> i & 1)


def _ratio_one(args):
    (q, N, Q, S), mode, seed, samples = args
    field = _field(q)
    inst = SieveInstance(field, N, Q, S)
    if mode == "eigen":
        on = operator_norm(field, N, S, duality=False, seed=0)
        return [RatioReport(field.q, N, Q, inst.moduli, on.lam, 1.0, inst.trivial_constant(),
                            inst.conjecture_base(), on.witness, "eigen")]
    if mode == "random-coeffs":
        rng = np.random.default_rng([seed, N, Q] + [f.index for f in inst.moduli])
        out = []
        size = field.q ** (N + 1)
        for _ in range(samples):
            a = rng.standard_normal(size) + 1j * rng.standard_normal(size)
            lhs = sieve_lhs(inst.with_coeffs(a))
            out.append(RatioReport(field.q, N, Q, inst.moduli, lhs, float(np.sum(np.abs(a) ** 2)),
                                   inst.trivial_constant(), inst.conjecture_base(), a,
                                   "random-coeffs"))
        return out
    raise UsageError(f"unknown ratio_scan mode {mode!r}")


def ratio_scan(family, mode="eigen", seed=0, samples=4, workers=1):
    """Evaluate the ratio LHS / (trivial constant * sum |a|^2) over a family.

    Reports come back sorted by ratio, descending, with a deterministic
    tie-break, independent of ``workers``.  Instances over a resource cap
    are skipped with a logged notice.
    """
    jobs = [(inst, mode, seed, samples) for inst in family]
    reports = []

    def collect(results):
        for job, res in zip(jobs, results):
            if isinstance(res, Exception):
                if isinstance(res, ResourceError):
                    log.warning("skipping instance %s: %s", job[0][:3], res)
                    continue
                raise res
            reports.extend(res)

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            collect(list(pool.map(_safe_ratio_one, jobs, chunksize=8)))
    else:
        collect([_safe_ratio_one(j) for j in jobs])
    reports.sort(key=RatioReport.sort_key)
    return reports


def _safe_ratio_one(job):
    try:
        return _ratio_one(job)
    except ResourceError as exc:
        return exc


def reverify_witness(report, rtol=1e-9):
    """Recompute LHS directly with the witness coefficients; return the ratio."""
    field = _field(report.q)
    inst = SieveInstance(field, report.N, report.Q, report.moduli, report.witness)
    lhs = sieve_lhs(inst)
    sum_sq = float(np.sum(np.abs(inst.coeffs) ** 2))
    ratio = lhs / (inst.trivial_constant() * sum_sq)
    if abs(ratio - report.ratio) > rtol * max(1.0, report.ratio):
        raise IdentityFailure("witness does not reproduce the reported ratio",
                              report.to_dict())
    return ratio


# -- multiplicative large sieve -------------------------------------------------------

def mult_sieve_lhs(q, N, S, coeffs):
    """sum_{f in S} q^deg f / phi(f) sum_{chi primitive mod f} |sum_g a_g chi(g)|^2."""
    field = _field(q)
    coeffs = np.asarray(coeffs, dtype=complex)
    size = field.q ** (N + 1)
    if coeffs.shape != (size,):
        raise UsageError(f"expected {size} coefficients")
    total = 0.0
    for f in sorted(S, key=lambda m: m.index):
        group = unit_group(f)
        prim = [i for i, chi in enumerate(enumerate_characters(group)) if is_primitive(chi)]
        if not prim:
            continue
        M = group.exponent
        X = character_exponent_matrix(group)[prim]          # prim chars x units
        rmap = residue_map(f, N)
        col = np.full(field.q ** f.degree if f.degree else 1, -1, dtype=np.int64)
        col[np.array(group.units)] = np.arange(group.size)
        which = col[rmap]                                    # unit column per g, -1 if not coprime
        mask = which >= 0
        vals = np.exp(2j * np.pi * X[:, which[mask]] / M)
        sums = vals @ coeffs[mask]
        total += f.norm() / euler_phi(f) * float(np.sum(np.abs(sums) ** 2))
    return total


# -- the character-sum audit behind the shifted-product bound -----------------------

@dataclass
class AuditReport:
    q: int
    N: int
    Q: int
    primes: tuple
    per_prime: list
    S_total: int
    S_F: int
    S_G: int

    @property
    def cauchy_schwarz_bound(self):
        return math.sqrt(self.S_F * self.S_G)

    @property
    def cauchy_schwarz_holds(self):
        return self.S_total <= self.cauchy_schwarz_bound + 1e-9

    @property
    def corrected_bound(self):
        """sqrt(S_F S_G) plus the pairs with fg + 1 = 0 mod P^2 weighted by phi(P^2)."""
        return self.cauchy_schwarz_bound + sum(r["phi"] * r["direct_count"] for r in self.per_prime)

    def to_dict(self):
        return {
            "q": self.q, "N": self.N, "Q": self.Q, "primes": [str(P) for P in self.primes],
            "per_prime": self.per_prime, "S": self.S_total, "S_F": self.S_F, "S_G": self.S_G,
            "cauchy_schwarz_bound": _fmt(self.cauchy_schwarz_bound),
            "cauchy_schwarz_holds": self.cauchy_schwarz_holds,
            "corrected_bound": _fmt(self.corrected_bound),
        }


def _char_sum_counts(X, cols, M):
    """Per character, exponent counts of sum over the given unit columns."""
    out = np.zeros((X.shape[0], M), dtype=np.int64)
    for c in cols:
        if c >= 0:
            out[np.arange(X.shape[0]), X[:, c]] += 1
    return out


def sarkozy_audit(F, G, N, Q=None, q=None):
    """Exact two-sided evaluation of the shifted-product counting identity.

    For each monic irreducible P of degree Q (default ceil(N/3)) checks
    phi(P^2) #{(f, g): fg + 1 = 0 mod P^2} == sum_chi conj(chi(-1)) sum_f sum_g chi(fg)
    in Z[zeta], and accumulates S, S_F, S_G.
    """
    F = list(F)
    G = list(G)
    polys = F + G
    if q is None:
        if not polys:
            raise UsageError("q is required when both families are empty")
        q = polys[0].field
    field = _field(q)
    for f in polys:
        if f.field != field or not f.is_monic() or f.degree > N:
            raise UsageError(f"{f} is not a monic polynomial of degree <= {N}")
    if Q is None:
        Q = max(1, math.ceil(N / 3))
    primes = irreducibles(field, Q)
    per_prime = []
    S_total = S_F = S_G = 0
    minus_one = Poly.const(field, field.neg_table[1])
    one = Poly.const(field, 1)
    for P in primes:
        P2 = P * P
        group = unit_group(P2)
        M = group.exponent
        X = character_exponent_matrix(group)
        phi = group.size
        col = {u: i for i, u in enumerate(group.units)}
        fc = [col.get((f % P2).index, -1) for f in F]
        gc = [col.get((g % P2).index, -1) for g in G]
        direct = sum(1 for f in F for g in G if ((f * g + one) % P2).is_zero())
        A = _char_sum_counts(X, fc, M)
        B = _char_sum_counts(X, gc, M)
        m1 = X[:, col[(minus_one % P2).index]]
        total = [0] * M
        for c in range(X.shape[0]):
            shift = (-m1[c]) % M
            a, b = A[c], B[c]
            for i in np.nonzero(a)[0]:
                for j in np.nonzero(b)[0]:
                    total[(shift + i + j) % M] += int(a[i]) * int(b[j])
        char_side = CyclotomicValue.from_counts(M, total)
        if char_side != CyclotomicValue.integer(phi * direct):
            raise IdentityFailure("character-sum count does not match the direct count",
                                  {"P": str(P), "direct": direct, "character_side": char_side.to_dict()})
        coprime = sum(1 for a in fc if a >= 0) * sum(1 for b in gc if b >= 0)
        nonprincipal = [c for c in range(X.shape[0]) if X[c].any()]
        sf = _sum_abs2(A[nonprincipal], M)
        sg = _sum_abs2(B[nonprincipal], M)
        S_total += coprime
        S_F += sf
        S_G += sg
        per_prime.append({"P": str(P), "phi": phi, "direct_count": direct,
                          "character_side": direct, "coprime_pairs": coprime,
                          "S_F": sf, "S_G": sg})
    return AuditReport(field.q, N, Q, tuple(primes), per_prime, S_total, S_F, S_G)


def _sum_abs2(counts, M):
    """sum over rows of |sum_k c_k zeta_M^k|^2, which is a rational integer."""
    if counts.shape[0] == 0:
        return 0
    auto = np.stack([np.sum(counts * np.roll(counts, m, axis=-1), axis=-1) for m in range(M)],
                    axis=-1).sum(axis=0)
    val = CyclotomicValue.from_counts(M, auto.tolist())
    return val.to_int()
