"""Arithmetic (Montgomery) form of the large sieve over F_q[t].

Forbidden residue classes Omega_P for pairwise coprime sieving moduli P
turn into the upper bound

    #N* <= (q^(N+1) + A_K(Q) 2^Q q^(Q-1)) / sum_{monic R, deg R <= Q} g(R).

The bound rests on the additive large sieve, so it is reported as
conditional unless the large sieve has been checked numerically for the
moduli actually involved.  The intermediate identities are unconditional
and are verified exactly.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .characters import residue_map, unit_group
from .errors import DomainError, IdentityFailure, UsageError, check_cap
from .field import FieldSpec, field_of_order
from .largesieve import exact_abs2, exact_exponential_sums, operator_norm
from .poly import Poly, gcd, irreducibles, is_squarefree, monic_divisors

STATUS_IDENTITIES = "unconditional-identities-passed"
STATUS_CONDITIONAL = "bound-conditional"
STATUS_VERIFIED = "bound-verified-regime"
STATUS_NO_INFO = "no-sieve-information"


def _field(q):
    return q if isinstance(q, FieldSpec) else field_of_order(q)


def _frac(x):
    return {"num": str(x.numerator), "den": str(x.denominator)}


@dataclass
class SieveProblem:
    """Sieve data: N (candidates), P (moduli), Omega_P (forbidden classes).

    ``omega`` maps each modulus to a tuple of residue indices (residues
    are the polynomials of degree < deg P, indexed as in ``poly``).
    """

    field: FieldSpec
    N: int
    Q: int
    big_n: tuple
    primes: tuple
    omega: dict
    family: tuple = ()

    def __post_init__(self):
        self.field = _field(self.field)
        if not 0 < self.Q < self.N:
            raise UsageError(f"need 0 < Q < N, got Q={self.Q}, N={self.N}")
        q = self.field.q
        self.big_n = tuple(sorted(set(self.big_n), key=lambda f: f.index))
        self.primes = tuple(sorted(set(self.primes), key=lambda f: f.index))
        for f in self.big_n:
            if not f.is_monic() or not self.Q < f.degree <= self.N:
                raise UsageError(f"{f} is not monic with {self.Q} < deg <= {self.N}")
        for i, P in enumerate(self.primes):
            if not P.is_monic() or not 0 < P.degree <= self.Q:
                raise UsageError(f"sieving modulus {P} must be monic with 1 <= deg <= Q")
            for P2 in self.primes[i + 1:]:
                if gcd(P, P2).degree != 0:
                    raise UsageError(f"sieving moduli {P} and {P2} are not coprime")
        omega = {}
        for P in self.primes:
            classes = tuple(sorted(set(int(h.index if isinstance(h, Poly) else h)
                                       for h in self.omega.get(P, ()))))
            if any(not 0 <= h < q ** P.degree for h in classes):
                raise UsageError(f"Omega_{P} contains a non-reduced residue")
            if len(classes) >= q ** P.degree:
                raise DomainError(f"Omega_{P} covers every class; g({P}) is undefined")
            omega[P] = classes
        extra = set(self.omega) - set(self.primes)
        if extra:
            raise UsageError(f"Omega given for non-sieving moduli {sorted(map(str, extra))}")
        self.omega = omega

    @property
    def q(self):
        return self.field.q

    def w(self, P):
        return len(self.omega.get(P, ()))

    def to_dict(self):
        return {
            "field": self.field.to_dict(), "N": self.N, "Q": self.Q,
            "big_n": [f.to_list() for f in self.big_n],
            "primes": [P.to_list() for P in self.primes],
            "omega": [[Poly.from_index(self.field, h).to_list() for h in self.omega[P]]
                      for P in self.primes],
            "family": [f.to_list() for f in self.family],
        }

    @classmethod
    def from_dict(cls, data):
        fld = FieldSpec.from_dict(data["field"])
        primes = [Poly.from_list(fld, c) for c in data["primes"]]
        omega = {P: [Poly.from_list(fld, h) for h in hs] for P, hs in zip(primes, data["omega"])}
        return cls(fld, int(data["N"]), int(data["Q"]),
                   tuple(Poly.from_list(fld, c) for c in data["big_n"]), tuple(primes), omega,
                   tuple(Poly.from_list(fld, c) for c in data.get("family", [])))


def survivors(problem):
    """Elements of N avoiding Omega_P for every sieving modulus P."""
    forbidden = {P: set(problem.omega[P]) for P in problem.primes}
    return tuple(f for f in problem.big_n
                 if all((f % P).index not in forbidden[P] for P in problem.primes))


# -- the set K and the weights g, g' ---------------------------------------------

@dataclass
class KappaWeights:
    kappa: dict                 # R -> tuple of sieving factors, for deg R <= Q
    a_kappa_q: int
    g_values: dict
    gprime_values: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kappa": [str(R) for R in self.kappa],
            "a_kappa_q": self.a_kappa_q,
            "g_values": {str(R): _frac(v) for R, v in self.g_values.items()},
            "gprime_values": {str(R): _frac(v) for R, v in self.gprime_values.items()},
        }


def kappa_members(primes, Q):
    """{R: factors} for 1 and every product of distinct moduli with deg <= Q."""
    primes = sorted(primes, key=lambda P: P.index)
    if not primes:
        return {}
    one = Poly.const(primes[0].field, 1)
    out = {one: ()}
    frontier = [(one, (), 0)]
    while frontier:
        nxt = []
        for R, factors, start in frontier:
            for i in range(start, len(primes)):
                P = primes[i]
                if R.degree + P.degree <= Q:
                    item = (R * P, factors + (P,), i + 1)
                    out[item[0]] = item[1]
                    nxt.append(item)
        check_cap("subsets", len(out), "kappa_set")
        frontier = nxt
    return dict(sorted(out.items(), key=lambda kv: kv[0].index))


def kappa_factors(R, primes):
    """Factors of R as a product of distinct sieving moduli, or None if R is not in K."""
    rest = R
    out = []
    for P in primes:
        quo, rem = divmod(rest, P)
        if rem.is_zero():
            out.append(P)
            rest = quo
            if P.divides(rest):
                return None
    if rest.degree != 0:
        return None
    return tuple(out)


def _local_weight(problem, P, w_num):
    den = problem.q ** P.degree - problem.w(P)
    if den == 0:
        raise DomainError(f"w({P}) = q^deg P; g is undefined")
    return Fraction(w_num, den)


def g_weight(R, problem):
    """g(R) = prod_{P | R} w(P) / (q^deg P - w(P)) on K, 0 off K."""
    if not R.is_monic():
        raise UsageError("g is defined on monic R")
    factors = kappa_factors(R, problem.primes)
    if factors is None:
        return Fraction(0)
    out = Fraction(1)
    for P in factors:
        out *= _local_weight(problem, P, problem.w(P))
    return out


def w_prime(P, coeffs, N, field):
    """Number of classes h mod P with a_g = 0 for every g = h mod P, deg g <= N."""
    rmap = residue_map(P, N)
    occupied = np.zeros(field.q ** P.degree, dtype=bool)
    occupied[rmap[np.asarray(coeffs) != 0]] = True
    return int((~occupied).sum())


def g_prime(R, problem, coeffs, denominator="w"):
    """g'(R) = prod w'(P) / (q^deg P - w(P)) on K.

    ``denominator="w_prime"`` uses q^deg P - w'(P) instead, the form that
    holds without assuming w(P) <= w'(P).
    """
    factors = kappa_factors(R, problem.primes)
    if factors is None:
        return Fraction(0)
    out = Fraction(1)
    q = problem.q
    for P in factors:
        wp = w_prime(P, coeffs, problem.N, problem.field)
        if denominator == "w":
            out *= _local_weight(problem, P, wp)
        else:
            den = q ** P.degree - wp
            if den == 0:
                return Fraction(0)
            out *= Fraction(wp, den)
    return out


def kappa_set(primes, Q, problem=None, coeffs=None):
    members = kappa_members(primes, Q)
    if not members and problem is not None:
        members = {Poly.const(problem.field, 1): ()}   # empty sieve: K = {1}
    g_values, gprime_values = {}, {}
    if problem is not None:
        g_values = {R: g_weight(R, problem) for R in members}
        if coeffs is not None:
            gprime_values = {R: g_prime(R, problem, coeffs) for R in members}
    return KappaWeights(members, max(len(members), 1), g_values, gprime_values)


# -- the bound ---------------------------------------------------------------

@dataclass
class MontgomeryReport:
    problem: SieveProblem
    numerator: Fraction
    denominator: Fraction
    survivor_count: int
    status: list
    a_kappa_q: int
    regime: dict = None

    @property
    def bound(self):
        return self.numerator / self.denominator

    @property
    def holds(self):
        return self.survivor_count <= self.bound

    def to_dict(self):
        return {
            "q": self.problem.q, "N": self.problem.N, "Q": self.problem.Q,
            "primes": [str(P) for P in self.problem.primes],
            "w": {str(P): self.problem.w(P) for P in self.problem.primes},
            "a_kappa_q": self.a_kappa_q,
            "numerator": _frac(self.numerator), "denominator": _frac(self.denominator),
            "bound": _frac(self.bound), "survivor_count": self.survivor_count,
            "big_n_count": len(self.problem.big_n),
            "holds": self.holds, "status": list(self.status), "regime": self.regime,
        }


def divisor_moduli(problem):
    """{D != 1 monic : D | R for some R in K with deg R <= Q}, in index order."""
    out = set()
    for R in kappa_members(problem.primes, problem.Q):
        out.update(D for D in monic_divisors(R) if D.degree > 0)
    return tuple(sorted(out, key=lambda D: D.index))


def verify_regime(problem):
    """Check the additive large sieve numerically for the moduli the proof uses.

    The moduli are the divisor set together with 1 (the R = 1 term of the
    summed lemma).  Returns a dict with ``verified`` and the numbers.
    """
    fld = problem.field
    q, N, Q = fld.q, problem.N, problem.Q
    moduli = (Poly.const(fld, 1),) + divisor_moduli(problem)
    on = operator_norm(fld, N, moduli, duality=False)
    constant = q ** (N + 1) + len(moduli) * q ** (Q - 1)
    # margin guards the floating point eigenvalue against the exact constant
    verified = on.lam * (1 + 1e-9) <= constant
    return {"moduli_count": len(moduli), "lambda_max": round(on.lam, 9),
            "constant": constant, "verified": bool(verified)}


def montgomery_bound(problem, check_regime=False):
    q, N, Q = problem.q, problem.N, problem.Q
    members = kappa_members(problem.primes, Q)
    a_kappa = len(members) if members else 1
    numerator = Fraction(q ** (N + 1) + a_kappa * 2 ** Q * q ** (Q - 1))
    if members:
        denominator = sum((g_weight(R, problem) for R in members), Fraction(0))
    else:
        denominator = Fraction(1)
    if denominator == 0:
        raise DomainError("sum of g vanishes: no sieving information")
    status = [STATUS_CONDITIONAL]
    if not problem.primes or all(problem.w(P) == 0 for P in problem.primes):
        status.append(STATUS_NO_INFO)
    count = len(survivors(problem))
    report = MontgomeryReport(problem, numerator, denominator, count, status, a_kappa)
    if check_regime:
        report.regime = verify_regime(problem)
        if report.regime["verified"]:
            report.status = [STATUS_VERIFIED] + [s for s in status if s != STATUS_CONDITIONAL]
            if not report.holds:
                raise IdentityFailure("survivor count exceeds the bound in the verified regime",
                                      problem.to_dict())
    return report


# -- exact lemma machinery ---------------------------------------------------------

def _int_coeffs(coeffs, size):
    arr = np.asarray(coeffs)
    if arr.shape != (size,):
        raise UsageError(f"expected {size} coefficients")
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise UsageError("exact checks need integer coefficients")
        arr = arr.real
    if np.any(arr != np.round(arr)):
        raise UsageError("exact checks need integer coefficients")
    return arr.astype(np.int64)


@dataclass
class Lemma1Trace:
    modulus: Poly
    z_total: int
    z_classes: dict

    def to_dict(self):
        return {"modulus": str(self.modulus), "z_total": self.z_total,
                "z_classes": {str(h): v for h, v in self.z_classes.items()}}


def _admissible_mask(R, problem):
    """Residues r mod R with P not dividing r for every sieving P | R."""
    fld = problem.field
    n = fld.q ** R.degree
    mask = np.ones(n, dtype=bool)
    for P in problem.primes:
        if P.divides(R):
            red = residue_map(P, max(R.degree - 1, 0))[:n]
            mask &= red != 0
    return mask


def _class_sums(a, R, N):
    rmap = residue_map(R, N)
    return np.bincount(rmap, weights=a, minlength=R.field.q ** R.degree).astype(np.int64) \
        if R.degree else np.array([a.sum()], dtype=np.int64)


def _scalar(vec):
    """Integer value of a reduced cyclotomic vector, or None if irrational."""
    vec = [int(v) for v in vec]
    return vec[0] if not any(vec[1:]) else None


def lemma1_check(coeffs, R, problem):
    """Verify the single-modulus identities and the weighted inequality exactly.

    (i)   sum_{r mod R} |S(r/R)|^2 == q^deg R sum_h |Z(R, h)|^2
    (ii)  sum_{r mod R, r != 0} |S(r/R)|^2 == q^deg R sum_h |Z(R, h)|^2 - |Z|^2
    (iii) g'(R) |Z|^2 <= sum over admissible r of |S(r/R)|^2
    (iii) is asserted as stated when w(P) <= w'(P) for every sieving P | R;
    otherwise the w'-denominator form is asserted and the report says so.
    """
    fld = problem.field
    q, p, N = fld.q, fld.p, problem.N
    a = _int_coeffs(coeffs, q ** (N + 1))
    if not R.is_monic():
        raise UsageError("R must be monic")
    Z = int(a.sum())
    classes = _class_sums(a, R, N)
    trace = Lemma1Trace(R, Z, {Poly.from_index(fld, h): int(v)
                               for h, v in enumerate(classes) if v})
    if int(classes.sum()) != Z:
        raise IdentityFailure("class sums do not add up to Z", trace.to_dict())
    counts = exact_exponential_sums(fld, N, R, a)
    abs2 = exact_abs2(counts, p)
    total = abs2.sum(axis=0)
    rhs_i = q ** R.degree * int((classes ** 2).sum())
    lhs_i = _scalar(total)
    if lhs_i != rhs_i:
        raise IdentityFailure("full-residue identity failed", trace.to_dict())
    lhs_ii = _scalar(total - abs2[0])
    if lhs_ii != rhs_i - Z * Z:
        raise IdentityFailure("identity with r = 0 removed failed", trace.to_dict())
    mask = _admissible_mask(R, problem)
    adm = _scalar(abs2[mask].sum(axis=0))
    if adm is None:
        raise IdentityFailure("admissible sum is not rational", trace.to_dict())
    factors = kappa_factors(R, problem.primes)
    hypothesis = True
    if factors is not None:
        hypothesis = all(problem.w(P) <= w_prime(P, a, N, fld) for P in factors)
    gp = g_prime(R, problem, a, "w" if hypothesis else "w_prime")
    lhs_iii = gp * Z * Z
    if lhs_iii > adm:
        raise IdentityFailure("weighted inequality failed", trace.to_dict())
    return {
        "modulus": str(R), "in_kappa": factors is not None,
        "identity_full": rhs_i, "identity_nonzero": lhs_ii,
        "gprime": _frac(gp), "hypothesis_w_le_wprime": hypothesis,
        "lemma_lhs": _frac(Fraction(lhs_iii)), "lemma_rhs": adm,
        "trace": trace.to_dict(),
    }


def bor1_check(coeffs, problem):
    """Summed lemma over T = {R in K : deg R <= Q}, verified exactly.

    Checks (sum g'(R)) |Z|^2 <= sum_{R in T} sum_{admissible r} |S(r/R)|^2 and
    regroups the right side over reduced fractions s/D.  The regrouped sum
    equals |Z|^2 (the D = 1 term) plus the sum over the divisor set; the form
    without the D = 1 term is reported as ``without_unit_term_holds``.
    """
    fld = problem.field
    q, p, N, Q = fld.q, fld.p, problem.N, problem.Q
    a = _int_coeffs(coeffs, q ** (N + 1))
    Z = int(a.sum())
    if not problem.primes:
        return {"degenerate": True, "reason": "no sieving moduli", "holds": None}
    members = kappa_members(problem.primes, Q)
    hypothesis = all(problem.w(P) <= w_prime(P, a, N, fld) for P in problem.primes)
    mode = "w" if hypothesis else "w_prime"
    gsum = sum((g_prime(R, problem, a, mode) for R in members), Fraction(0))
    lhs = gsum * Z * Z
    middle = 0
    for R in members:
        abs2 = exact_abs2(exact_exponential_sums(fld, N, R, a), p)
        middle += _scalar(abs2[_admissible_mask(R, problem)].sum(axis=0))
    divisors = divisor_moduli(problem)
    rhs = 0
    for D in divisors:
        units = np.array(unit_group(D).units, dtype=np.int64)
        abs2 = exact_abs2(exact_exponential_sums(fld, N, D, a, units), p)
        val = _scalar(abs2.sum(axis=0))
        if val is None:
            raise IdentityFailure("coprime-residue sum is not rational", {"D": str(D)})
        rhs += val
    if middle != rhs + Z * Z:
        raise IdentityFailure("regrouping over reduced fractions failed",
                              {"middle": middle, "divisor_sum": rhs, "Z2": Z * Z})
    if lhs > middle:
        raise IdentityFailure("summed lemma inequality failed",
                              {"lhs": _frac(lhs), "rhs": middle})
    bor3_bound = 2 ** Q * len(members)
    return {
        "degenerate": False, "hypothesis_w_le_wprime": hypothesis,
        "gprime_sum": _frac(gsum), "lhs": _frac(lhs),
        "rhs_with_unit_term": middle, "rhs_divisor_sum": rhs,
        "slack": _frac(middle - lhs), "holds": True,
        "without_unit_term_holds": lhs <= rhs,
        "divisor_count": len(divisors), "divisor_bound": bor3_bound,
        "divisor_bound_holds": len(divisors) + 1 <= bor3_bound,
    }


# -- the two sieve pipelines ------------------------------------------------------------

def monic_count_up_to(q, Q):
    """Number of monic polynomials of degree <= Q; the exact remainder term."""
    return (q ** (Q + 1) - 1) // (q - 1)


def _empty_classes(P, members, q):
    occupied = {(f % P).index for f in members}
    return tuple(h for h in range(q ** P.degree) if h not in occupied)


def pset_pipeline(S, N, Q=None):
    """Run the sieve of the P-set argument for every Q < N (or the given Q).

    Omega_P is the set of classes mod P containing no element of S of larger
    degree; the classes -R mod P (R in S, deg R > deg P) must lie in it, and
    for odd q its size must be at least 1 + floor(q^deg P / 2).
    """
    from .extremal import is_pset

    S = tuple(sorted(set(S), key=lambda f: f.index))
    if not S:
        raise UsageError("empty P-set")
    fld = S[0].field
    q, p = fld.q, fld.p
    ok, witness = is_pset(S, require_coprime=True)
    if not ok:
        raise UsageError(f"not a pairwise coprime P-set: {witness}")
    S = tuple(f for f in S if f.degree <= N)
    a_s = len(S)
    rows = []
    qs = [Q] if Q is not None else list(range(1, N))
    for QQ in qs:
        primes = tuple(P for P in S if P.degree <= QQ)
        big_n = tuple(f for f in S if QQ < f.degree <= N)
        row = {"Q": QQ, "primes": [str(P) for P in primes], "big_n_count": len(big_n),
               "a_s_n": a_s, "char2_vacuous": p == 2}
        if not primes or not big_n:
            row["degenerate"] = True
            rows.append(row)
            continue
        omega, checks = {}, []
        for P in primes:
            larger = [f for f in S if f.degree > P.degree]
            classes = _empty_classes(P, larger, q)
            derived = sorted({(-R % P).index for R in larger})
            need = 1 + q ** P.degree // 2
            checks.append({"P": str(P), "w": len(classes), "required": need,
                           "derived_forbidden": len(derived),
                           "derived_subset": set(derived) <= set(classes),
                           "count_ok": p == 2 or len(classes) >= need})
            omega[P] = classes
        if not all(c["derived_subset"] for c in checks):
            raise IdentityFailure("class -R mod P contains an element of the P-set", checks)
        problem = SieveProblem(fld, N, QQ, big_n, primes, omega, S)
        rep = montgomery_bound(problem)
        a_k = rep.a_kappa_q
        kappa = kappa_members(primes, QQ)
        g_ge_one = all(g_weight(R, problem) >= 1 for R in kappa)
        simplified = Fraction(q ** (N + 1) + a_k * 2 ** QQ * q ** (QQ - 1), a_k) + q ** QQ
        row.update({
            "degenerate": False, "w_checks": checks, "montgomery": rep.to_dict(),
            "survivors_equal_big_n": rep.survivor_count == len(big_n),
            "count_bound_holds": a_s <= rep.survivor_count + q ** QQ,
            "count_bound_corrected_holds": a_s <= rep.survivor_count + monic_count_up_to(q, QQ),
            "bound_plus_qQ": _frac(rep.bound + q ** QQ),
            "g_at_least_one_on_kappa": g_ge_one,
            "simplified_bound": _frac(simplified),
            "n_equals_q_plus_log_a": N == QQ + math.ceil(round(math.log(a_k, q), 12)),
        })
        rows.append(row)
    return {"q": q, "N": N, "a_s_n": a_s, "char2_vacuous": p == 2, "rows": rows}


def squarefree_pipeline(F, N, q=None):
    """Sieve for families with every f + f' square-free, with Q = ceil(N / 3)."""
    F = tuple(sorted(set(F), key=lambda f: f.index))
    if q is None:
        if not F:
            raise UsageError("q is required for an empty family")
        q = F[0].field
    fld = _field(q)
    qq, p = fld.q, fld.p
    for f in F:
        if not f.is_monic() or f.degree > N:
            raise UsageError(f"{f} is not monic of degree <= {N}")
    Q = math.ceil(N / 3)
    squares = tuple(P * P for d in range(1, Q // 2 + 1) for P in irreducibles(fld, d))
    valid = all(is_squarefree(f + g) for i, f in enumerate(F) for g in F[i:])
    report = {"q": qq, "N": N, "Q": Q, "family_size": len(F), "valid_family": valid,
              "primes": [str(P) for P in squares],
              "pnt_lower": sum(len(irreducibles(fld, d)) for d in range(1, Q // 2 + 1))}
    if not F or Q >= N:
        report.update({"degenerate": True,
                       "bound": _frac(Fraction(qq ** (N + 1) + 2 ** Q * qq ** (Q - 1)))})
        return report
    big_n = tuple(f for f in F if Q < f.degree <= N)
    omega, checks = {}, []
    for P2 in squares:
        classes = _empty_classes(P2, F, qq)
        need = 1 + qq ** P2.degree // 2
        derived = {(-f % P2).index for f in F}
        checks.append({"P2": str(P2), "w": len(classes), "required": need,
                       "derived_subset": derived <= set(classes),
                       "count_ok": p == 2 or len(classes) >= need})
        omega[P2] = classes
    if valid and not all(c["derived_subset"] and c["count_ok"] for c in checks):
        raise IdentityFailure("valid family violates the forbidden-class count", checks)
    problem = SieveProblem(fld, N, Q, big_n, squares, omega, F)
    rep = montgomery_bound(problem)
    report.update({
        "degenerate": False, "w_checks": checks, "montgomery": rep.to_dict(),
        "count_bound_holds": len(F) <= rep.survivor_count + qq ** Q,
        "count_bound_corrected_holds": len(F) <= rep.survivor_count + monic_count_up_to(qq, Q),
        "a_kappa_ge_pnt": rep.a_kappa_q >= report["pnt_lower"],
        "bound_plus_qQ": _frac(rep.bound + qq ** Q),
    })
    return report
