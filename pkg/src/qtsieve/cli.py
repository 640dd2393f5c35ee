"""Command-line driver: ``qtsieve <subcommand> [--config PATH] [options]``.

The config file holds ``key = value`` lines (``#`` starts a comment).  The
parsed values are validated against ``CONFIG_SCHEMA`` before anything is
computed.  Reports are JSON; trajectories can also be written as CSV.
Reruns with the same config and seed give byte-identical reports; wall time
goes to a separate ``*.timing.json`` file for that reason.
"""

import argparse
import configparser
import contextlib
import json
import logging
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import (EXIT_DRIFT, EXIT_NO_BASELINE, EXIT_OK, EXIT_USAGE, IdentityFailure,
                     QtsieveError, UsageError)
from .field import get_field, prime_power

log = logging.getLogger("qtsieve")

KINDS = ("verify", "ls-ratio", "ls-scan", "ls-mult", "audit", "montgomery", "pset", "sqfree",
         "shifted", "trajectory", "pnt")

_NONNEG = {"type": "integer", "minimum": 0}
_POS = {"type": "integer", "minimum": 1}
_BOOL = {"type": "boolean"}
_POLYS = {"type": "array", "items": {"type": "string"}}
_INTS = {"type": "array", "items": _NONNEG}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "p": {"type": "integer", "minimum": 2},
        "n": _POS,
        "q": {"type": "integer", "minimum": 2},
        "modulus": _INTS,
        "N": _NONNEG,
        "Q": _NONNEG,
        "N_values": _INTS,
        "N_range": _INTS,
        "min_degree": _NONNEG,
        "d_max": _POS,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "workers": _POS,
        "samples": _POS,
        "mode": {"enum": ["eigen", "random-coeffs"]},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "moduli": _POLYS,
        "F": _POLYS,
        "G": _POLYS,
        "primes": _POLYS,
        "big_n": _POLYS,
        "omega": {"type": "object", "additionalProperties": _POLYS},
        "problem": {"enum": ["pset", "sqfree-sum", "shifted-product"]},
        "require_coprime": _BOOL,
        "include_self_pairs": _BOOL,
        "include_all_pairs": _BOOL,
        "check_regime": _BOOL,
        "caps": {"type": "object", "additionalProperties": _POS},
        "out": {"type": "string"},
    },
}

_INT_KEYS = {"p", "n", "q", "N", "Q", "min_degree", "d_max", "seed", "workers", "samples"}
_INT_LIST_KEYS = {"modulus", "N_values", "N_range"}
_POLY_KEYS = {"moduli", "F", "G", "primes", "big_n"}
_BOOL_KEYS = {"require_coprime", "include_self_pairs", "include_all_pairs", "check_regime"}


def _convert(key, raw):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _INT_LIST_KEYS:
            if ".." in raw:
                lo, hi = raw.split("..")
                return list(range(int(lo), int(hi) + 1))
            return [int(x) for x in raw.replace(",", " ").split()]
        if key == "epsilon":
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc
    if key in _POLY_KEYS:
        return [s.strip() for s in raw.split(";") if s.strip()]
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise UsageError(f"bad boolean for {key}: {raw!r}")
        return low in ("true", "yes", "1")
    if key == "omega":
        # "t: 0, 2; t+1: 1" -> {"t": ["0", "2"], "t+1": ["1"]}
        out = {}
        for item in raw.split(";"):
            if item.strip():
                mod, _, classes = item.partition(":")
                out[mod.strip()] = [c.strip() for c in classes.split(",") if c.strip()]
        return out
    if key == "caps":
        out = {}
        for item in raw.split(","):
            if item.strip():
                name, _, val = item.partition(":")
                out[name.strip()] = int(val)
        return out
    return raw


def parse_config_text(text):
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"unreadable config: {exc}") from exc
    return {k: _convert(k, v) for k, v in parser["run"].items()}


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"config does not match schema: {exc.message}") from exc
    return cfg


# -- helpers -----------------------------------------------------------------------------

def _field_from(cfg):
    if "q" in cfg:
        if "p" in cfg or "n" in cfg:
            raise UsageError("give either q or p/n, not both")
        try:
            p, n = prime_power(cfg["q"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return get_field(p, n)
    p, n = cfg.get("p", 2), cfg.get("n", 1)
    modulus = tuple(cfg["modulus"]) if "modulus" in cfg else None
    try:
        return get_field(p, n, modulus)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _polys(fld, items):
    from .poly import Poly

    try:
        return tuple(Poly.parse(fld, s) for s in items)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return {"num": str(obj.numerator), "den": str(obj.denominator)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return round(float(obj), 9) + 0.0
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@contextlib.contextmanager
def _caps(caps):
    if not caps:
        yield
        return
    old = os.environ.get("QTSIEVE_CAP_OVERRIDE")
    base = old + "," if old and not old.strip().isdigit() else ""
    os.environ["QTSIEVE_CAP_OVERRIDE"] = base + ",".join(f"{k}={v}" for k, v in caps.items())
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("QTSIEVE_CAP_OVERRIDE", None)
        else:
            os.environ["QTSIEVE_CAP_OVERRIDE"] = old


def _max_degree(moduli):
    return max((f.degree for f in moduli), default=0)


# -- planning (dry runs) ---------------------------------------------------------------

def plan(kind, cfg):
    """Instance sizes a run would touch, without computing anything heavy."""
    fld = _field_from(cfg)
    q = fld.q
    N = cfg.get("N", 0)
    out = {"kind": kind, "q": q}
    if kind in ("ls-ratio", "ls-mult"):
        from .largesieve import FareySystem

        moduli = _polys(fld, cfg.get("moduli", []))
        out.update(coefficients=q ** (N + 1), farey_points=len(FareySystem.of(moduli)))
    elif kind == "ls-scan":
        Q = cfg.get("Q", 1)
        pool = sum(q ** d for d in range(cfg.get("min_degree", 0), Q + 1))
        out.update(pool=pool, subsets=(2 ** pool - 1) * len(cfg.get("N_values", [0])))
    elif kind in ("pset", "sqfree", "shifted"):
        out.update(candidates=sum(q ** d for d in range(N + 1)))
    elif kind == "trajectory":
        out.update(N_range=cfg.get("N_range", []))
    elif kind == "montgomery":
        out.update(polynomials=q ** (N + 1), primes=len(cfg.get("primes", [])))
    elif kind == "audit":
        out.update(F=len(cfg.get("F", [])), G=len(cfg.get("G", [])), N=N)
    elif kind == "pnt":
        out.update(d_max=cfg.get("d_max", 4))
    return out


# -- the experiments -------------------------------------------------------------------

def run_verify(cfg):
    """Exact identity suite at desk scale."""
    from .characters import enumerate_characters, gauss_sum, is_primitive, orthogonality_suite
    from .largesieve import operator_norm
    from .montgomery import SieveProblem, lemma1_check
    from .poly import Poly, count_irreducibles, enumerate_polys, is_irreducible, iter_monic

    results = {}
    seed = cfg.get("seed", 0)

    def record(name, fn):
        fn()
        results[name] = "pass"

    def orth():
        for q in (2, 3, 4):
            fld = get_field(*prime_power(q))
            for d in range(0, 3):
                for f in iter_monic(fld, d):
                    orthogonality_suite(f, mult_cap=50)

    def gauss():
        for q in (2, 3):
            fld = get_field(q)
            for d in (1, 2):
                for f in iter_monic(fld, d):
                    for chi in enumerate_characters(f):
                        if is_primitive(chi) and gauss_sum(chi).abs2() != q ** d:
                            raise IdentityFailure("Gauss sum modulus", {"f": str(f)})

    def pnt():
        for q, dmax in ((2, 6), (3, 4)):
            for d in range(1, dmax + 1):
                brute = sum(1 for f in enumerate_polys(q, d) if is_irreducible(f))
                if brute != count_irreducibles(q, d):
                    raise IdentityFailure("irreducible count", {"q": q, "d": d})

    def lemma():
        rng = np.random.default_rng(seed)
        for q in (2, 3):
            fld = get_field(q)
            t = Poly.t(fld)
            one = Poly.const(fld, 1)
            prob = SieveProblem(fld, 3, 1, [], [t], {t: [0]})
            for R in (one, t, t * t + one):
                a = rng.integers(-3, 4, q ** 4)
                lemma1_check(a, R, prob)

    def duality():
        for q in (2, 3):
            fld = get_field(q)
            for N in (0, 1, 2):
                moduli = [f for d in (1, 2) for f in iter_monic(fld, d)]
                operator_norm(fld, N, moduli, duality=True)

    for name, fn in (("orthogonality", orth), ("gauss-sums", gauss), ("irreducible-counts", pnt),
                     ("lemma-identities", lemma), ("operator-norm-duality", duality)):
        record(name, fn)
    return {"checks": results}, results


def run_ls_ratio(cfg):
    from .largesieve import RatioReport, SieveInstance, operator_norm, reverify_witness

    fld = _field_from(cfg)
    N = cfg.get("N", 0)
    moduli = _polys(fld, cfg.get("moduli", []))
    if not moduli:
        raise UsageError("ls-ratio needs moduli")
    Q = cfg.get("Q", _max_degree(moduli))
    inst = SieveInstance(fld, N, Q, moduli)
    on = operator_norm(fld, N, moduli, duality=True, seed=cfg.get("seed", 0))
    rep = RatioReport(fld.q, N, Q, inst.moduli, on.lam, 1.0, inst.trivial_constant(),
                      inst.conjecture_base(), on.witness)
    payload = rep.to_dict()
    payload["point_lambda"] = on.point_lam
    payload["coefficient_lambda"] = on.coefficient_lam
    if rep.is_counterexample:
        payload["reverified_ratio"] = reverify_witness(rep)
    _epsilon(payload, cfg, fld.q, N, Q)
    return payload, {"duality": "pass"}


def _epsilon(payload, cfg, q, N, Q):
    if "epsilon" in cfg:
        scale = q ** (cfg["epsilon"] * (Q + N))
        payload["epsilon"] = cfg["epsilon"]
        payload["epsilon_scale"] = scale
        payload["implied_constant"] = payload["implied_epsilon_factor"] / scale


def run_ls_scan(cfg):
    from .largesieve import ratio_scan, reverify_witness, subset_family

    fld = _field_from(cfg)
    Q = cfg.get("Q", 1)
    family = subset_family(fld, cfg.get("N_values", [0]), Q, cfg.get("min_degree", 0))
    reports = ratio_scan(family, cfg.get("mode", "eigen"), cfg.get("seed", 0),
                         cfg.get("samples", 4), cfg.get("workers", 1))
    rows = []
    for r in reports:
        d = r.to_dict()
        if r.is_counterexample:
            d["reverified_ratio"] = reverify_witness(r)
        _epsilon(d, cfg, r.q, r.N, r.Q)
        rows.append(d)
    counter = sum(1 for r in reports if r.is_counterexample)
    return {"reports": rows, "count": len(rows), "counterexamples": counter}, \
        {"witness-reverification": "pass"}


def run_ls_mult(cfg):
    from .largesieve import SieveInstance, mult_sieve_lhs

    fld = _field_from(cfg)
    N = cfg.get("N", 0)
    moduli = _polys(fld, cfg.get("moduli", []))
    Q = cfg.get("Q", _max_degree(moduli))
    inst = SieveInstance(fld, N, Q, moduli)
    rng = np.random.default_rng(cfg.get("seed", 0))
    rows = []
    for _ in range(cfg.get("samples", 4)):
        a = rng.standard_normal(fld.q ** (N + 1)) + 1j * rng.standard_normal(fld.q ** (N + 1))
        lhs = mult_sieve_lhs(fld, N, inst.moduli, a)
        ss = float(np.sum(np.abs(a) ** 2))
        rows.append({"lhs": lhs, "sum_sq": ss, "ratio": lhs / (inst.trivial_constant() * ss)})
    return {"q": fld.q, "N": N, "Q": Q, "moduli": [str(f) for f in inst.moduli],
            "trivial_rhs_constant": inst.trivial_constant(), "samples": rows}, {}


def run_audit(cfg):
    from .largesieve import sarkozy_audit

    fld = _field_from(cfg)
    N = cfg.get("N", 2)
    rep = sarkozy_audit(_polys(fld, cfg.get("F", [])), _polys(fld, cfg.get("G", [])), N,
                        cfg.get("Q"), fld)
    return rep.to_dict(), {"character-sum-identity": "pass"}


def run_montgomery(cfg):
    from .montgomery import (STATUS_IDENTITIES, SieveProblem, bor1_check, kappa_members,
                             lemma1_check, montgomery_bound, survivors)
    from .poly import iter_monic

    fld = _field_from(cfg)
    N, Q = cfg.get("N", 2), cfg.get("Q", 1)
    primes = _polys(fld, cfg.get("primes", []))
    omega_raw = cfg.get("omega", {})
    omega = {}
    for P in primes:
        key = next((k for k in omega_raw if _polys(fld, [k])[0] == P), None)
        omega[P] = _polys(fld, omega_raw[key]) if key is not None else ()
    if "big_n" in cfg:
        big_n = _polys(fld, cfg["big_n"])
    else:
        big_n = tuple(f for d in range(Q + 1, N + 1) for f in iter_monic(fld, d))
    problem = SieveProblem(fld, N, Q, big_n, primes, omega)
    rep = montgomery_bound(problem, check_regime=cfg.get("check_regime", True))
    a = np.zeros(fld.q ** (N + 1), dtype=np.int64)
    for f in survivors(problem):
        a[f.index] = 1
    for R in kappa_members(primes, Q):
        lemma1_check(a, R, problem)
    summed = bor1_check(a, problem)
    if summed["holds"]:
        rep.status = [STATUS_IDENTITIES] + list(rep.status)
    payload = rep.to_dict()
    payload["summed_lemma"] = summed
    return payload, {"lemma-identities": "pass", "summed-lemma": "pass"}


def run_pset(cfg):
    from .extremal import max_pset
    from .montgomery import pset_pipeline

    fld = _field_from(cfg)
    N = cfg.get("N", 2)
    rep = max_pset(fld, N, cfg.get("require_coprime", False))
    payload = rep.to_dict()
    if N >= 2 and cfg.get("require_coprime", False):
        payload["sieve"] = pset_pipeline(rep.witness[0], N)
    return payload, {"witness-predicate": "pass"}


def run_sqfree(cfg):
    from .extremal import max_sqfree_sum_family
    from .montgomery import squarefree_pipeline

    fld = _field_from(cfg)
    N = cfg.get("N", 2)
    rep = max_sqfree_sum_family(fld, N, cfg.get("include_self_pairs", True))
    payload = rep.to_dict()
    payload["sieve"] = squarefree_pipeline(rep.witness[0], N, fld)
    return payload, {"witness-predicate": "pass"}


def run_shifted(cfg):
    from .extremal import max_shifted_product_family
    from .largesieve import sarkozy_audit

    fld = _field_from(cfg)
    N = cfg.get("N", 2)
    rep = max_shifted_product_family(fld, N, cfg.get("include_all_pairs", True))
    payload = rep.to_dict()
    F, G = rep.witness
    payload["audit"] = sarkozy_audit(F, G, N, q=fld).to_dict()
    return payload, {"witness-predicate": "pass", "character-sum-identity": "pass"}


def run_trajectory(cfg):
    from .extremal import exponent_trajectory

    fld = _field_from(cfg)
    rows = exponent_trajectory(cfg.get("problem", "pset"), fld, cfg.get("N_range", []))
    return {"problem": cfg.get("problem", "pset"), "q": fld.q, "rows": rows}, {}


def run_pnt(cfg):
    from .poly import count_irreducibles, enumerate_polys, is_irreducible

    fld = _field_from(cfg)
    rows = []
    for d in range(1, cfg.get("d_max", 4) + 1):
        formula = count_irreducibles(fld.q, d)
        brute = sum(1 for f in enumerate_polys(fld, d) if is_irreducible(f))
        if formula != brute:
            raise IdentityFailure("irreducible count mismatch", {"d": d, "formula": formula,
                                                                 "brute": brute})
        rows.append({"d": d, "count": formula, "q_d_over_d": fld.q ** d / d})
    return {"q": fld.q, "rows": rows}, {"mobius-vs-exhaustive": "pass"}


RUNNERS = {
    "verify": run_verify, "ls-ratio": run_ls_ratio, "ls-scan": run_ls_scan,
    "ls-mult": run_ls_mult, "audit": run_audit, "montgomery": run_montgomery,
    "pset": run_pset, "sqfree": run_sqfree, "shifted": run_shifted,
    "trajectory": run_trajectory, "pnt": run_pnt,
}


def run(kind, cfg):
    """Validate, dispatch and wrap the payload in a run report (a dict)."""
    if kind not in RUNNERS:
        raise UsageError(f"unknown experiment kind {kind!r}")
    cfg = validate_config(dict(cfg))
    log.info("running %s with %d config keys", kind, len(cfg))
    with _caps(cfg.get("caps")):
        payload, summary = RUNNERS[kind](cfg)
    return {"kind": kind, "version": __version__, "config": _jsonable(cfg),
            "payload": _jsonable(payload), "identity_suite": summary}


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# -- baselines ------------------------------------------------------------------------

def _is_fraction(x):
    return isinstance(x, dict) and set(x) == {"num", "den"}


def compare_baseline(report, baseline, rtol=1e-9):
    """List of differences between a report and a baseline (both dicts).

    Integers, strings, booleans and rationals compare exactly; floats compare
    within ``rtol`` (relative, with the same absolute floor).  The version
    field is ignored.
    """
    diffs = []

    def walk(a, b, path):
        if path == "version":
            return
        if isinstance(a, dict) and isinstance(b, dict):
            if _is_fraction(a) and _is_fraction(b):
                if Fraction(int(a["num"]), int(a["den"])) != Fraction(int(b["num"]), int(b["den"])):
                    diffs.append({"field": path, "report": a, "baseline": b})
                return
            for k in sorted(set(a) | set(b)):
                sub = f"{path}.{k}" if path else k
                if k not in a or k not in b:
                    diffs.append({"field": sub, "report": a.get(k), "baseline": b.get(k)})
                else:
                    walk(a[k], b[k], sub)
        elif isinstance(a, list) and isinstance(b, list):
            if len(a) != len(b):
                diffs.append({"field": path + ".length", "report": len(a), "baseline": len(b)})
            for i, (x, y) in enumerate(zip(a, b)):
                walk(x, y, f"{path}[{i}]")
        elif isinstance(a, float) or isinstance(b, float):
            if isinstance(a, bool) or isinstance(b, bool) or a is None or b is None \
                    or not math.isclose(a, b, rel_tol=rtol, abs_tol=rtol):
                diffs.append({"field": path, "report": a, "baseline": b})
        elif a != b or type(a) is not type(b):
            diffs.append({"field": path, "report": a, "baseline": b})

    walk(report, baseline, "")
    return diffs


# -- entry point -------------------------------------------------------------------------

class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports errors through the usage exit code."""

    def error(self, message):
        raise _ArgError(message)


def build_parser():
    parser = _Parser(prog="qtsieve", description=__doc__.splitlines()[0])
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", type=Path)
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config entry (repeatable)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--baseline", type=Path)
    parser.add_argument("--write-baseline", action="store_true",
                        help="write the report to --baseline instead of comparing")
    parser.add_argument("--dry-run", action="store_true")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgError as exc:
        print(f"qtsieve: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = args.config.read_text() if args.config else ""
        text += "\n" + "\n".join(args.set)
        cfg = parse_config_text(text)
        if cfg.get("kind", args.kind) != args.kind:
            raise UsageError(f"config kind {cfg['kind']!r} does not match {args.kind!r}")
        cfg.pop("kind", None)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.workers is not None:
            cfg["workers"] = args.workers
        validate_config(cfg)
        if args.dry_run:
            print(json.dumps({"dry_run": True, "plan": plan(args.kind, cfg)}, sort_keys=True))
            return EXIT_OK
        start = time.perf_counter()
        report = run(args.kind, cfg)
        elapsed = time.perf_counter() - start
    except QtsieveError as exc:
        print(f"qtsieve: {type(exc).__name__}: {exc}", file=sys.stderr)
        witness = getattr(exc, "witness", None)
        if witness is not None:
            print(json.dumps(_jsonable(witness), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qtsieve: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = dumps(report)
    out_dir = args.out or (Path(cfg["out"]) if "out" in cfg else None)
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{args.kind}.json").write_text(text)
        (out_dir / f"{args.kind}.timing.json").write_text(
            json.dumps({"wall_time_s": round(elapsed, 3)}) + "\n")
        if args.kind == "trajectory":
            from .extremal import trajectory_csv

            (out_dir / "trajectory.csv").write_text(trajectory_csv(report["payload"]["rows"]))
    else:
        sys.stdout.write(text)
    print(f"qtsieve: {args.kind} finished in {elapsed:.2f}s", file=sys.stderr)

    if args.baseline:
        if args.write_baseline:
            args.baseline.parent.mkdir(parents=True, exist_ok=True)
            args.baseline.write_text(text)
            return EXIT_OK
        if not args.baseline.exists():
            print(f"qtsieve: baseline {args.baseline} missing; rerun with --write-baseline "
                  "to create it", file=sys.stderr)
            return EXIT_NO_BASELINE
        diffs = compare_baseline(report, json.loads(args.baseline.read_text()))
        if diffs:
            for d in diffs:
                print(f"drift {d['field']}: report={d['report']!r} baseline={d['baseline']!r}",
                      file=sys.stderr)
            return EXIT_DRIFT
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
