"""Exception hierarchy and resource caps.

Every error class carries the process exit code the CLI maps it to.
"""

import os

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IDENTITY = 3
EXIT_RESOURCE = 4
EXIT_DRIFT = 5
EXIT_NO_BASELINE = 6


class QtsieveError(Exception):
    exit_code = 1


class UsageError(QtsieveError, ValueError):
    """Malformed input: mismatched fields, bad config, invalid Farey point."""

    exit_code = EXIT_USAGE


class DomainError(QtsieveError, ArithmeticError):
    """Mathematically undefined operation (inverse of zero, gcd(0, 0), ...)."""

    exit_code = EXIT_USAGE


class ResourceError(QtsieveError):
    exit_code = EXIT_RESOURCE


class NumericError(QtsieveError):
    """Power iteration failed to converge; ``residual`` holds the last drift."""

    exit_code = EXIT_IDENTITY

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IdentityFailure(QtsieveError, AssertionError):
    """An exact identity or unconditional inequality was violated.

    ``witness`` is a JSON-serialisable description of the failing input.
    """

    exit_code = EXIT_IDENTITY

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


DEFAULT_CAPS = {
    "field": 1 << 10,       # elements of F_q enumerated
    "polys": 1 << 20,       # polynomials produced by one enumeration
    "units": 10_000,        # phi(f) for unit-group tables
    "gram": 4096,           # side length of a dense Gram matrix
    "subsets": 1 << 16,     # members of the square-free product set K
    "clique": 400,          # vertices handed to the exact clique solver
    "biclique": 64,         # vertices for the exact balanced-biclique search
    "pset": 64,             # candidates for the exact P-set search
}


def _parse_override(raw):
    if not raw:
        return {}
    raw = raw.strip()
    if raw.isdigit():
        return {k: int(raw) for k in DEFAULT_CAPS}
    out = {}
    for item in raw.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in DEFAULT_CAPS or not value.strip().isdigit():
            raise UsageError(f"bad QTSIEVE_CAP_OVERRIDE entry {item!r}")
        out[key] = int(value)
    return out


def cap(name):
    """Current value of resource cap ``name``, honouring QTSIEVE_CAP_OVERRIDE.

    The variable is either one integer (applied to every cap) or a
    comma-separated list such as ``units=20000,gram=8192``.
    """
    return _parse_override(os.environ.get("QTSIEVE_CAP_OVERRIDE")).get(name, DEFAULT_CAPS[name])


def check_cap(name, size, what=""):
    limit = cap(name)
    if size > limit:
        raise ResourceError(f"{what or name}: size {size} exceeds cap {name}={limit}")
