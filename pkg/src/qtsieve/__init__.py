"""Large sieve experiments over F_q[t]: finite fields, characters, sieve bounds, searches."""

__version__ = "0.1.0"

from .errors import (DomainError, IdentityFailure, NumericError, QtsieveError, ResourceError,
                     UsageError)
from .field import FieldElement, FieldSpec, field_of_order, get_field
from .poly import Poly, count_irreducibles, gcd, irreducibles, is_irreducible, is_squarefree

__all__ = [
    "DomainError", "IdentityFailure", "NumericError", "QtsieveError", "ResourceError",
    "UsageError", "FieldElement", "FieldSpec", "field_of_order", "get_field", "Poly",
    "count_irreducibles", "gcd", "irreducibles", "is_irreducible", "is_squarefree",
    "__version__",
]
