"""Exception types shared across the package."""


class TincalcError(Exception):
    """Base class for all tincalc errors."""


class DegenerateTriangle(TincalcError):
    """Triangle with collinear (x, y) projections."""


class VerticalEdge(TincalcError):
    """Edge with a vertical supporting line; normalize the pair first."""


class InvalidTin(TincalcError):
    """Triangulation violating a structural invariant."""


class InvalidParameter(TincalcError):
    """Bad argument to a generator or CLI-level operation."""


class ParallelLines(TincalcError):
    """Wedge integral requested for lines of equal slope."""


class NotConvex(TincalcError):
    """Polygon passed to convex-only integration is not strictly convex."""


class DegenerateInput(TincalcError):
    """Cross-triangulation degeneracy that validate_pair would reject."""


class BadPrime(TincalcError):
    """A denominator vanished modulo this prime; the prime must be discarded."""

    def __init__(self, prime: int, reason: str = ""):
        self.prime = prime
        self.reason = reason
        super().__init__(f"prime {prime} unusable" + (f": {reason}" if reason else ""))


class InsufficientPrimes(TincalcError):
    """Rational reconstruction failed or missed the verification residue."""


class ParseError(TincalcError):
    """Malformed TIN file or numeric token."""
