"""Exception types shared across the package."""


class MacrofacetError(Exception):
    """Base class for all validation errors raised by this package."""

    code = "ERROR"


class UnknownIdError(MacrofacetError, ValueError):
    code = "UNKNOWN_ID"

    def __init__(self, ident, kind="facet"):
        super().__init__(f"unknown {kind} id: {ident!r}")
        self.ident = ident
        self.kind = kind


class SchemaError(MacrofacetError, ValueError):
    code = "SCHEMA_ERROR"

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class LaminarityError(MacrofacetError, ValueError):
    """Two constraint sets overlap without either containing the other."""

    code = "LAMINARITY_VIOLATION"

    def __init__(self, first, second, overlap):
        super().__init__(
            f"constraint sets {first!r} and {second!r} are neither nested nor "
            f"disjoint (shared: {sorted(overlap)})"
        )
        self.witness = (first, second)
        self.overlap = frozenset(overlap)


class InfeasibleError(MacrofacetError, ValueError):
    code = "INFEASIBLE"


class LimitExceededError(MacrofacetError, ValueError):
    code = "LIMIT_EXCEEDED"

    def __init__(self, size, limit, what="ground set"):
        super().__init__(f"{what} of size {size} exceeds exhaustive limit {limit}")
        self.size = size
        self.limit = limit


class InvariantError(MacrofacetError, RuntimeError):
    """An internal invariant was broken; always indicates a bug."""

    code = "INVARIANT_BREACH"


class ZeroCostWarning(UserWarning):
    pass
