"""Exception types shared across the package."""


class FamilyError(ValueError):
    """A set does not belong to the family, or family kinds are mixed."""


class CapacityError(ValueError):
    """A combinatorial guard tripped (too many union parts, closure too big)."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed; indicates a broken family or a bug."""


class KernelError(ValueError):
    """A kernel was applied outside its domain (arity, sign, missing density)."""


class HistoryError(ValueError):
    """A conditioning set intersects the increment it must be disjoint from."""


class ConfigError(ValueError):
    """A run configuration failed validation."""
