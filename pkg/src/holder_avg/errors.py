class HolderAvgError(Exception):
    """Base class for library errors."""


class ParameterError(HolderAvgError, ValueError):
    """An argument is outside its admissible range."""


class ConsistencyError(HolderAvgError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class InfeasibleExtensionError(HolderAvgError, ValueError):
    """Two base points at distance zero carry different values."""


class SmoothnessError(HolderAvgError, ValueError):
    """A function violates a required smoothness budget."""
