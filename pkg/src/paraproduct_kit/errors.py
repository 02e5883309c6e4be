"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Grid box, scale range, or cube layout is incompatible with a request."""


class PrecisionError(ValueError):
    """Requested output resolution is too coarse for the operation."""


class RangeParameterError(ValueError):
    """A scalar parameter lies outside its supported range."""


class ConvergenceError(RuntimeError):
    """Cascade refinement failed the two-scale consistency check."""


class CapabilityError(ValueError):
    """Operation not available for the given system or dimension."""


class ProbeError(ValueError):
    """Kernel probe geometry is degenerate (e.g. on-diagonal points)."""


class PreconditionError(ValueError):
    """A verified-input precondition (atom bounds, normalization) failed."""


class DomainError(ValueError):
    """Input violates a domain assumption (e.g. nonzero mean for Riesz work)."""
