"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible dimensions."""


class ContractViolationError(ValueError):
    """An input violates a documented precondition (non-Hermitian matrix,
    non-orthogonal reference state, complex residue above tolerance, ...)."""


class OrthogonalPostselectionError(ValueError):
    """Pre- and post-selected states are too close to orthogonal for weak
    quantities to be well conditioned."""


class TruncationError(ValueError):
    """A state carries non-negligible weight on the top levels of a
    truncated basis, so conjugate-pair results would be artifacts."""


class EstimationUndefinedError(ValueError):
    """Pointer statistics cannot be converted into a weak-value estimate
    (zero-probability post-selection, vanishing response, missing readout)."""


class ConfigError(ValueError):
    """Invalid harness configuration; the message names the offending field."""
