"""Exception types raised by the teleportation model."""


class TelefidError(Exception):
    pass


class UnreachableOutcome(TelefidError, ValueError):
    """Ideal outcome has zero amplitude, so no conditional state exists."""


class WindowTooLarge(TelefidError, ValueError):
    """Dark-count rate times window is outside the linear Poisson regime."""


class ZeroEvidence(TelefidError, ArithmeticError):
    """The readout has zero probability under the model."""


class NotConverged(TelefidError, ArithmeticError):
    """Truncated outcome sum has a tail estimate above tolerance."""

    def __init__(self, message, tail_estimate=None):
        super().__init__(message)
        self.tail_estimate = tail_estimate


class NoAcceptedEvidence(TelefidError, ArithmeticError):
    """Every accepted readout has zero probability."""


class ConfigError(TelefidError, ValueError):
    """Malformed sweep configuration."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
