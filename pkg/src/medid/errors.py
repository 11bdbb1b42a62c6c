"""Exception types shared across the engine."""


class MedidError(Exception):
    """Base class for all engine errors."""


class ModelError(MedidError):
    """A model file or model object is malformed beyond what a
    ValidationReport can carry (e.g. unparseable file)."""


class EnumerationCapError(MedidError):
    """The noise-configuration product space exceeds the configured cap."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"enumeration too large: {count} noise configurations exceed cap {cap}")


class NullEventError(MedidError):
    """Conditioning on an event of probability zero.

    This is the computational face of a positivity failure.
    """


class PositivityError(MedidError):
    """A required conditional support does not cover the required range.

    ``witnesses`` is the complete list of violating cells, each a tuple
    ``(cell_assignment, missing_value)`` where ``missing_value`` is None for
    exposure-positivity failures.
    """

    def __init__(self, message, witnesses):
        self.witnesses = list(witnesses)
        detail = "; ".join(self._fmt(w) for w in self.witnesses)
        super().__init__(f"{message}: {detail}")

    @staticmethod
    def _fmt(witness):
        cell, value = witness
        cell_s = ", ".join(f"{k}={v}" for k, v in cell) if cell else "(all)"
        if value is None:
            return f"({cell_s})"
        return f"({cell_s}) missing {value}"


class PolicyDomainError(MedidError):
    """A mediator policy has no row for a realized covariate cell."""


class SupportMismatchError(PositivityError):
    """A policy cell prescribes mediator values outside the observed support
    of the evaluation stratum."""


class NotIdentifiedError(MedidError):
    """The requested functional is not identified for this input
    (e.g. cross-world mean with intermediate confounders present)."""


class EstimandSyntaxError(MedidError):
    """Estimand expression failed to parse; carries the offending position."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")
