class NosigError(Exception):
    """Base class for library errors."""


class StructureError(NosigError, ValueError):
    """Shapes or space factors do not line up."""


class DomainError(NosigError, ValueError):
    """An input violates a precondition (negative weight, bad distribution...)."""


class InvariantViolation(NosigError, RuntimeError):
    """An internal invariant failed; ``stage`` names where."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
