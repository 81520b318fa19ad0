"""
Exception hierarchy for the gathering toolkit.

Every error raised on purpose by the toolkit derives from GatheringError so the
CLI can map it to an exit status.
"""

from typing import Any, Optional


class GatheringError(Exception):
    """Base class for toolkit errors."""


class InputError(GatheringError, ValueError):
    """Malformed vertex, empty set, bad index or inconsistent configuration."""


class UngatherableInitialError(InputError):
    """Initial configuration belongs to an ungatherable set."""

    def __init__(self, witness: str, message: Optional[str] = None):
        self.witness = witness
        super().__init__(message or f"Initial configuration is ungatherable ({witness})")


class CapabilityError(GatheringError):
    """Request exceeds what exhaustive enumeration can handle."""

    def __init__(self, message: str, estimate: Optional[int] = None):
        self.estimate = estimate
        if estimate is not None:
            message = f"{message} (estimated size: {estimate})"
        super().__init__(message)


class ContractViolation(GatheringError):
    """An algorithm produced an offer outside the movement rules."""


class SynthesisError(GatheringError):
    """A move table class has no plan satisfying the certificate."""

    def __init__(self, message: str, classes: Any = None):
        self.classes = classes
        super().__init__(message)


class CertificationError(GatheringError):
    """A move table failed one or more certificate clauses."""

    def __init__(self, report: Any):
        self.report = report
        failures = getattr(report, "failures", [])
        super().__init__(f"Table certification failed: {'; '.join(failures) or 'unknown clause'}")


class ScenarioInapplicableError(GatheringError):
    """An adversary construction cannot be realized under a fixed permutation."""
