"""
Input validation utilities for the gathering toolkit.

Provides validation for placements, activation orders and bounding-rectangle
caps given on the command line or in scenario files, plus the result type
shared by every verification check.
"""

import re
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple


@dataclass
class ValidationResult:
    """Result of a validation operation."""
    is_valid: bool
    errors: List[str]
    warnings: List[str]


@dataclass
class CheckResult:
    """Outcome of a verification check; a skipped check counts as passed."""
    passed: bool
    message: str
    witness: Any = None
    skipped: bool = False

    def __bool__(self) -> bool:
        return self.passed


PLACEMENT_ENTRY = re.compile(r"^(?P<vertex>[01]+|\(\s*-?\d+\s*,\s*-?\d+\s*\))(?:\s*\*\s*(?P<count>-?\d+))?$")
MBR_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")
RECOMMENDED_MULTIPLICITY = 3


class InputValidator:
    """Validates and parses user-supplied run inputs."""

    @staticmethod
    def split_placement(text: str) -> List[Tuple[str, int]]:
        """
        Split a placement string into (vertex text, count) entries.

        Entries are separated by ';' or whitespace; each is a vertex optionally
        followed by '*count', e.g. "000*2; 011" or "(0,0)*2;(1,1)".

        Raises:
            ValueError: If an entry is malformed
        """
        entries = []
        for chunk in re.split(r"[;\s]+(?![^()]*\))", text.strip()):
            if not chunk:
                continue
            match = PLACEMENT_ENTRY.match(chunk)
            if not match:
                raise ValueError(f"Malformed placement entry '{chunk}'")
            count = int(match.group("count")) if match.group("count") is not None else 1
            entries.append((match.group("vertex").replace(" ", ""), count))
        return entries

    @staticmethod
    def validate_counts(counts: Dict[str, int], max_multiplicity: Optional[int] = None) -> ValidationResult:
        """
        Validate robot counts per vertex.

        Args:
            counts: Rendered vertex -> robot count
            max_multiplicity: Optional per-vertex cap

        Returns:
            ValidationResult with validation status and any errors
        """
        errors = []
        warnings = []

        if not counts:
            errors.append("Placement cannot be empty")

        for vertex, count in counts.items():
            if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                errors.append(f"Count for {vertex} must be a non-negative integer, got {count!r}")
            elif max_multiplicity is not None and count > max_multiplicity:
                errors.append(f"Count for {vertex} exceeds the cap of {max_multiplicity}")
            elif count > RECOMMENDED_MULTIPLICITY:
                warnings.append(f"Multiplicity {count} at {vertex}; the algorithms only distinguish one from many")

        if counts and sum(c for c in counts.values() if isinstance(c, int) and c > 0) == 0:
            errors.append("Placement needs at least one robot")

        occupied = [v for v, c in counts.items() if isinstance(c, int) and c > 0]
        if len(occupied) == 1:
            warnings.append("Robots are already gathered")

        return ValidationResult(is_valid=not errors, errors=errors, warnings=warnings)

    @staticmethod
    def parse_schedule(text: str, k: int) -> Tuple[int, ...]:
        """
        Parse a comma-separated activation order of robots 0..k-1.

        Raises:
            ValueError: If the order is not a permutation of the robots
        """
        try:
            order = tuple(int(part) for part in text.split(",") if part.strip())
        except ValueError:
            raise ValueError(f"Schedule '{text}' must list robot indices separated by commas")
        result = InputValidator.validate_schedule(order, k)
        if not result.is_valid:
            raise ValueError("; ".join(result.errors))
        return order

    @staticmethod
    def validate_schedule(order: Sequence[int], k: int) -> ValidationResult:
        errors = []
        if len(order) != k:
            errors.append(f"Schedule lists {len(order)} robots, expected {k}")
        if sorted(order) != list(range(k)):
            errors.append(f"Schedule must be a permutation of 0..{k - 1}")
        return ValidationResult(is_valid=not errors, errors=errors, warnings=[])

    @staticmethod
    def parse_mbr(text: str) -> Tuple[int, int]:
        """Parse an 'MxN' rectangle cap."""
        match = MBR_PATTERN.match(text)
        if not match:
            raise ValueError(f"Rectangle cap '{text}' must look like 3x3")
        rows, columns = int(match.group(1)), int(match.group(2))
        if rows < 1 or columns < 1:
            raise ValueError("Rectangle sides must be positive")
        return rows, columns


def format_validation_errors(result: ValidationResult) -> str:
    """
    Format validation result into a readable string.

    Args:
        result: ValidationResult to format

    Returns:
        Formatted error/warning message
    """
    messages = []

    if result.errors:
        messages.append("❌ Errors:")
        for error in result.errors:
            messages.append(f"  • {error}")

    if result.warnings:
        messages.append("⚠️  Warnings:")
        for warning in result.warnings:
            messages.append(f"  • {warning}")

    return "\n".join(messages) if messages else "✅ Validation passed"
