"""pa_multigraph.errors

Exception hierarchy shared across the package.  Value-shaped failures also
derive from ``ValueError`` so plain ``except ValueError`` handlers keep
working.
"""
from __future__ import annotations

from typing import Optional

__all__ = [
    "PAMultigraphError",
    "ConfigError",
    "OutOfRangeError",
    "DomainError",
    "ConditionViolation",
    "InsufficientRangeError",
    "SeedInvalidError",
    "LoopError",
    "UnsupportedModeError",
    "ParseError",
    "EmptyGraphError",
    "InfeasibleError",
    "InvariantViolation",
    "CapReachedError",
    "RunAbortedError",
]


class PAMultigraphError(Exception):
    """Base class for every error raised by pa_multigraph."""


class ConfigError(PAMultigraphError, ValueError):
    """Invalid configuration (plan file, growth spec, CLI flags)."""


class OutOfRangeError(PAMultigraphError, IndexError):
    """A time index or node id lies outside the stored range."""


class DomainError(PAMultigraphError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class ConditionViolation(PAMultigraphError, ValueError):
    """xi-product growth produced a non-integer f(t)."""

    def __init__(self, t: int, value: object) -> None:
        super().__init__(f"f({t}) = {value} is not a positive integer")
        self.t = t
        self.value = value


class InsufficientRangeError(PAMultigraphError, ValueError):
    """Horizon too short for the requested doubling diagnostics."""


class SeedInvalidError(PAMultigraphError, ValueError):
    """Seed multigraph has an isolated node or does not match the growth spec."""


class LoopError(PAMultigraphError, ValueError):
    """A loop (u, u) was given or queried."""


class UnsupportedModeError(PAMultigraphError):
    """Operation needs adjacency but the graph stores degrees only."""


class ParseError(PAMultigraphError, ValueError):
    """Malformed multigraph text."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class EmptyGraphError(PAMultigraphError):
    """Sampling from a graph whose total degree is zero."""


class InfeasibleError(PAMultigraphError, ValueError):
    """Without-replacement sampling asked for more endpoints than nodes."""

    def __init__(self, message: str, step: Optional[int] = None) -> None:
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class InvariantViolation(PAMultigraphError):
    """An internal invariant (degree sum, probability mass) was broken."""


class CapReachedError(PAMultigraphError):
    """ER multiplicity sampling reached the configured cap."""


class RunAbortedError(PAMultigraphError):
    """One run of an ensemble failed; the whole ensemble is poisoned."""

    def __init__(self, run_index: int, cause: BaseException) -> None:
        super().__init__(f"run {run_index} aborted: {cause}")
        self.run_index = run_index
        self.cause = cause
