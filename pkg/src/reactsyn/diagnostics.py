"""Source positions, diagnostics and the error taxonomy.

Machine-readable diagnostic rendering is one line per diagnostic:
``SEVERITY file:line:col message``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Position:
    file: str
    line: int  # 1-based
    col: int  # 1-based

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NO_POS = Position("<builtin>", 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "note"
    pos: Position
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.pos} {self.message}"


class SourceError(Exception):
    """Base of all user-facing failures carrying a source position."""

    severity = "error"

    def __init__(self, message: str, pos: Position = NO_POS):
        super().__init__(message)
        self.pos = pos
        self.message = message

    def diagnostic(self) -> Diagnostic:
        return Diagnostic(self.severity, self.pos, self.message)

    def __str__(self) -> str:
        return str(self.diagnostic())


class ParseError(SourceError):
    """Malformed input; carries the set of tokens that were acceptable."""

    def __init__(self, message: str, pos: Position, expected: set[str] | None = None):
        super().__init__(message, pos)
        self.expected = frozenset(expected or ())


class TypeCheckError(SourceError):
    """Type mismatch, unknown identifier, arity error or untypable ``*``."""


class InstantiationError(SourceError):
    """Cyclic instantiation or unbound port."""


class StructureError(SourceError):
    """Statement in a context its atomicity rules forbid."""


class WidthError(SourceError):
    """Variable exceeds the supported bit width."""


class CompileError(SourceError):
    """A model no longer elaborates after an edit."""
