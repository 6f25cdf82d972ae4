"""Source-language pipeline: lex, parse, type-check, flatten."""

from __future__ import annotations

from .ast import Ast, SourceSpec
from .check import typecheck
from .flatten import flatten
from .model import SpecModel
from .parse import parse, parse_statement, parse_text


def compile_model(source: SourceSpec) -> SpecModel:
    """Full frontend: source files to a flattened, typed model."""
    return flatten(typecheck(parse(source)))


def compile_file(path: str, entry: str = "main") -> SpecModel:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return compile_model(SourceSpec(((path, text),), entry))


__all__ = [
    "Ast",
    "SourceSpec",
    "SpecModel",
    "compile_file",
    "compile_model",
    "flatten",
    "parse",
    "parse_statement",
    "parse_text",
    "typecheck",
]
