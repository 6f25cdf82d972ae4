"""Tokenizer for `.tsl` sources."""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import ParseError, Position

KEYWORDS = {
    "template", "endtemplate", "instance", "typedef", "enum", "process",
    "task", "controllable", "void", "goal", "if", "else", "forever",
    "pause", "assert", "true", "false", "bool",
}

# longest first so '==' wins over '='
PUNCT = [
    "...", "==", "!=", "<=", ">=", "&&", "||",
    "{", "}", "(", ")", "[", "]", ";", ",", "=", ".", "*", "!", "<", ">", ":",
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT KEYWORD punct-text EOF
    text: str
    pos: Position

    def __repr__(self) -> str:
        return f"Token({self.kind},{self.text!r}@{self.pos.line}:{self.pos.col})"


def tokenize(text: str, filename: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def pos() -> Position:
        return Position(filename, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = "KEYWORD" if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, pos()))
            col += i - start
            continue
        if c.isdigit():
            start = i
            if text.startswith("0x", i) or text.startswith("0X", i):
                i += 2
                while i < n and text[i] in "0123456789abcdefABCDEF":
                    i += 1
                if i == start + 2:
                    raise ParseError("malformed hex literal", pos())
            else:
                while i < n and text[i].isdigit():
                    i += 1
            word = text[start:i]
            tokens.append(Token("INT", word, pos()))
            col += i - start
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                tokens.append(Token(p, p, pos()))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", pos())
    tokens.append(Token("EOF", "", pos()))
    return tokens
