"""Recursive-descent parser for `.tsl` sources.

The grammar is documented in ``docs/grammar.md``.  Branches of ``if``
and bodies of ``forever`` are normalised to blocks, so pretty-printing
and re-parsing yields a structurally identical tree.
"""

from __future__ import annotations

import re

from ..diagnostics import ParseError, Position
from . import ast as A
from .lex import Token, tokenize

_UINT_RE = re.compile(r"^uint([1-9][0-9]*)$")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers -------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_kw(self, word: str) -> bool:
        return self.at("KEYWORD", word)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        want = text or kind
        raise ParseError(
            f"expected {want!r}, found {tok.text or tok.kind!r}", tok.pos, {want}
        )

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind == "KEYWORD" and tok.text == word:
            return self.next()
        raise ParseError(
            f"expected {word!r}, found {tok.text or tok.kind!r}", tok.pos, {word}
        )

    def accept(self, kind: str) -> bool:
        if self.at(kind):
            self.next()
            return True
        return False

    # -- declarations --------------------------------------------------

    def parse_templates(self) -> list[A.TemplateDecl]:
        templates = []
        while not self.at("EOF"):
            templates.append(self.template())
        return templates

    def template(self) -> A.TemplateDecl:
        pos = self.expect_kw("template").pos
        name = self.expect("IDENT").text
        ports: list[tuple[str, str, Position]] = []
        if self.accept("("):
            if not self.at(")"):
                while True:
                    tpos = self.peek().pos
                    ptype = self.expect("IDENT").text
                    pname = self.expect("IDENT").text
                    ports.append((ptype, pname, tpos))
                    if not self.accept(","):
                        break
            self.expect(")")
        decl = A.TemplateDecl(name, ports, [], [], [], [], [], [], pos)
        while not self.at_kw("endtemplate"):
            if self.at("EOF"):
                raise ParseError(
                    "expected 'endtemplate'", self.peek().pos, {"endtemplate"}
                )
            self.template_item(decl)
        self.next()
        return decl

    def template_item(self, decl: A.TemplateDecl) -> None:
        if self.at_kw("instance"):
            pos = self.next().pos
            template = self.expect("IDENT").text
            name = self.expect("IDENT").text
            args: list[tuple[str, Position]] = []
            self.expect("(")
            if not self.at(")"):
                while True:
                    tok = self.expect("IDENT")
                    args.append((tok.text, tok.pos))
                    if not self.accept(","):
                        break
            self.expect(")")
            self.expect(";")
            decl.instances.append(A.InstanceDecl(template, name, args, pos))
        elif self.at_kw("typedef"):
            pos = self.next().pos
            self.expect_kw("enum")
            self.expect("{")
            literals = [self.expect("IDENT").text]
            while self.accept(","):
                literals.append(self.expect("IDENT").text)
            self.expect("}")
            name = self.expect("IDENT").text
            self.expect(";")
            decl.enums.append(A.EnumDecl(name, literals, pos))
        elif self.at_kw("process"):
            pos = self.next().pos
            name = self.expect("IDENT").text
            body = self.block()
            self.accept(";")
            decl.processes.append(A.ProcessDeclAst(name, body, pos))
        elif self.at_kw("task"):
            pos = self.next().pos
            controllable = False
            if self.at_kw("controllable"):
                self.next()
                controllable = True
            self.expect_kw("void")
            name = self.expect("IDENT").text
            params: list[tuple[A.TypeRef, str]] = []
            self.expect("(")
            if not self.at(")"):
                while True:
                    ty = self.type_ref()
                    pname = self.expect("IDENT").text
                    params.append((ty, pname))
                    if not self.accept(","):
                        break
            self.expect(")")
            body = self.block()
            self.accept(";")
            decl.tasks.append(A.TaskDeclAst(name, controllable, params, body, pos))
        elif self.at_kw("goal"):
            pos = self.next().pos
            name = self.expect("IDENT").text
            self.expect("=")
            expr = self.expr()
            self.expect(";")
            decl.goals.append(A.GoalDeclAst(name, expr, pos))
        else:
            ty = self.type_ref()
            name = self.expect("IDENT").text
            init = None
            if self.accept("="):
                init = self.expr()
            self.expect(";")
            decl.vars.append(A.VarDeclAst(ty, name, init, ty.pos))

    def type_ref(self) -> A.TypeRef:
        tok = self.peek()
        if self.at_kw("bool"):
            self.next()
            return A.TypeRef("bool", tok.pos)
        if tok.kind == "IDENT":
            m = _UINT_RE.match(tok.text)
            self.next()
            if m:
                return A.TypeRef("uint", tok.pos, bits=int(m.group(1)))
            return A.TypeRef("named", tok.pos, name=tok.text)
        raise ParseError(
            f"expected a type, found {tok.text or tok.kind!r}",
            tok.pos,
            {"bool", "uintN", "IDENT"},
        )

    # -- statements ----------------------------------------------------

    def block(self) -> A.ABlock:
        pos = self.expect("{").pos
        stmts: list[A.StmtAst] = []
        while not self.at("}"):
            if self.at("EOF"):
                raise ParseError("expected '}'", self.peek().pos, {"}"})
            stmts.append(self.stmt())
        self.next()
        return A.ABlock(pos, stmts)

    def _as_block(self, s: A.StmtAst) -> A.ABlock:
        return s if isinstance(s, A.ABlock) else A.ABlock(s.pos, [s])

    def stmt(self) -> A.StmtAst:
        tok = self.peek()
        if self.at(";"):
            self.next()
            return A.ASkip(tok.pos)
        if self.at("{"):
            body = self.block()
            self.accept(";")
            return body
        if self.at_kw("if"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self._as_block(self.stmt())
            els = None
            if self.at_kw("else"):
                self.next()
                els = self._as_block(self.stmt())
            self.accept(";")
            return A.AIf(tok.pos, cond=cond, then=then, els=els)
        if self.at_kw("forever"):
            self.next()
            body = self.block()
            self.accept(";")
            return A.AForever(tok.pos, body=body)
        if self.at_kw("pause"):
            self.next()
            self.expect(";")
            return A.APause(tok.pos)
        if self.at_kw("assert"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return A.AAssert(tok.pos, cond=cond)
        if self.at("..."):
            self.next()
            self.expect(";")
            return A.AMagic(tok.pos)
        if tok.kind == "IDENT":
            name = self.name()
            if self.at("("):
                self.next()
                args: list[A.ExprAst] = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                self.expect(";")
                return A.ACall(tok.pos, callee=name, args=args)
            self.expect("=")
            expr = self.expr()
            self.expect(";")
            return A.AAssign(tok.pos, target=name, expr=expr)
        raise ParseError(
            f"expected a statement, found {tok.text or tok.kind!r}",
            tok.pos,
            {"if", "forever", "pause", "assert", "...", "IDENT", "{", ";"},
        )

    def name(self) -> A.AName:
        tok = self.expect("IDENT")
        parts = [tok.text]
        while self.at("."):
            self.next()
            parts.append(self.expect("IDENT").text)
        return A.AName(tok.pos, parts=tuple(parts))

    # -- expressions ---------------------------------------------------

    def expr(self) -> A.ExprAst:
        return self.or_expr()

    def or_expr(self) -> A.ExprAst:
        lhs = self.and_expr()
        while self.at("||"):
            pos = self.next().pos
            lhs = A.ABinary(pos, op="||", lhs=lhs, rhs=self.and_expr())
        return lhs

    def and_expr(self) -> A.ExprAst:
        lhs = self.cmp_expr()
        while self.at("&&"):
            pos = self.next().pos
            lhs = A.ABinary(pos, op="&&", lhs=lhs, rhs=self.cmp_expr())
        return lhs

    def cmp_expr(self) -> A.ExprAst:
        lhs = self.unary_expr()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.at(op):
                pos = self.next().pos
                return A.ABinary(pos, op=op, lhs=lhs, rhs=self.unary_expr())
        return lhs

    def unary_expr(self) -> A.ExprAst:
        if self.at("!"):
            pos = self.next().pos
            return A.AUnary(pos, op="!", operand=self.unary_expr())
        return self.primary()

    def primary(self) -> A.ExprAst:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return A.AInt(tok.pos, value=int(tok.text, 0))
        if self.at_kw("true") or self.at_kw("false"):
            self.next()
            return A.ABool(tok.pos, value=tok.text == "true")
        if self.at("*"):
            self.next()
            return A.ANondet(tok.pos)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "IDENT":
            name = self.name()
            if self.at("["):
                self.next()
                hi = int(self.expect("INT").text, 0)
                self.expect(":")
                lo = int(self.expect("INT").text, 0)
                self.expect("]")
                return A.ASlice(tok.pos, base=name, hi=hi, lo=lo)
            return name
        raise ParseError(
            f"expected an expression, found {tok.text or tok.kind!r}",
            tok.pos,
            {"INT", "true", "false", "*", "(", "IDENT", "!"},
        )


def parse(source: A.SourceSpec) -> A.Ast:
    """Parse every file of a source spec into one syntax tree.

    Raises `ParseError` on malformed input, duplicate template names or
    a missing entry template.
    """
    if not source.files:
        raise ParseError("no input files", Position("<input>", 0, 0))
    templates: list[A.TemplateDecl] = []
    for path, text in source.files:
        parser = _Parser(tokenize(text, path))
        templates.extend(parser.parse_templates())
    seen: dict[str, A.TemplateDecl] = {}
    for t in templates:
        if t.name in seen:
            raise ParseError(f"duplicate template {t.name!r}", t.pos)
        seen[t.name] = t
    tree = A.Ast(templates, source.entry)
    if tree.template(source.entry) is None:
        raise ParseError(
            f"entry template {source.entry!r} not found",
            Position(source.files[0][0], 1, 1),
        )
    return tree


def parse_text(text: str, filename: str = "<string>", entry: str = "main") -> A.Ast:
    return parse(A.SourceSpec(((filename, text),), entry))


def parse_statement(text: str, filename: str = "<action>") -> A.StmtAst:
    """Parse a single statement, for debugger actions and block fills."""
    parser = _Parser(tokenize(text, filename))
    stmts = []
    while not parser.at("EOF"):
        stmts.append(parser.stmt())
    if not stmts:
        raise ParseError("empty statement", Position(filename, 1, 1))
    if len(stmts) == 1:
        return stmts[0]
    return A.ABlock(stmts[0].pos, stmts)
