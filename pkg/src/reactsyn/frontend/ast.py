"""Surface syntax tree, its pretty-printer and structural skeletons.

Nodes keep their source positions for diagnostics and debugger display;
the checker annotates expression nodes in place (``ty``, ``binding``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import Position

# ----------------------------------------------------------------------
# input


@dataclass(frozen=True)
class SourceSpec:
    """One compilation request: source files plus the entry template."""

    files: tuple[tuple[str, str], ...]  # (path, text)
    entry: str = "main"


# ----------------------------------------------------------------------
# expressions


@dataclass
class ExprAst:
    pos: Position
    ty: object = field(default=None, repr=False, compare=False)


@dataclass
class AInt(ExprAst):
    value: int = 0


@dataclass
class ABool(ExprAst):
    value: bool = False


@dataclass
class AName(ExprAst):
    parts: tuple[str, ...] = ()
    binding: object = field(default=None, repr=False, compare=False)

    def dotted(self) -> str:
        return ".".join(self.parts)


@dataclass
class ANondet(ExprAst):
    pass


@dataclass
class AUnary(ExprAst):
    op: str = "!"
    operand: ExprAst = None


@dataclass
class ABinary(ExprAst):
    op: str = ""
    lhs: ExprAst = None
    rhs: ExprAst = None


@dataclass
class ASlice(ExprAst):
    base: AName = None
    hi: int = 0
    lo: int = 0


# ----------------------------------------------------------------------
# statements


@dataclass
class StmtAst:
    pos: Position


@dataclass
class ASkip(StmtAst):
    pass


@dataclass
class ABlock(StmtAst):
    stmts: list[StmtAst] = field(default_factory=list)


@dataclass
class AAssign(StmtAst):
    target: AName = None
    expr: ExprAst = None


@dataclass
class ACall(StmtAst):
    callee: AName = None
    args: list[ExprAst] = field(default_factory=list)


@dataclass
class AIf(StmtAst):
    cond: ExprAst = None
    then: StmtAst = None
    els: StmtAst | None = None


@dataclass
class AForever(StmtAst):
    body: StmtAst = None


@dataclass
class APause(StmtAst):
    pass


@dataclass
class AAssert(StmtAst):
    cond: ExprAst = None


@dataclass
class AMagic(StmtAst):
    pass


# ----------------------------------------------------------------------
# declarations


@dataclass
class TypeRef:
    kind: str  # "bool" | "uint" | "named"
    pos: Position
    bits: int = 0
    name: str = ""

    def __str__(self) -> str:
        if self.kind == "bool":
            return "bool"
        if self.kind == "uint":
            return f"uint{self.bits}"
        return self.name


@dataclass
class EnumDecl:
    name: str
    literals: list[str]
    pos: Position


@dataclass
class VarDeclAst:
    type_ref: TypeRef
    name: str
    init: ExprAst | None
    pos: Position


@dataclass
class InstanceDecl:
    template: str
    name: str
    args: list[tuple[str, Position]]
    pos: Position


@dataclass
class ProcessDeclAst:
    name: str
    body: StmtAst
    pos: Position


@dataclass
class TaskDeclAst:
    name: str
    controllable: bool
    params: list[tuple[TypeRef, str]]
    body: StmtAst
    pos: Position


@dataclass
class GoalDeclAst:
    name: str
    expr: ExprAst
    pos: Position


@dataclass
class TemplateDecl:
    name: str
    ports: list[tuple[str, str, Position]]  # (template type, port name, pos)
    enums: list[EnumDecl]
    vars: list[VarDeclAst]
    instances: list[InstanceDecl]
    processes: list[ProcessDeclAst]
    tasks: list[TaskDeclAst]
    goals: list[GoalDeclAst]
    pos: Position


@dataclass
class Ast:
    templates: list[TemplateDecl]
    entry: str

    def template(self, name: str) -> TemplateDecl | None:
        for t in self.templates:
            if t.name == name:
                return t
        return None


# ----------------------------------------------------------------------
# pretty printer


def unparse(ast: Ast) -> str:
    out: list[str] = []
    for t in ast.templates:
        ports = ", ".join(f"{ty} {nm}" for ty, nm, _ in t.ports)
        out.append(f"template {t.name}({ports})" if t.ports else f"template {t.name}")
        for inst in t.instances:
            args = ", ".join(a for a, _ in inst.args)
            out.append(f"  instance {inst.template} {inst.name}({args});")
        for e in t.enums:
            lits = ", ".join(e.literals)
            out.append(f"  typedef enum {{{lits}}} {e.name};")
        for v in t.vars:
            init = f" = {unparse_expr(v.init)}" if v.init is not None else ""
            out.append(f"  {v.type_ref} {v.name}{init};")
        for p in t.processes:
            out.append(f"  process {p.name} {{")
            _pp_stmt(p.body, out, 4, top=True)
            out.append("  };")
        for task in t.tasks:
            ctl = "controllable " if task.controllable else ""
            params = ", ".join(f"{ty} {nm}" for ty, nm in task.params)
            out.append(f"  task {ctl}void {task.name}({params}) {{")
            _pp_stmt(task.body, out, 4, top=True)
            out.append("  };")
        for g in t.goals:
            out.append(f"  goal {g.name} = {unparse_expr(g.expr)};")
        out.append("endtemplate")
        out.append("")
    return "\n".join(out)


def _pp_stmt(s: StmtAst, out: list[str], indent: int, top: bool = False) -> None:
    pad = " " * indent
    if isinstance(s, ABlock):
        if top:
            for inner in s.stmts:
                _pp_stmt(inner, out, indent)
        else:
            out.append(pad + "{")
            for inner in s.stmts:
                _pp_stmt(inner, out, indent + 2)
            out.append(pad + "};")
    elif isinstance(s, ASkip):
        out.append(pad + ";")
    elif isinstance(s, AAssign):
        out.append(f"{pad}{s.target.dotted()} = {unparse_expr(s.expr)};")
    elif isinstance(s, ACall):
        args = ", ".join(unparse_expr(a) for a in s.args)
        out.append(f"{pad}{s.callee.dotted()}({args});")
    elif isinstance(s, AIf):
        out.append(f"{pad}if ({unparse_expr(s.cond)}) {{")
        _pp_stmt(s.then, out, indent + 2, top=isinstance(s.then, ABlock))
        if s.els is not None:
            out.append(pad + "} else {")
            _pp_stmt(s.els, out, indent + 2, top=isinstance(s.els, ABlock))
        out.append(pad + "};")
    elif isinstance(s, AForever):
        out.append(pad + "forever {")
        _pp_stmt(s.body, out, indent + 2, top=isinstance(s.body, ABlock))
        out.append(pad + "};")
    elif isinstance(s, APause):
        out.append(pad + "pause;")
    elif isinstance(s, AAssert):
        out.append(f"{pad}assert({unparse_expr(s.cond)});")
    elif isinstance(s, AMagic):
        out.append(pad + "...;")
    else:
        raise AssertionError(f"unhandled statement {s!r}")


_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3}


def unparse_expr(e: ExprAst, parent_prec: int = 0) -> str:
    if isinstance(e, AInt):
        return str(e.value)
    if isinstance(e, ABool):
        return "true" if e.value else "false"
    if isinstance(e, AName):
        return e.dotted()
    if isinstance(e, ANondet):
        return "*"
    if isinstance(e, AUnary):
        return f"!{unparse_expr(e.operand, 9)}"
    if isinstance(e, ASlice):
        return f"{e.base.dotted()}[{e.hi}:{e.lo}]"
    if isinstance(e, ABinary):
        prec = _PREC[e.op]
        text = (
            f"{unparse_expr(e.lhs, prec)} {e.op} {unparse_expr(e.rhs, prec + 1)}"
        )
        return f"({text})" if prec < parent_prec else text
    raise AssertionError(f"unhandled expression {e!r}")


# ----------------------------------------------------------------------
# position-independent structure, for round-trip comparisons


def skeleton(node) -> object:
    """Nested tuples capturing structure and names but not positions."""
    if isinstance(node, Ast):
        return ("ast", node.entry, tuple(skeleton(t) for t in node.templates))
    if isinstance(node, TemplateDecl):
        return (
            "template",
            node.name,
            tuple((ty, nm) for ty, nm, _ in node.ports),
            tuple(("enum", e.name, tuple(e.literals)) for e in node.enums),
            tuple(
                ("var", str(v.type_ref), v.name, skeleton(v.init)) for v in node.vars
            ),
            tuple(
                ("instance", i.template, i.name, tuple(a for a, _ in i.args))
                for i in node.instances
            ),
            tuple(("process", p.name, skeleton(p.body)) for p in node.processes),
            tuple(
                (
                    "task",
                    t.name,
                    t.controllable,
                    tuple((str(ty), nm) for ty, nm in t.params),
                    skeleton(t.body),
                )
                for t in node.tasks
            ),
            tuple(("goal", g.name, skeleton(g.expr)) for g in node.goals),
        )
    if node is None:
        return None
    if isinstance(node, ABlock):
        return ("block", tuple(skeleton(s) for s in node.stmts))
    if isinstance(node, ASkip):
        return ("skip",)
    if isinstance(node, AAssign):
        return ("assign", node.target.parts, skeleton(node.expr))
    if isinstance(node, ACall):
        return ("call", node.callee.parts, tuple(skeleton(a) for a in node.args))
    if isinstance(node, AIf):
        return ("if", skeleton(node.cond), skeleton(node.then), skeleton(node.els))
    if isinstance(node, AForever):
        return ("forever", skeleton(node.body))
    if isinstance(node, APause):
        return ("pause",)
    if isinstance(node, AAssert):
        return ("assert", skeleton(node.cond))
    if isinstance(node, AMagic):
        return ("magic",)
    if isinstance(node, AInt):
        return ("int", node.value)
    if isinstance(node, ABool):
        return ("bool", node.value)
    if isinstance(node, AName):
        return ("name", node.parts)
    if isinstance(node, ANondet):
        return ("*",)
    if isinstance(node, AUnary):
        return ("unary", node.op, skeleton(node.operand))
    if isinstance(node, ABinary):
        return ("binary", node.op, skeleton(node.lhs), skeleton(node.rhs))
    if isinstance(node, ASlice):
        return ("slice", node.base.parts, node.hi, node.lo)
    raise AssertionError(f"unhandled node {node!r}")
