"""Flattened specification model: the resolved, instance-qualified IR.

Everything downstream (segment construction, game encoding, the
interpreter, code generation) consumes this representation.  All names
are fully qualified with their instance path, every expression carries
its type, and every reference points at a declaration object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import Position

# ----------------------------------------------------------------------
# types


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"

    @property
    def width(self) -> int:
        return 1


@dataclass(frozen=True)
class UIntType:
    bits: int

    def __str__(self) -> str:
        return f"uint{self.bits}"

    @property
    def width(self) -> int:
        return self.bits


@dataclass(frozen=True)
class EnumType:
    qualname: str  # "<template>.<typedef name>"
    literals: tuple[str, ...]

    def __str__(self) -> str:
        return self.qualname

    @property
    def width(self) -> int:
        return max(1, (len(self.literals) - 1).bit_length())


BOOL = BoolType()

Type = BoolType | UIntType | EnumType


def type_value_count(ty: Type) -> int:
    """Number of valid values (may be below 2**width for enums)."""
    if isinstance(ty, EnumType):
        return len(ty.literals)
    return 1 << ty.width


# ----------------------------------------------------------------------
# expressions


@dataclass
class Expr:
    ty: Type
    pos: Position


@dataclass
class EConst(Expr):
    value: int

    def __repr__(self) -> str:
        return f"EConst({self.value}:{self.ty})"


@dataclass
class EVar(Expr):
    var: "VarDecl"


@dataclass
class EParam(Expr):
    name: str


@dataclass
class ENondet(Expr):
    pass


@dataclass
class EUnary(Expr):
    op: str  # "!"
    operand: Expr


@dataclass
class EBinary(Expr):
    op: str  # == != && || < <= > >=
    lhs: Expr
    rhs: Expr


@dataclass
class ESlice(Expr):
    base: Expr
    hi: int
    lo: int


# ----------------------------------------------------------------------
# statements


@dataclass
class Stmt:
    pos: Position


@dataclass
class SSeq(Stmt):
    stmts: list[Stmt]


@dataclass
class SSkip(Stmt):
    pass


@dataclass
class SAssign(Stmt):
    var: "VarDecl"
    expr: Expr


@dataclass
class SIf(Stmt):
    cond: Expr
    then: Stmt
    els: Stmt | None


@dataclass
class SCall(Stmt):
    task: "TaskDecl"
    args: list[Expr]


@dataclass
class SForever(Stmt):
    body: Stmt


@dataclass
class SPause(Stmt):
    uid: int = -1


@dataclass
class SAssert(Stmt):
    cond: Expr


@dataclass
class SMagic(Stmt):
    site: int = -1


# ----------------------------------------------------------------------
# declarations


@dataclass(eq=False)
class VarDecl:
    name: str  # fully qualified, e.g. "jb.state"
    ty: Type
    init: int | None  # constant initial value, if declared
    pos: Position

    def __repr__(self) -> str:
        return f"VarDecl({self.name}:{self.ty})"


@dataclass(eq=False)
class TaskDecl:
    name: str
    controllable: bool
    params: list[tuple[str, Type]]
    body: Stmt
    pos: Position

    def __repr__(self) -> str:
        kind = "controllable " if self.controllable else ""
        return f"TaskDecl({kind}{self.name})"


@dataclass(eq=False)
class ProcessDecl:
    name: str
    body: Stmt
    pos: Position


@dataclass(eq=False)
class Goal:
    name: str
    expr: Expr
    pos: Position


@dataclass(frozen=True)
class MagicSite:
    site: int
    task: str  # qualified name of the enclosing task
    ordinal: int  # index of this block within the task body
    pos: Position


@dataclass(eq=False)
class Instance:
    path: tuple[str, ...]  # () is the entry instance
    template: str

    @property
    def name(self) -> str:
        return ".".join(self.path) if self.path else "<entry>"


@dataclass(eq=False)
class SpecModel:
    entry: str
    instances: list[Instance]
    vars: list[VarDecl]
    processes: list[ProcessDecl]
    tasks: list[TaskDecl]
    goals: list[Goal]
    magic_sites: list[MagicSite]
    var_by_name: dict[str, VarDecl] = field(default_factory=dict)
    task_by_name: dict[str, TaskDecl] = field(default_factory=dict)
    # elaboration context kept for late statement compilation (fills):
    # the checked syntax tree, instance template names and port bindings
    ast: object = None
    instance_of: dict[tuple[str, ...], str] = field(default_factory=dict)
    portmaps: dict[tuple[str, ...], dict[str, tuple[str, ...]]] = field(
        default_factory=dict
    )

    def controllable_tasks(self) -> list[TaskDecl]:
        return [t for t in self.tasks if t.controllable]

    def site_by_id(self, site: int) -> MagicSite:
        return self.magic_sites[site]


# ----------------------------------------------------------------------
# traversal helpers


def walk_stmts(stmt: Stmt):
    """Yield every statement node, preorder."""
    yield stmt
    if isinstance(stmt, SSeq):
        for s in stmt.stmts:
            yield from walk_stmts(s)
    elif isinstance(stmt, SIf):
        yield from walk_stmts(stmt.then)
        if stmt.els is not None:
            yield from walk_stmts(stmt.els)
    elif isinstance(stmt, SForever):
        yield from walk_stmts(stmt.body)


def walk_exprs_of_stmt(stmt: Stmt):
    """Yield every expression appearing directly in one statement node."""
    if isinstance(stmt, SAssign):
        yield stmt.expr
    elif isinstance(stmt, SIf):
        yield stmt.cond
    elif isinstance(stmt, SAssert):
        yield stmt.cond
    elif isinstance(stmt, SCall):
        yield from stmt.args


def walk_subexprs(expr: Expr):
    yield expr
    if isinstance(expr, EUnary):
        yield from walk_subexprs(expr.operand)
    elif isinstance(expr, EBinary):
        yield from walk_subexprs(expr.lhs)
        yield from walk_subexprs(expr.rhs)
    elif isinstance(expr, ESlice):
        yield from walk_subexprs(expr.base)
