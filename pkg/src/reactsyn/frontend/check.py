"""Name resolution and type checking over the surface tree.

Annotates every expression with its type and every name with a binding
that the flattener later resolves against concrete instances.  Unsigned
widening is implicit; truncation is an error.  ``*`` takes the type its
context demands and is rejected where no type is determinable.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import StructureError, TypeCheckError
from . import ast as A
from .model import BOOL, BoolType, EnumType, Type, UIntType

MAX_WIDTH = 64


# A pending integer-literal type, resolved by its context.
@dataclass(frozen=True)
class _IntLit:
    value: int

    def __str__(self) -> str:
        return "int literal"


@dataclass(frozen=True)
class VarBinding:
    chain: tuple[tuple[str, str], ...]  # hops: ("port"|"inst", name)
    name: str
    ty: Type


@dataclass(frozen=True)
class ParamBinding:
    name: str
    ty: Type


@dataclass(frozen=True)
class EnumBinding:
    ty: EnumType
    index: int


@dataclass(frozen=True)
class TaskBinding:
    chain: tuple[tuple[str, str], ...]
    name: str
    controllable: bool
    params: tuple[Type, ...]


@dataclass
class TemplateInfo:
    decl: A.TemplateDecl
    ports: dict[str, str]  # port name -> template name
    enums: dict[str, EnumType]
    enum_lits: dict[str, tuple[EnumType, int]]
    vars: dict[str, Type]
    tasks: dict[str, A.TaskDeclAst]
    task_params: dict[str, tuple[Type, ...]]
    instances: dict[str, str]  # instance name -> template name


class Checker:
    def __init__(self, ast: A.Ast):
        self.ast = ast
        self.infos: dict[str, TemplateInfo] = {}

    # -- entry ----------------------------------------------------------

    def run(self) -> A.Ast:
        for t in self.ast.templates:
            self.infos[t.name] = self._collect(t)
        for t in self.ast.templates:
            self._check_instances(t)
        entry = self.ast.template(self.ast.entry)
        if entry is not None and entry.ports:
            raise TypeCheckError(
                f"entry template {entry.name!r} must not declare ports", entry.pos
            )
        for t in self.ast.templates:
            self._check_bodies(t)
        return self.ast

    # -- pass 1: declarations -------------------------------------------

    def _collect(self, t: A.TemplateDecl) -> TemplateInfo:
        names: dict[str, A.StmtAst] = {}

        def declare(name: str, pos) -> None:
            if name in names:
                raise TypeCheckError(
                    f"duplicate name {name!r} in template {t.name!r}", pos
                )
            names[name] = pos

        ports: dict[str, str] = {}
        for ptype, pname, pos in t.ports:
            declare(pname, pos)
            ports[pname] = ptype
        enums: dict[str, EnumType] = {}
        enum_lits: dict[str, tuple[EnumType, int]] = {}
        for e in t.enums:
            declare(e.name, e.pos)
            ety = EnumType(f"{t.name}.{e.name}", tuple(e.literals))
            enums[e.name] = ety
            for i, lit in enumerate(e.literals):
                declare(lit, e.pos)
                enum_lits[lit] = (ety, i)
        var_types: dict[str, Type] = {}
        for v in t.vars:
            declare(v.name, v.pos)
            var_types[v.name] = self._resolve_type(v.type_ref, enums)
        tasks: dict[str, A.TaskDeclAst] = {}
        task_params: dict[str, tuple[Type, ...]] = {}
        for task in t.tasks:
            declare(task.name, task.pos)
            tasks[task.name] = task
            task_params[task.name] = tuple(
                self._resolve_type(ty, enums) for ty, _ in task.params
            )
        instances: dict[str, str] = {}
        for inst in t.instances:
            declare(inst.name, inst.pos)
            instances[inst.name] = inst.template
        for p in t.processes:
            declare(p.name, p.pos)
        for g in t.goals:
            declare(g.name, g.pos)
        return TemplateInfo(
            t, ports, enums, enum_lits, var_types, tasks, task_params, instances
        )

    def _resolve_type(self, ref: A.TypeRef, enums: dict[str, EnumType]) -> Type:
        if ref.kind == "bool":
            return BOOL
        if ref.kind == "uint":
            if not 1 <= ref.bits <= MAX_WIDTH:
                raise TypeCheckError(
                    f"uint width {ref.bits} outside 1..{MAX_WIDTH}", ref.pos
                )
            return UIntType(ref.bits)
        if ref.name in enums:
            return enums[ref.name]
        raise TypeCheckError(f"unknown type {ref.name!r}", ref.pos)

    # -- pass 2: instances ------------------------------------------------

    def _check_instances(self, t: A.TemplateDecl) -> None:
        info = self.infos[t.name]
        for inst in t.instances:
            target = self.infos.get(inst.template)
            if target is None:
                raise TypeCheckError(
                    f"unknown template {inst.template!r}", inst.pos
                )
            want = list(target.decl.ports)
            if len(inst.args) != len(want):
                raise TypeCheckError(
                    f"instance {inst.name!r}: {inst.template!r} expects "
                    f"{len(want)} port argument(s), got {len(inst.args)}",
                    inst.pos,
                )
            for (arg, apos), (ptype, pname, _) in zip(inst.args, want):
                if arg in info.instances:
                    bound = info.instances[arg]
                elif arg in info.ports:
                    bound = info.ports[arg]
                else:
                    raise TypeCheckError(
                        f"port argument {arg!r} is neither an instance nor a port",
                        apos,
                    )
                if bound != ptype:
                    raise TypeCheckError(
                        f"port {pname!r} of {inst.template!r} wants template "
                        f"{ptype!r}, got {bound!r}",
                        apos,
                    )

    # -- pass 3: bodies ----------------------------------------------------

    def _check_bodies(self, t: A.TemplateDecl) -> None:
        info = self.infos[t.name]
        for v in t.vars:
            if v.init is not None:
                self._check_init(v, info)
        for p in t.processes:
            self._check_stmt(p.body, info, params=None, ctx="process")
        for task in t.tasks:
            params = {
                nm: self._resolve_type(ty, info.enums) for ty, nm in task.params
            }
            ctx = "controllable" if task.controllable else "task"
            self._check_stmt(task.body, info, params=params, ctx=ctx)
        for g in t.goals:
            ty = self._check_expr(g.expr, info, None, BOOL, nondet_ok=False)
            if not isinstance(ty, BoolType):
                raise TypeCheckError("goal expression must be bool", g.pos)

    def _check_init(self, v: A.VarDeclAst, info: TemplateInfo) -> None:
        init = v.init
        ty = info.vars[v.name]
        if isinstance(init, A.AInt):
            if not isinstance(ty, UIntType) or init.value >= (1 << ty.bits):
                raise TypeCheckError(
                    f"initialiser {init.value} does not fit {ty}", init.pos
                )
            init.ty = ty
        elif isinstance(init, A.ABool):
            if not isinstance(ty, BoolType):
                raise TypeCheckError(f"bool initialiser for {ty}", init.pos)
            init.ty = ty
        elif isinstance(init, A.AName) and len(init.parts) == 1 and (
            init.parts[0] in info.enum_lits
        ):
            ety, idx = info.enum_lits[init.parts[0]]
            if ety != ty:
                raise TypeCheckError(
                    f"initialiser of type {ety} for variable of type {ty}", init.pos
                )
            init.ty = ety
            init.binding = EnumBinding(ety, idx)
        else:
            raise TypeCheckError(
                "initialiser must be a literal constant", init.pos
            )

    # -- statements ---------------------------------------------------------

    def _check_stmt(
        self,
        s: A.StmtAst,
        info: TemplateInfo,
        params: dict[str, Type] | None,
        ctx: str,
    ) -> None:
        if isinstance(s, A.ABlock):
            for inner in s.stmts:
                self._check_stmt(inner, info, params, ctx)
        elif isinstance(s, A.ASkip):
            pass
        elif isinstance(s, A.AAssign):
            binding = self._resolve_name(s.target, info, params)
            if isinstance(binding, ParamBinding):
                raise TypeCheckError(
                    f"cannot assign to parameter {binding.name!r}", s.pos
                )
            if not isinstance(binding, VarBinding):
                raise TypeCheckError(
                    f"{s.target.dotted()!r} is not an assignable variable", s.pos
                )
            self._check_expr(
                s.expr, info, params, binding.ty, nondet_ok=ctx != "controllable"
            )
        elif isinstance(s, A.ACall):
            binding = self._resolve_name(s.callee, info, params)
            if not isinstance(binding, TaskBinding):
                raise TypeCheckError(
                    f"{s.callee.dotted()!r} is not a task", s.pos
                )
            if ctx == "controllable":
                raise StructureError(
                    "controllable task bodies must not call other tasks", s.pos
                )
            if len(s.args) != len(binding.params):
                raise TypeCheckError(
                    f"call to {s.callee.dotted()!r}: expected "
                    f"{len(binding.params)} argument(s), got {len(s.args)}",
                    s.pos,
                )
            for arg, pty in zip(s.args, binding.params):
                self._check_expr(arg, info, params, pty, nondet_ok=True)
        elif isinstance(s, A.AIf):
            self._check_expr(
                s.cond, info, params, BOOL, nondet_ok=ctx != "controllable"
            )
            self._check_stmt(s.then, info, params, ctx)
            if s.els is not None:
                self._check_stmt(s.els, info, params, ctx)
        elif isinstance(s, A.AForever):
            if ctx == "controllable":
                raise StructureError(
                    "controllable task bodies must not contain loops", s.pos
                )
            self._check_stmt(s.body, info, params, ctx)
        elif isinstance(s, A.APause):
            if ctx == "controllable":
                raise StructureError(
                    "controllable task bodies must not pause", s.pos
                )
        elif isinstance(s, A.AAssert):
            self._check_expr(s.cond, info, params, BOOL, nondet_ok=False)
        elif isinstance(s, A.AMagic):
            if ctx != "task":
                raise StructureError(
                    "magic blocks are only allowed inside non-controllable "
                    "task bodies",
                    s.pos,
                )
        else:
            raise AssertionError(f"unhandled statement {s!r}")

    # -- expressions ----------------------------------------------------------

    def _check_expr(
        self,
        e: A.ExprAst,
        info: TemplateInfo,
        params: dict[str, Type] | None,
        expected: Type | None,
        nondet_ok: bool,
    ) -> Type:
        ty = self._infer(e, info, params, expected, nondet_ok)
        if isinstance(ty, _IntLit):
            if expected is None:
                raise TypeCheckError(
                    "integer literal needs a typed context", e.pos
                )
            ty = self._fit_literal(ty, expected, e)
        if expected is not None:
            self._require_assignable(ty, expected, e)
        e.ty = ty
        return ty

    def _fit_literal(self, lit: _IntLit, expected: Type, e: A.ExprAst) -> Type:
        if not isinstance(expected, UIntType):
            raise TypeCheckError(
                f"integer literal where {expected} expected", e.pos
            )
        if lit.value >= (1 << expected.bits):
            raise TypeCheckError(
                f"literal {lit.value} does not fit {expected}", e.pos
            )
        return expected

    def _require_assignable(self, ty: Type, expected: Type, e: A.ExprAst) -> None:
        if ty == expected:
            return
        if isinstance(ty, UIntType) and isinstance(expected, UIntType):
            if ty.bits <= expected.bits:
                return  # implicit widening
            raise TypeCheckError(
                f"cannot truncate {ty} to {expected}", e.pos
            )
        raise TypeCheckError(f"expected {expected}, got {ty}", e.pos)

    def _infer(
        self,
        e: A.ExprAst,
        info: TemplateInfo,
        params: dict[str, Type] | None,
        expected: Type | None,
        nondet_ok: bool,
    ) -> Type:
        if isinstance(e, A.AInt):
            e.ty = _IntLit(e.value)
            return e.ty
        if isinstance(e, A.ABool):
            e.ty = BOOL
            return BOOL
        if isinstance(e, A.ANondet):
            if not nondet_ok:
                raise TypeCheckError("'*' is not allowed here", e.pos)
            if expected is None:
                raise TypeCheckError(
                    "'*' in a context with no determinable type", e.pos
                )
            e.ty = expected
            return expected
        if isinstance(e, A.AName):
            binding = self._resolve_name(e, info, params)
            if isinstance(binding, TaskBinding):
                raise TypeCheckError(
                    f"task {e.dotted()!r} used as a value", e.pos
                )
            if isinstance(binding, EnumBinding):
                e.ty = binding.ty
                return binding.ty
            e.ty = binding.ty
            return binding.ty
        if isinstance(e, A.AUnary):
            self._check_expr(e.operand, info, params, BOOL, nondet_ok)
            e.ty = BOOL
            return BOOL
        if isinstance(e, A.ABinary):
            if e.op in ("&&", "||"):
                self._check_expr(e.lhs, info, params, BOOL, nondet_ok)
                self._check_expr(e.rhs, info, params, BOOL, nondet_ok)
                e.ty = BOOL
                return BOOL
            # comparisons: infer both sides, then unify
            lt = self._infer(e.lhs, info, params, None, nondet_ok=False)
            rt = self._infer(e.rhs, info, params, None, nondet_ok=False)
            lt, rt = self._unify_comparison(e, lt, rt)
            e.lhs.ty, e.rhs.ty = lt, rt
            if e.op in ("<", "<=", ">", ">="):
                if not (isinstance(lt, UIntType) and isinstance(rt, UIntType)):
                    raise TypeCheckError(
                        f"ordered comparison needs unsigned operands, got "
                        f"{lt} and {rt}",
                        e.pos,
                    )
            e.ty = BOOL
            return BOOL
        if isinstance(e, A.ASlice):
            base_b = self._resolve_name(e.base, info, params)
            bty = base_b.ty if not isinstance(base_b, EnumBinding) else base_b.ty
            if isinstance(base_b, TaskBinding) or not isinstance(bty, UIntType):
                raise TypeCheckError("bit slices apply to uint variables", e.pos)
            if not 0 <= e.lo <= e.hi < bty.bits:
                raise TypeCheckError(
                    f"slice [{e.hi}:{e.lo}] out of range for {bty}", e.pos
                )
            e.base.ty = bty
            e.ty = UIntType(e.hi - e.lo + 1)
            return e.ty
        raise AssertionError(f"unhandled expression {e!r}")

    def _unify_comparison(self, e: A.ABinary, lt, rt) -> tuple[Type, Type]:
        if isinstance(lt, _IntLit) and isinstance(rt, _IntLit):
            raise TypeCheckError("comparison of two untyped literals", e.pos)
        if isinstance(lt, _IntLit):
            return self._fit_literal(lt, rt, e.lhs), rt
        if isinstance(rt, _IntLit):
            return lt, self._fit_literal(rt, lt, e.rhs)
        if lt == rt:
            return lt, rt
        if isinstance(lt, UIntType) and isinstance(rt, UIntType):
            return lt, rt  # compared at the wider width
        raise TypeCheckError(f"cannot compare {lt} with {rt}", e.pos)

    # -- name resolution ---------------------------------------------------

    def _resolve_name(
        self,
        name: A.AName,
        info: TemplateInfo,
        params: dict[str, Type] | None,
    ):
        if name.binding is not None:
            return name.binding
        parts = name.parts
        head = parts[0]
        if params and head in params and len(parts) == 1:
            name.binding = ParamBinding(head, params[head])
            return name.binding
        if head in info.enum_lits and len(parts) == 1:
            ety, idx = info.enum_lits[head]
            name.binding = EnumBinding(ety, idx)
            return name.binding
        if head in info.vars and len(parts) == 1:
            name.binding = VarBinding((), head, info.vars[head])
            return name.binding
        if head in info.tasks and len(parts) == 1:
            name.binding = TaskBinding(
                (), head, info.tasks[head].controllable, info.task_params[head]
            )
            return name.binding
        chain: list[tuple[str, str]] = []
        cur = info
        for i, part in enumerate(parts):
            last = i == len(parts) - 1
            if not last and part in cur.ports:
                chain.append(("port", part))
                cur = self.infos[cur.ports[part]]
            elif not last and part in cur.instances:
                chain.append(("inst", part))
                cur = self.infos[cur.instances[part]]
            elif last and part in cur.vars and chain:
                name.binding = VarBinding(tuple(chain), part, cur.vars[part])
                return name.binding
            elif last and part in cur.tasks and chain:
                name.binding = TaskBinding(
                    tuple(chain),
                    part,
                    cur.tasks[part].controllable,
                    cur.task_params[part],
                )
                return name.binding
            else:
                raise TypeCheckError(
                    f"unknown identifier {'.'.join(parts[: i + 1])!r}", name.pos
                )
        raise TypeCheckError(f"unknown identifier {name.dotted()!r}", name.pos)


def typecheck(ast: A.Ast) -> A.Ast:
    """Annotate the tree with types and bindings, or raise."""
    return Checker(ast).run()
