"""Template instantiation: typed tree -> flattened, qualified model.

Every template instance contributes its own copy of variables, processes,
tasks and goals under a dotted path; port references are rewritten to the
concrete instances they are bound to.  Magic blocks are numbered in
flattening order (entry-first depth-first over instances, then source
order inside each task).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import InstantiationError, Position
from . import ast as A
from .check import EnumBinding, ParamBinding, TaskBinding, VarBinding
from . import model as M


@dataclass
class _Ctx:
    path: tuple[str, ...]
    portmap: dict[str, tuple[str, ...]]  # port name -> bound instance path


@dataclass
class _Builder:
    ast: A.Ast
    instances: list[M.Instance] = field(default_factory=list)
    ctxs: dict[tuple[str, ...], _Ctx] = field(default_factory=dict)
    templates_of: dict[tuple[str, ...], str] = field(default_factory=dict)
    vars: dict[str, M.VarDecl] = field(default_factory=dict)
    tasks: dict[str, M.TaskDecl] = field(default_factory=dict)
    processes: list[M.ProcessDecl] = field(default_factory=list)
    goals: list[M.Goal] = field(default_factory=list)
    magic_sites: list[M.MagicSite] = field(default_factory=list)
    pause_uid: int = 0

    # -- instance tree ---------------------------------------------------

    def instantiate(
        self,
        path: tuple[str, ...],
        tname: str,
        stack: tuple,
        portmap: dict[str, tuple[str, ...]] | None = None,
    ) -> None:
        if tname in stack:
            cycle = " -> ".join(stack + (tname,))
            raise InstantiationError(
                f"cyclic instantiation: {cycle}",
                self.ast.template(tname).pos,
            )
        t = self.ast.template(tname)
        self.instances.append(M.Instance(path, tname))
        self.templates_of[path] = tname
        ctx = _Ctx(path, portmap or {})
        self.ctxs[path] = ctx
        # children exist before port arguments are resolved, so sibling
        # instances may be referenced forward
        for inst in t.instances:
            self.templates_of[path + (inst.name,)] = inst.template
        for inst in t.instances:
            child_path = path + (inst.name,)
            child_ports: dict[str, tuple[str, ...]] = {}
            target = self.ast.template(inst.template)
            for (arg, apos), (_, pname, _) in zip(inst.args, target.ports):
                child_ports[pname] = self._resolve_port_arg(path, ctx, arg, apos)
            self.instantiate(
                child_path, inst.template, stack + (tname,), child_ports
            )

    def _resolve_port_arg(
        self, path: tuple[str, ...], ctx: _Ctx, arg: str, apos: Position
    ) -> tuple[str, ...]:
        if path + (arg,) in self.templates_of:
            return path + (arg,)
        if arg in ctx.portmap:
            return ctx.portmap[arg]
        raise InstantiationError(f"unbound port argument {arg!r}", apos)

    # -- declaration cloning ----------------------------------------------

    def populate(self) -> None:
        for inst in self.instances:
            t = self.ast.template(inst.template)
            for v in t.vars:
                name = self._qualify(inst.path, v.name)
                init = self._const_init(v)
                ty = self._var_type(t, v)
                self.vars[name] = M.VarDecl(name, ty, init, v.pos)
        # tasks before processes: call statements refer to task decls
        for inst in self.instances:
            t = self.ast.template(inst.template)
            for task in t.tasks:
                name = self._qualify(inst.path, task.name)
                params = [
                    (pname, self._resolve_type_ref(t, pty_ref))
                    for pty_ref, pname in task.params
                ]
                self.tasks[name] = M.TaskDecl(
                    name, task.controllable, params, M.SSkip(task.pos), task.pos
                )
        for inst in self.instances:
            t = self.ast.template(inst.template)
            ctx = self.ctxs[inst.path]
            for task in t.tasks:
                name = self._qualify(inst.path, task.name)
                decl = self.tasks[name]
                body = self._stmt(task.body, ctx)
                decl.body = body
                if not task.controllable:
                    self._number_magic(body, name)
            for proc in t.processes:
                name = self._qualify(inst.path, proc.name)
                self.processes.append(
                    M.ProcessDecl(name, self._stmt(proc.body, ctx), proc.pos)
                )
            for goal in t.goals:
                name = self._qualify(inst.path, goal.name)
                self.goals.append(M.Goal(name, self._expr(goal.expr, ctx), goal.pos))

    def _resolve_type_ref(self, t: A.TemplateDecl, ref: A.TypeRef) -> M.Type:
        if ref.kind == "bool":
            return M.BOOL
        if ref.kind == "uint":
            return M.UIntType(ref.bits)
        for e in t.enums:
            if e.name == ref.name:
                return M.EnumType(f"{t.name}.{e.name}", tuple(e.literals))
        raise AssertionError(f"unresolved type {ref!r} after checking")

    def _var_type(self, t: A.TemplateDecl, v: A.VarDeclAst) -> M.Type:
        return self._resolve_type_ref(t, v.type_ref)

    def _const_init(self, v: A.VarDeclAst) -> int | None:
        init = v.init
        if init is None:
            return None
        if isinstance(init, A.AInt):
            return init.value
        if isinstance(init, A.ABool):
            return int(init.value)
        if isinstance(init, A.AName) and isinstance(init.binding, EnumBinding):
            return init.binding.index
        raise AssertionError("non-constant initialiser after checking")

    def _qualify(self, path: tuple[str, ...], name: str) -> str:
        return ".".join(path + (name,))

    def _number_magic(self, body: M.Stmt, task_name: str) -> None:
        ordinal = 0
        for s in M.walk_stmts(body):
            if isinstance(s, M.SMagic):
                s.site = len(self.magic_sites)
                self.magic_sites.append(
                    M.MagicSite(s.site, task_name, ordinal, s.pos)
                )
                ordinal += 1

    # -- statement/expression cloning --------------------------------------

    def _stmt(self, s: A.StmtAst, ctx: _Ctx) -> M.Stmt:
        if isinstance(s, A.ABlock):
            return M.SSeq(s.pos, [self._stmt(inner, ctx) for inner in s.stmts])
        if isinstance(s, A.ASkip):
            return M.SSkip(s.pos)
        if isinstance(s, A.AAssign):
            var = self._var_of(s.target, ctx)
            return M.SAssign(s.pos, var, self._expr(s.expr, ctx))
        if isinstance(s, A.ACall):
            binding = s.callee.binding
            assert isinstance(binding, TaskBinding)
            target_path = self._walk_chain(ctx, binding.chain)
            task = self.tasks[self._qualify(target_path, binding.name)]
            return M.SCall(s.pos, task, [self._expr(a, ctx) for a in s.args])
        if isinstance(s, A.AIf):
            els = self._stmt(s.els, ctx) if s.els is not None else None
            return M.SIf(s.pos, self._expr(s.cond, ctx), self._stmt(s.then, ctx), els)
        if isinstance(s, A.AForever):
            return M.SForever(s.pos, self._stmt(s.body, ctx))
        if isinstance(s, A.APause):
            uid = self.pause_uid
            self.pause_uid += 1
            return M.SPause(s.pos, uid)
        if isinstance(s, A.AAssert):
            return M.SAssert(s.pos, self._expr(s.cond, ctx))
        if isinstance(s, A.AMagic):
            return M.SMagic(s.pos, site=-1)
        raise AssertionError(f"unhandled statement {s!r}")

    def _var_of(self, name: A.AName, ctx: _Ctx) -> M.VarDecl:
        binding = name.binding
        assert isinstance(binding, VarBinding)
        target_path = self._walk_chain(ctx, binding.chain)
        return self.vars[self._qualify(target_path, binding.name)]

    def _walk_chain(
        self, ctx: _Ctx, chain: tuple[tuple[str, str], ...]
    ) -> tuple[str, ...]:
        cur = ctx.path
        cur_ctx = ctx
        for kind, hop in chain:
            if kind == "inst":
                cur = cur + (hop,)
            else:
                cur = cur_ctx.portmap[hop]
            cur_ctx = self.ctxs[cur]
        return cur

    def _expr(self, e: A.ExprAst, ctx: _Ctx) -> M.Expr:
        if isinstance(e, A.AInt):
            return M.EConst(e.ty, e.pos, e.value)
        if isinstance(e, A.ABool):
            return M.EConst(M.BOOL, e.pos, int(e.value))
        if isinstance(e, A.ANondet):
            return M.ENondet(e.ty, e.pos)
        if isinstance(e, A.AName):
            binding = e.binding
            if isinstance(binding, EnumBinding):
                return M.EConst(binding.ty, e.pos, binding.index)
            if isinstance(binding, ParamBinding):
                return M.EParam(binding.ty, e.pos, binding.name)
            if isinstance(binding, VarBinding):
                return M.EVar(e.ty, e.pos, self._var_of(e, ctx))
            raise AssertionError(f"unexpected binding {binding!r}")
        if isinstance(e, A.AUnary):
            return M.EUnary(M.BOOL, e.pos, e.op, self._expr(e.operand, ctx))
        if isinstance(e, A.ABinary):
            return M.EBinary(
                M.BOOL, e.pos, e.op, self._expr(e.lhs, ctx), self._expr(e.rhs, ctx)
            )
        if isinstance(e, A.ASlice):
            base = self._expr(e.base, ctx)
            return M.ESlice(e.ty, e.pos, base, e.hi, e.lo)
        raise AssertionError(f"unhandled expression {e!r}")


def flatten(ast: A.Ast) -> M.SpecModel:
    """Instantiate the checked tree into a flat model."""
    b = _Builder(ast)
    b.instantiate((), ast.entry, ())
    b.populate()
    model = M.SpecModel(
        entry=ast.entry,
        instances=b.instances,
        vars=list(b.vars.values()),
        processes=b.processes,
        tasks=list(b.tasks.values()),
        goals=b.goals,
        magic_sites=b.magic_sites,
    )
    model.var_by_name = dict(b.vars)
    model.task_by_name = dict(b.tasks)
    model.ast = ast
    model.instance_of = dict(b.templates_of)
    model.portmaps = {path: ctx.portmap for path, ctx in b.ctxs.items()}
    return model


def elaborate_statement(
    model: M.SpecModel, instance_path: tuple[str, ...], stmt: A.StmtAst
) -> M.Stmt:
    """Compile one checked surface statement in an instance's context.

    Used for magic-block fills and debugger input: the statement must
    already be annotated by the checker against the instance's template.
    """
    b = _Builder(model.ast)
    b.templates_of = dict(model.instance_of)
    b.ctxs = {
        path: _Ctx(path, dict(pm)) for path, pm in model.portmaps.items()
    }
    b.vars = {v.name: v for v in model.vars}
    b.tasks = {t.name: t for t in model.tasks}
    return b._stmt(stmt, b.ctxs[instance_path])
