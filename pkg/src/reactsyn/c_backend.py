"""Translation of a completed controller into a C module.

One translation unit per controller instance: a header declaring an
environment-snapshot struct, a callback table the embedding supplies,
and one function per event handler; the C file mirrors the controller's
own variables as statics and renders every handler body (user code and
generated fills alike).  Layout is stable, so golden tests can diff the
output byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import SourceError
from .frontend import model as M


class EmitError(SourceError):
    pass


@dataclass
class CModule:
    name: str
    header: str
    source: str
    # layout metadata for harnesses: field and callback order is binding
    env_fields: list[tuple[str, str, int]]  # (c name, qualified var, width)
    callbacks: list[tuple[str, str, list[int]]]  # (c name, task, arg widths)
    handlers: list[tuple[str, str]]  # (c name, qualified task)


def _c_ident(name: str) -> str:
    return name.replace(".", "_")


def _c_type(ty: M.Type, enums: dict[str, str]) -> str:
    if isinstance(ty, M.BoolType):
        return "bool"
    if isinstance(ty, M.EnumType):
        return enums[ty.qualname]
    bits = ty.width
    for cap, name in ((8, "uint8_t"), (16, "uint16_t"), (32, "uint32_t"), (64, "uint64_t")):
        if bits <= cap:
            return name
    raise EmitError(f"no C type for width {bits}")


class _Emitter:
    def __init__(self, impl, module: str):
        from .codegen import PartialImpl

        self.impl: PartialImpl = impl
        self.model: M.SpecModel = impl.model
        self.module = module
        self.enums: dict[str, str] = {}
        self.enum_decls: list[str] = []
        self.own_path: tuple[str, ...] = ()
        self.render_ports: dict[tuple[str, ...], str] = {}
        self.callbacks: list[tuple[str, str, list[int]]] = []
        self.cb_by_task: dict[str, str] = {}
        self.env_fields: list[tuple[str, str, int]] = []
        self.statics: dict[str, str] = {}

    # ------------------------------------------------------------------

    def run(self) -> CModule:
        model = self.model
        open_sites = self.impl.open_sites()
        if open_sites:
            raise EmitError(
                f"cannot emit C with open magic sites: {open_sites}",
                model.magic_sites[open_sites[0]].pos,
            )
        owners = {tuple(s.task.split(".")[:-1]) for s in model.magic_sites}
        if len(owners) > 1:
            raise EmitError("magic sites span several instances; emit one at a time")
        self.own_path = owners.pop() if owners else ()
        portmap = model.portmaps.get(self.own_path, {})
        self.render_ports = {target: port for port, target in portmap.items()}
        self.render_ports[self.own_path] = ""

        self._collect_enums()
        self._collect_env_fields()
        self._collect_callbacks()
        handlers = [
            t
            for t in model.tasks
            if not t.controllable
            and tuple(t.name.split(".")[:-1]) == self.own_path
        ]
        handler_meta = [
            (f"{self.module}_{t.name.split('.')[-1]}", t.name) for t in handlers
        ]
        header = self._header(handler_meta)
        source = self._source(handlers, handler_meta)
        return CModule(
            self.module, header, source, self.env_fields, self.callbacks, handler_meta
        )

    def _visible_vars(self) -> list[M.VarDecl]:
        out = []
        for v in self.model.vars:
            owner = tuple(v.name.split(".")[:-1])
            if owner in self.render_ports:
                out.append(v)
        return out

    def _collect_enums(self) -> None:
        seen = set()
        for v in self._visible_vars():
            ty = v.ty
            if isinstance(ty, M.EnumType) and ty.qualname not in seen:
                seen.add(ty.qualname)
                cname = _c_ident(ty.qualname)
                self.enums[ty.qualname] = cname
                lits = ",\n".join(
                    f"  {cname}_{lit} = {i}" for i, lit in enumerate(ty.literals)
                )
                self.enum_decls.append(f"typedef enum {{\n{lits}\n}} {cname};")

    def _collect_env_fields(self) -> None:
        for v in self._visible_vars():
            owner = tuple(v.name.split(".")[:-1])
            if owner == self.own_path:
                # own variables become static mirrors, not snapshot fields
                self.statics[v.name] = _c_ident(v.name.split(".")[-1])
                continue
            self.env_fields.append((_c_ident(v.name), v.name, v.ty.width))

    def _collect_callbacks(self) -> None:
        names_used = set()
        for t in self.model.tasks:
            if not t.controllable:
                continue
            owner = tuple(t.name.split(".")[:-1])
            if owner not in self.render_ports:
                continue
            leaf = t.name.split(".")[-1]
            cname = leaf if leaf not in names_used else _c_ident(t.name)
            names_used.add(cname)
            self.callbacks.append((cname, t.name, [ty.width for _, ty in t.params]))
            self.cb_by_task[t.name] = cname

    # ------------------------------------------------------------------

    def _header(self, handler_meta) -> str:
        guard = f"{self.module.upper()}_H"
        lines = [
            f"/* Controller module '{self.module}': generated, do not edit. */",
            f"#ifndef {guard}",
            f"#define {guard}",
            "",
            "#include <stdbool.h>",
            "#include <stdint.h>",
            "",
        ]
        lines.extend(self.enum_decls)
        if self.enum_decls:
            lines.append("")
        fields = []
        for cname, qualname, width in self.env_fields:
            ty = self.model.var_by_name[qualname].ty
            fields.append(f"  {_c_type(ty, self.enums)} {cname};")
        lines.append("/* snapshot of the environment state visible to the controller */")
        lines.append(f"typedef struct {{")
        lines.extend(fields or ["  char _empty;"])
        lines.append(f"}} {self.module}_env;")
        lines.append("")
        lines.append("/* commands the controller issues; supplied by the embedding */")
        lines.append("typedef struct {")
        for cname, task, widths in self.callbacks:
            params = ["void *ctx"]
            for i, w in enumerate(widths):
                params.append(f"{_uint_for_width(w)} a{i}")
            lines.append(f"  void (*{cname})({', '.join(params)});")
        lines.append("  void *ctx;")
        lines.append(f"}} {self.module}_callbacks;")
        lines.append("")
        for cname, task in handler_meta:
            lines.append(
                f"void {cname}(const {self.module}_env *env, "
                f"const {self.module}_callbacks *cb);"
            )
        lines.append("")
        lines.append(f"#endif /* {guard} */")
        return "\n".join(lines) + "\n"

    def _source(self, handlers, handler_meta) -> str:
        lines = [
            f"/* Controller module '{self.module}': generated, do not edit. */",
            f'#include "{self.module}.h"',
            "",
        ]
        for v in self.model.vars:
            if v.name in self.statics:
                ty = _c_type(v.ty, self.enums)
                init = v.init if v.init is not None else 0
                lines.append(f"static {ty} {self.statics[v.name]} = {init};")
        if self.statics:
            lines.append("")
        fills = self.impl.fill_stmts()
        for task, (cname, _) in zip(handlers, handler_meta):
            lines.append(
                f"void {cname}(const {self.module}_env *env, "
                f"const {self.module}_callbacks *cb) {{"
            )
            body: list[str] = []
            self._stmt(task.body, fills, body, 1)
            if not body:
                body = ["  (void)env; (void)cb;"]
            else:
                body.insert(0, "  (void)env; (void)cb;")
            lines.extend(body)
            lines.append("}")
            lines.append("")
        return "\n".join(lines)

    # ------------------------------------------------------------------

    def _stmt(self, s: M.Stmt, fills, out: list[str], depth: int) -> None:
        pad = "  " * depth
        if isinstance(s, M.SSeq):
            for inner in s.stmts:
                self._stmt(inner, fills, out, depth)
        elif isinstance(s, M.SSkip):
            pass
        elif isinstance(s, M.SMagic):
            fill = fills.get(s.site)
            if fill is None:
                raise EmitError("open magic site during emission", s.pos)
            self._stmt(fill, fills, out, depth)
        elif isinstance(s, M.SCall):
            cb = self.cb_by_task.get(s.task.name)
            if cb is None:
                raise EmitError(
                    f"handler calls non-controllable task {s.task.name}", s.pos
                )
            args = ["cb->ctx"] + [self._expr(a) for a in s.args]
            out.append(f"{pad}cb->{cb}({', '.join(args)});")
        elif isinstance(s, M.SIf):
            out.append(f"{pad}if ({self._expr(s.cond)}) {{")
            self._stmt(s.then, fills, out, depth + 1)
            if s.els is not None:
                out.append(f"{pad}}} else {{")
                self._stmt(s.els, fills, out, depth + 1)
            out.append(f"{pad}}}")
        elif isinstance(s, M.SAssign):
            if s.var.name not in self.statics:
                raise EmitError(
                    f"handler writes non-local variable {s.var.name}", s.pos
                )
            out.append(f"{pad}{self.statics[s.var.name]} = {self._expr(s.expr)};")
        else:
            raise EmitError(
                f"statement not expressible in the C handler: {type(s).__name__}",
                s.pos,
            )

    def _expr(self, e: M.Expr, prec: int = 0) -> str:
        if isinstance(e, M.EConst):
            if isinstance(e.ty, M.EnumType):
                cname = self.enums.get(e.ty.qualname, _c_ident(e.ty.qualname))
                return f"{cname}_{e.ty.literals[e.value]}"
            if isinstance(e.ty, M.BoolType):
                return "true" if e.value else "false"
            return str(e.value)
        if isinstance(e, M.EVar):
            name = e.var.name
            if name in self.statics:
                return self.statics[name]
            return f"env->{_c_ident(name)}"
        if isinstance(e, M.EUnary):
            return f"!{self._expr(e.operand, 9)}"
        if isinstance(e, M.ESlice):
            mask = (1 << (e.hi - e.lo + 1)) - 1
            base = self._expr(e.base, 9)
            return f"(({base} >> {e.lo}) & 0x{mask:x}u)"
        if isinstance(e, M.EBinary):
            ops = {"&&": 2, "||": 1, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4}
            p = ops[e.op]
            text = f"{self._expr(e.lhs, p)} {e.op} {self._expr(e.rhs, p + 1)}"
            return f"({text})" if p < prec else text
        raise EmitError(f"expression not expressible in C: {type(e).__name__}", e.pos)


def _uint_for_width(width: int) -> str:
    for cap, name in ((8, "uint8_t"), (16, "uint16_t"), (32, "uint32_t"), (64, "uint64_t")):
        if width <= cap:
            return name
    raise EmitError(f"no C type for width {width}")


def emit_c(impl, module: str = "controller") -> CModule:
    """Translate a fully filled implementation into a C module.

    Requires every magic site filled; the caller is expected to have
    re-validated the implementation against the winning region first.
    """
    return _Emitter(impl, module).run()


def emit_test_harness(mod: CModule) -> str:
    """A line-oriented driver for lockstep testing.

    Protocol on stdin: ``CALL <handler> <env field values in order>``;
    every callback the handler issues is printed as ``CB <name> <args>``,
    and ``OK`` closes each call.
    """
    lines = [
        "#include <stdio.h>",
        "#include <string.h>",
        "#include <stdlib.h>",
        f'#include "{mod.name}.h"',
        "",
    ]
    for cname, task, widths in mod.callbacks:
        params = ["void *ctx"] + [f"{_uint_for_width(w)} a{i}" for i, w in enumerate(widths)]
        body = f'  printf("CB {cname}'
        body += "".join(f" %u" for _ in widths)
        body += '\\n"'
        for i in range(len(widths)):
            body += f", (unsigned)a{i}"
        body += "); (void)ctx;"
        lines.append(f"static void h_{cname}({', '.join(params)}) {{")
        lines.append(body)
        lines.append("}")
    lines.append("")
    lines.append("int main(void) {")
    lines.append(f"  {mod.name}_callbacks cb = {{")
    for cname, _, _ in mod.callbacks:
        lines.append(f"    h_{cname},")
    lines.append("    0")
    lines.append("  };")
    lines.append("  char name[128]; unsigned v;")
    lines.append('  while (scanf("%127s", name) == 1) {')
    lines.append('    if (strcmp(name, "CALL") != 0) return 2;')
    lines.append('    if (scanf("%127s", name) != 1) return 2;')
    lines.append(f"    {mod.name}_env env;")
    for cname, qual, width in mod.env_fields:
        lines.append('    if (scanf("%u", &v) != 1) return 2;')
        ty_cast = ""
        lines.append(f"    env.{cname} = v;")
    for hname, task in mod.handlers:
        short = task.split(".")[-1]
        lines.append(f'    if (strcmp(name, "{short}") == 0) {hname}(&env, &cb);')
    lines.append('    printf("OK\\n"); fflush(stdout);')
    lines.append("  }")
    lines.append("  return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n"
