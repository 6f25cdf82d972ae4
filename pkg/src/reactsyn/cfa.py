"""Control-flow automata: process bodies cut into atomic segments.

Each process becomes an automaton whose locations are its initial point,
its ``pause`` statements, every reachable open magic block of the tasks
it (transitively) calls, and a final sink if the body can terminate.
The code between two locations is one atomic decision tree of guards,
assignments, assertion checks and nondeterministic reads; assertion
failure leads to a single absorbing error sink shared by all automata.

Task calls are inlined call-by-value (arguments bound once on entry);
recursion and loops that cannot reach a cut point are rejected.
Controllable task bodies additionally get standalone trees that the game
encoder turns into controller moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Position, StructureError
from .frontend import model as M

INITIAL = "initial"
PAUSE = "pause"
MAGIC = "magic"
FINAL = "final"

# the shared absorbing assertion-failure sink (a pseudo-location)
ERROR_LOC = -1


@dataclass(frozen=True)
class Location:
    id: int
    kind: str
    pos: Position
    site: int = -1  # magic site for kind == "magic"

    def label(self) -> str:
        if self.kind == MAGIC:
            return f"L{self.id}:magic#{self.site}"
        return f"L{self.id}:{self.kind}"


# ----------------------------------------------------------------------
# segment trees


@dataclass
class EChoiceRef(M.Expr):
    """A value read from ``*``, bound by the enclosing `TChoice`.

    ``offset`` indexes into the per-move choice bit pool; the read
    consumes ``ty.width`` bits starting there.
    """

    offset: int = -1


@dataclass
class TNode:
    pass


@dataclass
class TChoice(TNode):
    offset: int  # first choice-pool bit of this read
    ty: M.Type
    pos: Position
    next: TNode


@dataclass
class EParamRef(M.Expr):
    """A task parameter inside an inlined body, bound by a `TBind`.

    The key pairs a per-inline-instance id with the parameter name, so
    nested inlining cannot capture an outer binding.
    """

    key: tuple[int, str] = (-1, "")


@dataclass
class TBind(TNode):
    key: tuple[int, str]
    expr: M.Expr
    pos: Position
    next: TNode


@dataclass
class TAssign(TNode):
    var: M.VarDecl
    expr: M.Expr
    pos: Position
    next: TNode


@dataclass
class TCheck(TNode):
    cond: M.Expr
    pos: Position  # reported when the assertion fails
    next: TNode


@dataclass
class TBranch(TNode):
    cond: M.Expr
    pos: Position
    then: TNode
    els: TNode


@dataclass
class TArrive(TNode):
    loc: int


@dataclass
class TDone(TNode):
    """End of a controllable body: control returns to the same location."""


@dataclass
class TEnter(TNode):
    """Marks entry into an inlined task body.

    Semantically inert: the encoder skips it; the interpreter records an
    event, which the debugger and the lockstep harnesses use to attribute
    statements to their task."""

    task: str
    pos: Position
    next: TNode


def walk_tree(t: TNode):
    yield t
    if isinstance(t, (TChoice, TBind, TAssign, TCheck, TEnter)):
        yield from walk_tree(t.next)
    elif isinstance(t, TBranch):
        yield from walk_tree(t.then)
        yield from walk_tree(t.els)


def tree_targets(t: TNode) -> set[int]:
    return {n.loc for n in walk_tree(t) if isinstance(n, TArrive)}


def tree_has_choice(t: TNode) -> bool:
    return any(isinstance(n, TChoice) for n in walk_tree(t))


def tree_has_check(t: TNode) -> bool:
    return any(isinstance(n, TCheck) for n in walk_tree(t))


def expr_equal(a: M.Expr, b: M.Expr, uid_map: dict[int, int]) -> bool:
    """Structural expression equality, positions ignored; inline-instance
    ids are matched up to a consistent bijection."""
    if type(a) is not type(b) or a.ty != b.ty:
        return False
    if isinstance(a, M.EConst):
        return a.value == b.value
    if isinstance(a, M.EVar):
        return a.var is b.var
    if isinstance(a, M.EParam):
        return a.name == b.name
    if isinstance(a, EChoiceRef):
        return a.offset == b.offset
    if isinstance(a, EParamRef):
        ua, na = a.key
        ub, nb = b.key
        return na == nb and uid_map.setdefault(ua, ub) == ub
    if isinstance(a, M.EUnary):
        return a.op == b.op and expr_equal(a.operand, b.operand, uid_map)
    if isinstance(a, M.EBinary):
        return (
            a.op == b.op
            and expr_equal(a.lhs, b.lhs, uid_map)
            and expr_equal(a.rhs, b.rhs, uid_map)
        )
    if isinstance(a, M.ESlice):
        return a.hi == b.hi and a.lo == b.lo and expr_equal(a.base, b.base, uid_map)
    return False


def tree_equal(a: TNode, b: TNode, uid_map: dict[int, int] | None = None) -> bool:
    """Structural tree equality modulo positions and inline-instance ids."""
    if uid_map is None:
        uid_map = {}
    if type(a) is not type(b):
        return False
    if isinstance(a, TArrive):
        return a.loc == b.loc
    if isinstance(a, TDone):
        return True
    if isinstance(a, TChoice):
        return (
            a.offset == b.offset
            and a.ty == b.ty
            and tree_equal(a.next, b.next, uid_map)
        )
    if isinstance(a, TEnter):
        return a.task == b.task and tree_equal(a.next, b.next, uid_map)
    if isinstance(a, TBind):
        ua, na = a.key
        ub, nb = b.key
        return (
            na == nb
            and uid_map.setdefault(ua, ub) == ub
            and expr_equal(a.expr, b.expr, uid_map)
            and tree_equal(a.next, b.next, uid_map)
        )
    if isinstance(a, TAssign):
        return (
            a.var is b.var
            and expr_equal(a.expr, b.expr, uid_map)
            and tree_equal(a.next, b.next, uid_map)
        )
    if isinstance(a, TCheck):
        return expr_equal(a.cond, b.cond, uid_map) and tree_equal(
            a.next, b.next, uid_map
        )
    if isinstance(a, TBranch):
        return (
            expr_equal(a.cond, b.cond, uid_map)
            and tree_equal(a.then, b.then, uid_map)
            and tree_equal(a.els, b.els, uid_map)
        )
    return False


@dataclass(frozen=True)
class AtomicSegment:
    """A (from, to) view of one location's decision tree.

    ``to`` is `ERROR_LOC` for the assertion-failure view.  The tree is
    shared between the views of one source location.
    """

    src: int
    dst: int
    tree: TNode


@dataclass
class Cfa:
    owner: str  # qualified process name
    locations: list[Location]
    trees: dict[int, TNode]  # location id -> outgoing decision tree
    max_choice_slots: int
    segments: list[AtomicSegment] = field(default_factory=list)

    def initial(self) -> Location:
        return self.locations[0]

    def magic_locations(self) -> list[Location]:
        return [l for l in self.locations if l.kind == MAGIC]

    def runnable_locations(self) -> list[Location]:
        return [l for l in self.locations if l.id in self.trees and l.kind != MAGIC]


@dataclass
class ControllableBody:
    task: M.TaskDecl
    tree: TNode  # leaves are TDone / assertion failures
    max_choice_slots: int  # always 0; kept for symmetry


@dataclass
class CfaSet:
    cfas: list[Cfa]
    controllable: dict[str, ControllableBody]
    # site id -> (process name, location id); sites of never-called tasks
    # have no location and cannot be scheduled
    site_locations: dict[int, tuple[str, int]]

    def cfa_of(self, proc: str) -> Cfa:
        for c in self.cfas:
            if c.owner == proc:
                return c
        raise KeyError(proc)


# ----------------------------------------------------------------------
# construction


class _ProcBuilder:
    def __init__(
        self,
        proc: M.ProcessDecl,
        fills: dict[int, M.Stmt],
        site_locations: dict[int, tuple[str, int]],
    ):
        self.proc = proc
        self.fills = fills
        self.site_locations = site_locations
        self.locations: list[Location] = []
        self.trees: dict[int, TNode] = {}
        # keyed by id() of the cloned statement; the statement object is
        # stored alongside so the id cannot be recycled underneath us
        self.pause_locs: dict[int, tuple[object, Location]] = {}
        self.magic_locs: dict[int, tuple[object, Location]] = {}
        self.final_loc: Location | None = None
        self.queue: list[tuple[Location, object]] = []
        self.dup_checks: list[tuple[Location, object]] = []
        self.max_slots = 0
        self.inline_uid = 0

    def build(self) -> Cfa:
        initial = self._new_loc(INITIAL, self.proc.pos)

        def k_final(wm, fstack):
            return TArrive(self._final().id)

        def root(wm, fstack):
            return self._go(self.proc.body, k_final, wm, fstack, ())

        self.queue.append((initial, root))
        while self.queue:
            loc, builder = self.queue.pop(0)
            tree = builder(0, frozenset())
            self.trees[loc.id] = tree
            if loc.kind == MAGIC and tree_has_choice(tree):
                raise StructureError(
                    "nondeterministic read in the atomic continuation of a "
                    "magic block",
                    loc.pos,
                )
        for loc, k in self.dup_checks:
            before = len(self.locations)
            other = k(0, frozenset())
            if len(self.locations) != before or not tree_equal(
                other, self.trees[loc.id]
            ):
                raise StructureError(
                    "magic block is reached from call sites with different "
                    "continuations; it cannot occupy a single control "
                    "location",
                    loc.pos,
                )
        cfa = Cfa(self.proc.name, self.locations, self.trees, self.max_slots)
        cfa.segments = _derive_segments(cfa)
        return cfa

    def _new_loc(self, kind: str, pos: Position, site: int = -1) -> Location:
        loc = Location(len(self.locations), kind, pos, site)
        self.locations.append(loc)
        return loc

    def _final(self) -> Location:
        if self.final_loc is None:
            self.final_loc = self._new_loc(FINAL, self.proc.pos)
        return self.final_loc

    def _extract(self, expr: M.Expr, wm: int):
        out, choices, wm2 = _extract_choices(expr, wm)
        self.max_slots = max(self.max_slots, wm2)
        return out, choices, wm2

    # -- the statement walker -------------------------------------------
    #
    # Continuations take (choice-bit watermark, set of forever frames on
    # the current path); the watermark restarts at 0 for each location,
    # so choice bits are shared across segments.  ``stack`` is the static
    # chain of inlined task names, for recursion rejection.

    def _go(self, s: M.Stmt, k, wm: int, fstack: frozenset, stack: tuple):
        if isinstance(s, M.SSeq):
            def chain(stmts, kk):
                if not stmts:
                    return kk
                head, tail = stmts[0], stmts[1:]
                rest = chain(tail, kk)
                return lambda wm2, fs2: self._go(head, rest, wm2, fs2, stack)

            return chain(s.stmts, k)(wm, fstack)
        if isinstance(s, M.SSkip):
            return k(wm, fstack)
        if isinstance(s, M.SAssign):
            expr, choices, wm2 = self._extract(s.expr, wm)
            node = TAssign(s.var, expr, s.pos, k(wm2, fstack))
            return _wrap_choices(choices, s.pos, node)
        if isinstance(s, M.SAssert):
            expr, choices, wm2 = self._extract(s.cond, wm)
            node = TCheck(expr, s.pos, k(wm2, fstack))
            return _wrap_choices(choices, s.pos, node)
        if isinstance(s, M.SIf):
            cond, choices, wm2 = self._extract(s.cond, wm)
            then = self._go(s.then, k, wm2, fstack, stack)
            els = (
                self._go(s.els, k, wm2, fstack, stack)
                if s.els is not None
                else k(wm2, fstack)
            )
            return _wrap_choices(choices, s.pos, TBranch(cond, s.pos, then, els))
        if isinstance(s, M.SCall):
            return self._inline_call(s, k, wm, fstack, stack)
        if isinstance(s, M.SPause):
            entry = self.pause_locs.get(id(s))
            if entry is None:
                loc = self._new_loc(PAUSE, s.pos)
                self.pause_locs[id(s)] = (s, loc)
                self.queue.append((loc, k))
            else:
                loc = entry[1]
            return TArrive(loc.id)
        if isinstance(s, M.SMagic):
            fill = self.fills.get(s.site)
            if fill is not None:
                return self._go(_clone_stmt(fill), k, wm, fstack, stack)
            entry = self.magic_locs.get(id(s))
            if entry is None:
                if s.site in self.site_locations:
                    owner, locid = self.site_locations[s.site]
                    if owner != self.proc.name:
                        raise StructureError(
                            f"magic block reachable from two processes "
                            f"({owner!r} and {self.proc.name!r}); each site "
                            f"needs a unique control location",
                            s.pos,
                        )
                    # a second call site for the same source block: reuse the
                    # location, but only if the continuations agree
                    loc = self.locations[locid]
                    self.magic_locs[id(s)] = (s, loc)
                    self.dup_checks.append((loc, k))
                    return TArrive(loc.id)
                loc = self._new_loc(MAGIC, s.pos, site=s.site)
                self.magic_locs[id(s)] = (s, loc)
                self.site_locations[s.site] = (self.proc.name, loc.id)
                self.queue.append((loc, k))
            else:
                loc = entry[1]
            return TArrive(loc.id)
        if isinstance(s, M.SForever):
            if id(s) in fstack:
                raise StructureError(
                    "loop body can repeat without reaching a pause or magic "
                    "block; atomic segments must terminate",
                    s.pos,
                )

            def loop(wm2, fs2):
                return self._go(s, k, wm2, fs2, stack)

            return self._go(s.body, loop, wm, fstack | {id(s)}, stack)
        raise AssertionError(f"unhandled statement {s!r}")

    def _inline_call(self, s: M.SCall, k, wm: int, fstack: frozenset, stack):
        task = s.task
        if task.name in stack:
            raise StructureError(f"recursive task call to {task.name!r}", s.pos)
        uid = self.inline_uid
        self.inline_uid += 1
        param_names = [pname for pname, _ in task.params]
        body = _clone_stmt(task.body, uid, set(param_names))

        def run_body(wm2, fs2):
            return self._go(body, k, wm2, fs2, stack + (task.name,))

        # bind arguments left to right (call by value), then run the body
        builder = run_body
        for (pname, _), arg in reversed(list(zip(task.params, s.args))):
            builder = self._bind_arg(uid, pname, arg, builder)
        return TEnter(task.name, s.pos, builder(wm, fstack))

    def _bind_arg(self, uid: int, pname: str, arg: M.Expr, k):
        def build(wm, fstack):
            expr, choices, wm2 = self._extract(arg, wm)
            node = TBind((uid, pname), expr, arg.pos, k(wm2, fstack))
            return _wrap_choices(choices, arg.pos, node)

        return build


def _wrap_choices(choices, pos, node: TNode) -> TNode:
    for offset, ty in reversed(choices):
        node = TChoice(offset, ty, pos, node)
    return node


def _extract_choices(expr: M.Expr, wm: int):
    """Rewrite ``*`` reads to choice-pool references, allocating bits.

    Bits are numbered along each path; sibling branches reuse the same
    offsets, and so do the trees of different locations.
    """
    choices: list[tuple[int, M.Type]] = []
    cursor = [wm]

    def rewrite(e: M.Expr) -> M.Expr:
        if isinstance(e, M.ENondet):
            offset = cursor[0]
            cursor[0] += e.ty.width
            choices.append((offset, e.ty))
            return EChoiceRef(e.ty, e.pos, offset)
        if isinstance(e, M.EUnary):
            return M.EUnary(e.ty, e.pos, e.op, rewrite(e.operand))
        if isinstance(e, M.EBinary):
            return M.EBinary(e.ty, e.pos, e.op, rewrite(e.lhs), rewrite(e.rhs))
        if isinstance(e, M.ESlice):
            return M.ESlice(e.ty, e.pos, rewrite(e.base), e.hi, e.lo)
        return e

    out = rewrite(expr)
    return out, choices, cursor[0]


def _clone_stmt(
    s: M.Stmt, inline_uid: int | None = None, params: set[str] | None = None
) -> M.Stmt:
    """Fresh statement objects so every inline site has its own pause and
    magic identities (magic site ids are preserved).  When cloning a task
    body for inlining, parameter reads are rewritten to `EParamRef` keyed
    by the inline instance."""

    def expr(e: M.Expr) -> M.Expr:
        if inline_uid is None:
            return e
        if isinstance(e, M.EParam) and params and e.name in params:
            return EParamRef(e.ty, e.pos, (inline_uid, e.name))
        if isinstance(e, M.EUnary):
            return M.EUnary(e.ty, e.pos, e.op, expr(e.operand))
        if isinstance(e, M.EBinary):
            return M.EBinary(e.ty, e.pos, e.op, expr(e.lhs), expr(e.rhs))
        if isinstance(e, M.ESlice):
            return M.ESlice(e.ty, e.pos, expr(e.base), e.hi, e.lo)
        return e

    if isinstance(s, M.SSeq):
        return M.SSeq(s.pos, [_clone_stmt(x, inline_uid, params) for x in s.stmts])
    if isinstance(s, M.SSkip):
        return M.SSkip(s.pos)
    if isinstance(s, M.SAssign):
        return M.SAssign(s.pos, s.var, expr(s.expr))
    if isinstance(s, M.SIf):
        els = _clone_stmt(s.els, inline_uid, params) if s.els is not None else None
        return M.SIf(
            s.pos, expr(s.cond), _clone_stmt(s.then, inline_uid, params), els
        )
    if isinstance(s, M.SCall):
        return M.SCall(s.pos, s.task, [expr(a) for a in s.args])
    if isinstance(s, M.SForever):
        return M.SForever(s.pos, _clone_stmt(s.body, inline_uid, params))
    if isinstance(s, M.SPause):
        return M.SPause(s.pos, s.uid)
    if isinstance(s, M.SAssert):
        return M.SAssert(s.pos, expr(s.cond))
    if isinstance(s, M.SMagic):
        return M.SMagic(s.pos, s.site)
    raise AssertionError(f"unhandled statement {s!r}")


def _derive_segments(cfa: Cfa) -> list[AtomicSegment]:
    segments: list[AtomicSegment] = []
    for loc in cfa.locations:
        tree = cfa.trees.get(loc.id)
        if tree is None:
            continue
        for dst in sorted(tree_targets(tree)):
            segments.append(AtomicSegment(loc.id, dst, tree))
        if tree_has_check(tree):
            segments.append(AtomicSegment(loc.id, ERROR_LOC, tree))
    return segments


def _controllable_tree(task: M.TaskDecl) -> TNode:
    def go(s: M.Stmt, k):
        if isinstance(s, M.SSeq):
            def chain(stmts, kk):
                if not stmts:
                    return kk
                rest = chain(stmts[1:], kk)
                return lambda: go(stmts[0], rest)

            return chain(s.stmts, k)()
        if isinstance(s, M.SSkip):
            return k()
        if isinstance(s, M.SAssign):
            return TAssign(s.var, s.expr, s.pos, k())
        if isinstance(s, M.SAssert):
            return TCheck(s.cond, s.pos, k())
        if isinstance(s, M.SIf):
            els = (lambda: go(s.els, k)) if s.els is not None else k
            return TBranch(s.cond, s.pos, go(s.then, k), els())
        raise StructureError(
            "unsupported statement in a controllable task body", s.pos
        )

    return go(task.body, lambda: TDone())


def build_cfa(
    model: M.SpecModel,
    fills: dict[int, M.Stmt] | None = None,
    layout: CfaSet | None = None,
) -> CfaSet:
    """One automaton per process; task bodies inlined at call sites.

    ``fills`` maps magic site ids to replacement statements (used during
    code generation); open sites become magic locations.  With ``layout``
    (the all-open automaton set), locations are renumbered to the layout's
    ids so the two state encodings coincide; locations of filled sites
    stay allocated but unreachable.
    """
    fills = fills or {}
    site_locations: dict[int, tuple[str, int]] = {}
    cfas = []
    for proc in model.processes:
        cfas.append(_ProcBuilder(proc, fills, site_locations).build())
    controllable = {
        t.name: ControllableBody(t, _controllable_tree(t), 0)
        for t in model.tasks
        if t.controllable
    }
    out = CfaSet(cfas, controllable, site_locations)
    if layout is not None:
        _align_to_layout(out, layout)
    return out


def _align_to_layout(cfaset: CfaSet, layout: CfaSet) -> None:
    """Renumber locations to match the all-open layout.

    Pauses correspond by construction order (fills never contain pauses),
    magic locations by site id, initial and final by kind.
    """
    new_site_locations: dict[int, tuple[str, int]] = {}
    for idx, cfa in enumerate(cfaset.cfas):
        ref = layout.cfa_of(cfa.owner)
        ref_pauses = [l for l in ref.locations if l.kind == PAUSE]
        ref_final = [l for l in ref.locations if l.kind == FINAL]
        ref_magic = {l.site: l for l in ref.locations if l.kind == MAGIC}
        mapping: dict[int, int] = {}
        pause_i = 0
        for loc in cfa.locations:
            if loc.kind == INITIAL:
                mapping[loc.id] = 0
            elif loc.kind == PAUSE:
                if pause_i >= len(ref_pauses):
                    raise StructureError(
                        "fill changed the pause structure of a process", loc.pos
                    )
                mapping[loc.id] = ref_pauses[pause_i].id
                pause_i += 1
            elif loc.kind == MAGIC:
                if loc.site not in ref_magic:
                    raise StructureError(
                        "fill introduced a magic block absent from the layout",
                        loc.pos,
                    )
                mapping[loc.id] = ref_magic[loc.site].id
            else:
                if not ref_final:
                    raise StructureError(
                        "fill made a process terminate where the layout loops",
                        loc.pos,
                    )
                mapping[loc.id] = ref_final[0].id

        def remap(node: TNode) -> TNode:
            if isinstance(node, TArrive):
                return TArrive(mapping[node.loc])
            if isinstance(node, TChoice):
                return TChoice(node.offset, node.ty, node.pos, remap(node.next))
            if isinstance(node, TBind):
                return TBind(node.key, node.expr, node.pos, remap(node.next))
            if isinstance(node, TAssign):
                return TAssign(node.var, node.expr, node.pos, remap(node.next))
            if isinstance(node, TCheck):
                return TCheck(node.cond, node.pos, remap(node.next))
            if isinstance(node, TBranch):
                return TBranch(node.cond, node.pos, remap(node.then), remap(node.els))
            if isinstance(node, TEnter):
                return TEnter(node.task, node.pos, remap(node.next))
            return node

        new_trees = {mapping[k]: remap(t) for k, t in cfa.trees.items()}
        cfa.locations = list(ref.locations)
        cfa.trees = new_trees
        cfa.max_choice_slots = max(cfa.max_choice_slots, ref.max_choice_slots)
        cfa.segments = _derive_segments(cfa)
    for site, (proc, locid) in cfaset.site_locations.items():
        ref = layout.cfa_of(proc)
        ref_magic = {l.site: l for l in ref.locations if l.kind == MAGIC}
        new_site_locations[site] = (proc, ref_magic[site].id)
    cfaset.site_locations = new_site_locations


# ----------------------------------------------------------------------
# export


def cfa_to_dot(cfa: Cfa) -> str:
    """Graphviz text for one automaton (debugging aid)."""
    lines = [f'digraph "{cfa.owner}" {{']
    for loc in cfa.locations:
        shape = {INITIAL: "circle", PAUSE: "box", MAGIC: "diamond", FINAL: "doublecircle"}[
            loc.kind
        ]
        lines.append(f'  L{loc.id} [shape={shape},label="{loc.label()}"];')
    lines.append('  ERR [shape=octagon,label="error"];')
    seen_err = False
    for seg in cfa.segments:
        dst = "ERR" if seg.dst == ERROR_LOC else f"L{seg.dst}"
        if seg.dst == ERROR_LOC:
            seen_err = True
        lines.append(f"  L{seg.src} -> {dst};")
    if not seen_err:
        lines.append("  // no assertion can fail in this automaton")
    lines.append("}")
    return "\n".join(lines)
