"""Concrete execution of segment trees: the reference interpreter.

Used by the debugger for statement-level stepping, by tests as the
ground truth the symbolic encoding must agree with, and by the code
generator for lockstep validation of emitted C.

Semantics mirror the encoder exactly: assignments mask to the target
width, assertion failure aborts the whole move (all updates discarded,
program counters frozen, error bit raised), and ``*`` reads consume
choice-pool bits by offset.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import cfa as C
from .diagnostics import Position
from .frontend import model as M


@dataclass
class ConcreteState:
    values: dict[str, int]
    pcs: dict[str, int]
    err: bool = False

    def copy(self) -> "ConcreteState":
        return ConcreteState(dict(self.values), dict(self.pcs), self.err)

    def key(self) -> tuple:
        return (tuple(sorted(self.values.items())), tuple(sorted(self.pcs.items())), self.err)

    def to_json(self) -> dict:
        return {"values": dict(self.values), "pcs": dict(self.pcs), "err": self.err}


@dataclass(frozen=True)
class StepEvent:
    kind: str  # choice | bind | write | check | branch | arrive | fail
    pos: Position | None
    detail: dict

    def to_json(self) -> dict:
        out = {"kind": self.kind, "detail": dict(self.detail)}
        if self.pos is not None:
            out["pos"] = {"file": self.pos.file, "line": self.pos.line, "col": self.pos.col}
        return out


@dataclass
class MoveOutcome:
    state: ConcreteState
    events: list[StepEvent]
    failed_at: Position | None = None  # set when an assertion aborted the move
    choices_used: dict[int, int] = field(default_factory=dict)  # offset -> value


class ChoiceSource:
    """Supplies values for ``*`` reads, either fixed or drawn from an RNG."""

    def __init__(self, fixed: dict[int, bool] | None = None, rng: random.Random | None = None):
        self.fixed = fixed
        self.rng = rng

    def read(self, offset: int, ty: M.Type) -> int:
        count = M.type_value_count(ty)
        if self.fixed is not None:
            value = 0
            for i in range(ty.width):
                if self.fixed.get(offset + i, False):
                    value |= 1 << i
            if value >= count:
                raise ValueError(
                    f"choice value {value} out of range for {ty} at offset {offset}"
                )
            return value
        assert self.rng is not None, "no choice source"
        return self.rng.randrange(count)


def initial_state(
    model: M.SpecModel, cfaset: C.CfaSet, free: dict[str, int] | None = None
) -> ConcreteState:
    """Initial state with declared initialisers applied; variables without
    an initialiser take the value given in ``free`` (default 0)."""
    free = free or {}
    values = {}
    for v in model.vars:
        if v.init is not None:
            values[v.name] = v.init
        else:
            values[v.name] = free.get(v.name, 0) % M.type_value_count(v.ty)
    pcs = {cfa.owner: 0 for cfa in cfaset.cfas}
    return ConcreteState(values, pcs, False)


def magic_pc(cfaset: C.CfaSet, state: ConcreteState) -> tuple[str, C.Location] | None:
    """The process sitting at a magic location, if any."""
    if state.err:
        return None
    for cfa in cfaset.cfas:
        loc_id = state.pcs[cfa.owner]
        if loc_id < len(cfa.locations):
            loc = cfa.locations[loc_id]
            if loc.kind == C.MAGIC:
                return cfa.owner, loc
    return None


def at_site(cfaset: C.CfaSet, state: ConcreteState, site: int) -> bool:
    entry = cfaset.site_locations.get(site)
    if entry is None:
        return False
    proc, loc_id = entry
    return not state.err and state.pcs[proc] == loc_id


def runnable_processes(cfaset: C.CfaSet, state: ConcreteState) -> list[str]:
    if state.err or magic_pc(cfaset, state) is not None:
        return []
    out = []
    for cfa in cfaset.cfas:
        loc_id = state.pcs[cfa.owner]
        loc = cfa.locations[loc_id]
        if loc.kind != C.MAGIC and loc.id in cfa.trees:
            out.append(cfa.owner)
    return out


# ----------------------------------------------------------------------
# expression evaluation


def _mask(value: int, width: int) -> int:
    return value & ((1 << width) - 1)


def eval_expr(
    e: M.Expr,
    values: dict[str, int],
    binds: dict,
    params: dict[str, int] | None = None,
    chosen: dict[int, int] | None = None,
) -> int:
    if isinstance(e, M.EConst):
        return e.value
    if isinstance(e, M.EVar):
        return values[e.var.name]
    if isinstance(e, C.EChoiceRef):
        assert chosen is not None, "choice read outside tree execution"
        return chosen[e.offset]
    if isinstance(e, C.EParamRef):
        return binds[e.key]
    if isinstance(e, M.EParam):
        assert params is not None, "parameter outside a controllable body"
        return params[e.name]
    if isinstance(e, M.EUnary):
        return 1 - eval_expr(e.operand, values, binds, params, chosen)
    if isinstance(e, M.EBinary):
        a = eval_expr(e.lhs, values, binds, params, chosen)
        if e.op == "&&":
            return int(bool(a) and bool(eval_expr(e.rhs, values, binds, params, chosen)))
        if e.op == "||":
            return int(bool(a) or bool(eval_expr(e.rhs, values, binds, params, chosen)))
        b = eval_expr(e.rhs, values, binds, params, chosen)
        return int(
            {
                "==": a == b,
                "!=": a != b,
                "<": a < b,
                "<=": a <= b,
                ">": a > b,
                ">=": a >= b,
            }[e.op]
        )
    if isinstance(e, M.ESlice):
        base = eval_expr(e.base, values, binds, params, chosen)
        return (base >> e.lo) & ((1 << (e.hi - e.lo + 1)) - 1)
    raise AssertionError(f"unhandled expression {e!r}")


# ----------------------------------------------------------------------
# tree execution


def run_tree(
    tree: C.TNode,
    state: ConcreteState,
    choices: ChoiceSource,
    params: dict[str, int] | None = None,
) -> tuple[str, int | None, dict[str, int], list[StepEvent], dict[int, int], Position | None]:
    """Execute one decision tree against a state.

    Returns (outcome, target location, new values, events, choices used,
    fail position); outcome is ``arrive``, ``done`` or ``fail``.
    """
    values = dict(state.values)
    binds: dict = {}
    events: list[StepEvent] = []
    used: dict[int, int] = {}
    # values recorded by the enclosing TChoice nodes, consumed by
    # choice references inside expressions
    chosen: dict[int, int] = {}

    def ev(e: M.Expr) -> int:
        return eval_expr(e, values, binds, params, chosen)

    node = tree
    while True:
        if isinstance(node, C.TChoice):
            value = choices.read(node.offset, node.ty)
            chosen[node.offset] = value
            used[node.offset] = value
            events.append(
                StepEvent("choice", node.pos, {"offset": node.offset, "value": value})
            )
            node = node.next
        elif isinstance(node, C.TBind):
            value = ev(node.expr)
            binds[node.key] = value
            events.append(
                StepEvent("bind", node.pos, {"param": node.key[1], "value": value})
            )
            node = node.next
        elif isinstance(node, C.TEnter):
            events.append(StepEvent("enter", node.pos, {"task": node.task}))
            node = node.next
        elif isinstance(node, C.TAssign):
            value = _mask(ev(node.expr), node.var.ty.width)
            old = values[node.var.name]
            values[node.var.name] = value
            events.append(
                StepEvent(
                    "write",
                    node.pos,
                    {"var": node.var.name, "old": old, "new": value},
                )
            )
            node = node.next
        elif isinstance(node, C.TCheck):
            ok = bool(ev(node.cond))
            events.append(StepEvent("check", node.pos, {"ok": ok}))
            if not ok:
                events.append(StepEvent("fail", node.pos, {}))
                return "fail", None, dict(state.values), events, used, node.pos
            node = node.next
        elif isinstance(node, C.TBranch):
            taken = bool(ev(node.cond))
            events.append(StepEvent("branch", node.pos, {"taken": taken}))
            node = node.then if taken else node.els
        elif isinstance(node, C.TArrive):
            events.append(StepEvent("arrive", None, {"loc": node.loc}))
            return "arrive", node.loc, values, events, used, None
        elif isinstance(node, C.TDone):
            events.append(StepEvent("arrive", None, {"loc": None}))
            return "done", None, values, events, used, None
        else:
            raise AssertionError(f"unhandled tree node {node!r}")


# ----------------------------------------------------------------------
# whole moves


def env_move(
    cfaset: C.CfaSet,
    state: ConcreteState,
    proc: str,
    choices: ChoiceSource,
) -> MoveOutcome:
    """Schedule one process for one atomic transition."""
    assert not state.err, "error states only stutter"
    cfa = cfaset.cfa_of(proc)
    loc_id = state.pcs[proc]
    tree = cfa.trees.get(loc_id)
    assert tree is not None and cfa.locations[loc_id].kind != C.MAGIC, (
        f"{proc} is not runnable at L{loc_id}"
    )
    outcome, dst, values, events, used, fail_pos = run_tree(tree, state, choices)
    new = state.copy()
    if outcome == "fail":
        new.err = True
    else:
        new.values = values
        new.pcs[proc] = dst
    return MoveOutcome(new, events, fail_pos, used)


def env_stutter(state: ConcreteState) -> MoveOutcome:
    return MoveOutcome(state.copy(), [StepEvent("stutter", None, {})])


def ctrl_call(
    cfaset: C.CfaSet,
    state: ConcreteState,
    task_name: str,
    args: list[int],
) -> MoveOutcome:
    """Invoke a controllable task as one atomic controller move; control
    stays at the magic location."""
    body = cfaset.controllable[task_name]
    params = {pname: value for (pname, _), value in zip(body.task.params, args)}
    outcome, _, values, events, _, fail_pos = run_tree(
        body.tree, state, ChoiceSource(fixed={}), params=params
    )
    new = state.copy()
    if outcome == "fail":
        new.err = True
    else:
        new.values = values
    return MoveOutcome(new, events, fail_pos)


def ctrl_exit(cfaset: C.CfaSet, state: ConcreteState) -> MoveOutcome:
    """Leave the magic block: the interrupted transition resumes and runs
    to its next cut point."""
    at = magic_pc(cfaset, state)
    assert at is not None, "no process is inside a magic block"
    proc, loc = at
    cfa = cfaset.cfa_of(proc)
    tree = cfa.trees[loc.id]
    outcome, dst, values, events, _, fail_pos = run_tree(
        tree, state, ChoiceSource(fixed={})
    )
    new = state.copy()
    if outcome == "fail":
        new.err = True
    else:
        new.values = values
        new.pcs[proc] = dst
    return MoveOutcome(new, events, fail_pos)


# ----------------------------------------------------------------------
# closed-system simulation (no open magic sites)


def simulate_closed(
    cfaset: C.CfaSet,
    state: ConcreteState,
    rng: random.Random,
    steps: int,
    on_state=None,
) -> list[ConcreteState]:
    """Run a closed model under a uniformly random fair schedule.

    Returns the trajectory (including the start state).  ``on_state`` is
    called after every transition.
    """
    trace = [state]
    cur = state
    for _ in range(steps):
        procs = runnable_processes(cfaset, cur)
        if not procs:
            assert magic_pc(cfaset, cur) is None, "open magic site in simulation"
            nxt = env_stutter(cur).state
        else:
            proc = rng.choice(procs)
            nxt = env_move(cfaset, cur, proc, ChoiceSource(rng=rng)).state
        trace.append(nxt)
        if on_state is not None:
            on_state(nxt)
        cur = nxt
    return trace
