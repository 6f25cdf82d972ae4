"""Compile a flattened model plus its automata into a symbolic game.

State variables are the bit-blasted program variables, one program
counter per process and one absorbing error bit.  Uncontrollable action
variables pick a process to schedule and supply a shared pool of choice
bits for ``*`` reads; controllable action variables select a task to
invoke (value 0 exits the magic block) plus argument bits per task.

A state belongs to the controller exactly when some program counter sits
at a magic location and the error bit is clear.  Transitions out of
error states and out of environment deadlocks are stutter loops, keeping
both relations total.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cfa as C
from .bdd import FALSE, TRUE, Bdd
from .diagnostics import Position, TypeCheckError, WidthError
from .frontend import model as M


@dataclass
class VarMap:
    mgr: Bdd
    # per program variable / program counter: (current, next) levels, LSB first
    var_bits: dict[str, list[tuple[int, int]]]
    pc_bits: dict[str, list[tuple[int, int]]]
    err_bit: tuple[int, int]
    yu_sched: list[int]
    yu_choice: list[int]
    yc_sel: list[int]
    yc_args: dict[str, list[list[int]]]  # task -> per-parameter levels
    proc_index: dict[str, int]
    task_index: dict[str, int]  # controllable tasks, selector value = index+1

    x_levels: list[int] = field(default_factory=list)
    xp_levels: list[int] = field(default_factory=list)
    yu_levels: list[int] = field(default_factory=list)
    yc_levels: list[int] = field(default_factory=list)

    def finalize(self) -> None:
        for bits in list(self.pc_bits.values()) + list(self.var_bits.values()):
            for cur, nxt in bits:
                self.x_levels.append(cur)
                self.xp_levels.append(nxt)
        self.x_levels.append(self.err_bit[0])
        self.xp_levels.append(self.err_bit[1])
        self.yu_levels = list(self.yu_sched) + list(self.yu_choice)
        self.yc_levels = list(self.yc_sel)
        for arg_levels in self.yc_args.values():
            for levels in arg_levels:
                self.yc_levels.extend(levels)

    @property
    def state_bit_count(self) -> int:
        """Bits of program variables only (PCs and error excluded)."""
        return sum(len(b) for b in self.var_bits.values())

    @property
    def pc_bit_count(self) -> int:
        return sum(len(b) for b in self.pc_bits.values())


@dataclass
class SymbolicGame:
    mgr: Bdd
    varmap: VarMap
    model: M.SpecModel
    cfaset: C.CfaSet
    init: int
    delta_c: int
    delta_u: int
    goals: list[int]
    goal_names: list[str]
    fairness: list[int]
    fairness_names: list[str]
    error_states: int
    controller_turn: int
    # labelled disjuncts, used for decoding moves and partitioned images
    du_parts: list[tuple[tuple, int]]
    dc_parts: list[tuple[tuple, int]]
    # predicates handy downstream
    runnable: dict[str, int]
    at_loc: dict[tuple[str, int], int]

    def x_varset(self):
        return self.varmap.x_levels

    def prime(self, f: int) -> int:
        return self.mgr.swap_prime(f)


# ----------------------------------------------------------------------
# bit-vector helpers


def const_vec(mgr: Bdd, value: int, width: int) -> list[int]:
    return [TRUE if (value >> i) & 1 else FALSE for i in range(width)]


def widen(mgr: Bdd, vec: list[int], width: int) -> list[int]:
    if len(vec) >= width:
        return vec[:width]
    return vec + [FALSE] * (width - len(vec))


def vec_eq(mgr: Bdd, a: list[int], b: list[int]) -> int:
    w = max(len(a), len(b))
    a = widen(mgr, a, w)
    b = widen(mgr, b, w)
    r = TRUE
    for x, y in zip(a, b):
        r = mgr.apply("and", r, mgr.equiv(x, y))
    return r


def vec_lt(mgr: Bdd, a: list[int], b: list[int]) -> int:
    w = max(len(a), len(b))
    a = widen(mgr, a, w)
    b = widen(mgr, b, w)
    lt = FALSE
    eq = TRUE
    for i in reversed(range(w)):
        lt = mgr.apply(
            "or", lt, mgr.conj(eq, mgr.neg(a[i]), b[i])
        )
        eq = mgr.apply("and", eq, mgr.equiv(a[i], b[i]))
    return lt


def value_of_levels(mgr: Bdd, levels: list[int]) -> list[int]:
    return [mgr.var(l) for l in levels]


def levels_equal_value(mgr: Bdd, levels: list[int], value: int) -> int:
    r = TRUE
    for i, lvl in enumerate(levels):
        bit = mgr.var(lvl) if (value >> i) & 1 else mgr.nvar(lvl)
        r = mgr.apply("and", r, bit)
    return r


# ----------------------------------------------------------------------
# variable allocation


def encode_vars(model: M.SpecModel, cfaset: C.CfaSet, mgr: Bdd | None = None) -> VarMap:
    """Allocate manager levels: interleaved current/next state bits (PCs,
    error bit, program variables), then scheduler and choice bits, then
    controllable action bits last."""
    mgr = mgr or Bdd()
    pc_bits: dict[str, list[tuple[int, int]]] = {}
    for cfa in cfaset.cfas:
        width = max(1, (len(cfa.locations) - 1).bit_length())
        pc_bits[cfa.owner] = [
            mgr.add_var_pair(f"pc({cfa.owner})[{i}]") for i in range(width)
        ]
    err_bit = mgr.add_var_pair("err")
    var_bits: dict[str, list[tuple[int, int]]] = {}
    for v in model.vars:
        if v.ty.width > 64:
            raise WidthError(f"variable {v.name} exceeds 64 bits", v.pos)
        var_bits[v.name] = [
            mgr.add_var_pair(f"{v.name}[{i}]") for i in range(v.ty.width)
        ]
    nproc = len(cfaset.cfas)
    sched_width = max(0, (nproc - 1).bit_length())
    yu_sched = [mgr.add_var(f"sched[{i}]") for i in range(sched_width)]
    pool = max((c.max_choice_slots for c in cfaset.cfas), default=0)
    yu_choice = [mgr.add_var(f"choice[{i}]") for i in range(pool)]
    tasks = [t for t in model.tasks if t.controllable]
    sel_width = max(0, len(tasks).bit_length()) if tasks else 0
    yc_sel = [mgr.add_var(f"sel[{i}]") for i in range(sel_width)]
    yc_args: dict[str, list[list[int]]] = {}
    for t in tasks:
        yc_args[t.name] = [
            [mgr.add_var(f"{t.name}.{pname}[{i}]") for i in range(pty.width)]
            for pname, pty in t.params
        ]
    vm = VarMap(
        mgr=mgr,
        var_bits=var_bits,
        pc_bits=pc_bits,
        err_bit=err_bit,
        yu_sched=yu_sched,
        yu_choice=yu_choice,
        yc_sel=yc_sel,
        yc_args=yc_args,
        proc_index={c.owner: i for i, c in enumerate(cfaset.cfas)},
        task_index={t.name: i for i, t in enumerate(tasks)},
    )
    vm.finalize()
    return vm


# ----------------------------------------------------------------------
# expression and tree encoding


class _TreeEncoder:
    """Turns one decision tree into transition-relation disjuncts."""

    def __init__(self, game_vars: VarMap, kind: str, proc: str | None, src: int):
        self.vm = game_vars
        self.mgr = game_vars.mgr
        self.kind = kind  # "env" | "exit" | "call"
        self.proc = proc
        self.src = src
        # identity vectors for the frame condition
        self.ident = {
            name: [self.mgr.var(cur) for cur, _ in bits]
            for name, bits in game_vars.var_bits.items()
        }
        self.ident_bdd = {
            name: self._vec_next_eq(name, self.ident[name])
            for name in game_vars.var_bits
        }
        self.out = FALSE
        self.param_vecs: dict[str, list[int]] = {}

    def _vec_next_eq(self, var_name: str, vec: list[int]) -> int:
        bits = self.vm.var_bits[var_name]
        r = TRUE
        for (cur, nxt), f in zip(bits, widen(self.mgr, vec, len(bits))):
            r = self.mgr.apply("and", r, self.mgr.equiv(self.mgr.var(nxt), f))
        return r

    # -- expressions ---------------------------------------------------

    def eval_vec(self, e: M.Expr, store, binds) -> list[int]:
        mgr = self.mgr
        if isinstance(e, M.EConst):
            return const_vec(mgr, e.value, e.ty.width)
        if isinstance(e, M.EVar):
            return store[e.var.name]
        if isinstance(e, C.EChoiceRef):
            levels = self.vm.yu_choice[e.offset : e.offset + e.ty.width]
            return [mgr.var(l) for l in levels]
        if isinstance(e, C.EParamRef):
            return binds[e.key]
        if isinstance(e, M.EParam):
            return self.param_vecs[e.name]
        if isinstance(e, M.EUnary):
            return [mgr.neg(self.eval_bit(e.operand, store, binds))]
        if isinstance(e, M.EBinary):
            return [self.eval_binary(e, store, binds)]
        if isinstance(e, M.ESlice):
            base = self.eval_vec(e.base, store, binds)
            return base[e.lo : e.hi + 1]
        raise AssertionError(f"unhandled expression {e!r}")

    def eval_bit(self, e: M.Expr, store, binds) -> int:
        vec = self.eval_vec(e, store, binds)
        assert len(vec) == 1, f"expected 1-bit value for {e!r}"
        return vec[0]

    def eval_binary(self, e: M.EBinary, store, binds) -> int:
        mgr = self.mgr
        if e.op in ("&&", "||"):
            a = self.eval_bit(e.lhs, store, binds)
            b = self.eval_bit(e.rhs, store, binds)
            return mgr.apply("and" if e.op == "&&" else "or", a, b)
        a = self.eval_vec(e.lhs, store, binds)
        b = self.eval_vec(e.rhs, store, binds)
        if e.op == "==":
            return vec_eq(mgr, a, b)
        if e.op == "!=":
            return mgr.neg(vec_eq(mgr, a, b))
        if e.op == "<":
            return vec_lt(mgr, a, b)
        if e.op == ">":
            return vec_lt(mgr, b, a)
        if e.op == "<=":
            return mgr.neg(vec_lt(mgr, b, a))
        if e.op == ">=":
            return mgr.neg(vec_lt(mgr, a, b))
        raise AssertionError(f"unhandled operator {e.op}")

    # -- tree walk -------------------------------------------------------

    def encode(self, tree: C.TNode) -> int:
        store = {name: self.ident[name] for name in self.vm.var_bits}
        self._walk(tree, store, {}, TRUE, frozenset())
        return self.out

    def _walk(self, node: C.TNode, store, binds, guard, used) -> None:
        if guard == FALSE:
            return
        mgr = self.mgr
        if isinstance(node, C.TChoice):
            levels = self.vm.yu_choice[node.offset : node.offset + node.ty.width]
            count = M.type_value_count(node.ty)
            if count < (1 << node.ty.width):
                vec = [mgr.var(l) for l in levels]
                guard = mgr.apply(
                    "and", guard, vec_lt(mgr, vec, const_vec(mgr, count, node.ty.width))
                )
            self._walk(node.next, store, binds, guard, used | set(levels))
        elif isinstance(node, C.TBind):
            vec = self.eval_vec(node.expr, store, binds)
            binds = dict(binds)
            binds[node.key] = vec
            self._walk(node.next, store, binds, guard, used)
        elif isinstance(node, C.TEnter):
            self._walk(node.next, store, binds, guard, used)
        elif isinstance(node, C.TAssign):
            vec = self.eval_vec(node.expr, store, binds)
            store = dict(store)
            store[node.var.name] = widen(self.mgr, vec, node.var.ty.width)
            self._walk(node.next, store, binds, guard, used)
        elif isinstance(node, C.TCheck):
            c = self.eval_bit(node.cond, store, binds)
            self._walk(node.next, store, binds, mgr.apply("and", guard, c), used)
            self._fail(mgr.apply("and", guard, mgr.neg(c)), used)
        elif isinstance(node, C.TBranch):
            c = self.eval_bit(node.cond, store, binds)
            self._walk(node.then, store, binds, mgr.apply("and", guard, c), used)
            self._walk(node.els, store, binds, mgr.apply("and", guard, mgr.neg(c)), used)
        elif isinstance(node, C.TArrive):
            self._leaf(guard, store, node.loc, err=False, used=used)
        elif isinstance(node, C.TDone):
            self._leaf(guard, store, None, err=False, used=used)
        else:
            raise AssertionError(f"unhandled tree node {node!r}")

    def _fail(self, guard: int, used) -> None:
        # assertion failure aborts the move: state and counters freeze,
        # only the error bit rises
        if guard == FALSE:
            return
        self._leaf(guard, self.ident, None, err=True, used=used, frozen=True)

    def _leaf(self, guard, store, dst, err, used, frozen=False) -> None:
        mgr = self.mgr
        rel = guard
        for name in self.vm.var_bits:
            vec = store[name]
            if vec is self.ident[name]:
                rel = mgr.apply("and", rel, self.ident_bdd[name])
            else:
                rel = mgr.apply("and", rel, self._vec_next_eq(name, vec))
            if rel == FALSE:
                return
        for proc, bits in self.vm.pc_bits.items():
            if not frozen and self.kind in ("env", "exit") and proc == self.proc and dst is not None:
                for i, (cur, nxt) in enumerate(bits):
                    want = mgr.var(nxt) if (dst >> i) & 1 else mgr.nvar(nxt)
                    rel = mgr.apply("and", rel, want)
            else:
                for cur, nxt in bits:
                    rel = mgr.apply(
                        "and", rel, mgr.equiv(mgr.var(nxt), mgr.var(cur))
                    )
        ecur, enxt = self.vm.err_bit
        rel = mgr.apply("and", rel, mgr.var(enxt) if err else mgr.nvar(enxt))
        if self.kind == "env":
            for lvl in self.vm.yu_choice:
                if lvl not in used:
                    rel = mgr.apply("and", rel, mgr.nvar(lvl))
        self.out = mgr.apply("or", self.out, rel)


# ----------------------------------------------------------------------
# the game


def encode_game(
    model: M.SpecModel,
    cfaset: C.CfaSet,
    mgr: Bdd | None = None,
    goal_names: list[str] | None = None,
) -> SymbolicGame:
    vm = encode_vars(model, cfaset, mgr)
    mgr = vm.mgr

    at_loc: dict[tuple[str, int], int] = {}
    for cfa in cfaset.cfas:
        levels = [cur for cur, _ in vm.pc_bits[cfa.owner]]
        for loc in cfa.locations:
            at_loc[(cfa.owner, loc.id)] = levels_equal_value(mgr, levels, loc.id)

    err = mgr.var(vm.err_bit[0])
    not_err = mgr.nvar(vm.err_bit[0])

    controller_turn = FALSE
    for cfa in cfaset.cfas:
        for loc in cfa.magic_locations():
            controller_turn = mgr.apply(
                "or", controller_turn, at_loc[(cfa.owner, loc.id)]
            )
    controller_turn = mgr.apply("and", controller_turn, not_err)

    runnable: dict[str, int] = {}
    for cfa in cfaset.cfas:
        r = FALSE
        for loc in cfa.runnable_locations():
            r = mgr.apply("or", r, at_loc[(cfa.owner, loc.id)])
        runnable[cfa.owner] = mgr.apply("and", r, not_err)

    # ---- uncontrollable transitions
    du_parts: list[tuple[tuple, int]] = []
    env_turn = mgr.apply("and", not_err, mgr.neg(controller_turn))
    for cfa in cfaset.cfas:
        ip = vm.proc_index[cfa.owner]
        sched = levels_equal_value(mgr, vm.yu_sched, ip)
        for loc in cfa.runnable_locations():
            enc = _TreeEncoder(vm, "env", cfa.owner, loc.id)
            rel = enc.encode(cfa.trees[loc.id])
            rel = mgr.conj(env_turn, at_loc[(cfa.owner, loc.id)], sched, rel)
            if rel != FALSE:
                du_parts.append((("seg", cfa.owner, loc.id), rel))

    identity_all = _identity(vm)
    zero_yu = TRUE
    for lvl in vm.yu_sched + vm.yu_choice:
        zero_yu = mgr.apply("and", zero_yu, mgr.nvar(lvl))
    deadlock = env_turn
    for cfa in cfaset.cfas:
        deadlock = mgr.apply("and", deadlock, mgr.neg(runnable[cfa.owner]))
    stutter = mgr.conj(deadlock, zero_yu, identity_all)
    if stutter != FALSE:
        du_parts.append((("stutter",), stutter))
    err_stutter = mgr.conj(err, zero_yu, identity_all)
    du_parts.append((("error-stutter",), err_stutter))
    delta_u = FALSE
    for _, rel in du_parts:
        delta_u = mgr.apply("or", delta_u, rel)

    # ---- controllable transitions
    dc_parts: list[tuple[tuple, int]] = []
    tasks = [t for t in model.tasks if t.controllable]

    def args_zero(except_task: str | None) -> int:
        r = TRUE
        for name, arg_levels in vm.yc_args.items():
            if name == except_task:
                continue
            for levels in arg_levels:
                for lvl in levels:
                    r = mgr.apply("and", r, mgr.nvar(lvl))
        return r

    for t in tasks:
        sel = levels_equal_value(mgr, vm.yc_sel, vm.task_index[t.name] + 1)
        enc = _TreeEncoder(vm, "call", None, -1)
        enc.param_vecs = {
            pname: [mgr.var(l) for l in levels]
            for (pname, _), levels in zip(t.params, vm.yc_args[t.name])
        }
        valid = TRUE
        for (pname, pty), levels in zip(t.params, vm.yc_args[t.name]):
            count = M.type_value_count(pty)
            if count < (1 << pty.width):
                valid = mgr.apply(
                    "and",
                    valid,
                    vec_lt(
                        mgr,
                        [mgr.var(l) for l in levels],
                        const_vec(mgr, count, pty.width),
                    ),
                )
        body = enc.encode(cfaset.controllable[t.name].tree)
        rel = mgr.conj(controller_turn, sel, valid, args_zero(t.name), body)
        if rel != FALSE:
            dc_parts.append((("call", t.name), rel))

    exit_sel = levels_equal_value(mgr, vm.yc_sel, 0)
    for cfa in cfaset.cfas:
        for loc in cfa.magic_locations():
            if loc.id not in cfa.trees:
                continue  # filled site under a layout: location exists, no moves
            enc = _TreeEncoder(vm, "exit", cfa.owner, loc.id)
            rel = enc.encode(cfa.trees[loc.id])
            rel = mgr.conj(
                controller_turn,
                at_loc[(cfa.owner, loc.id)],
                exit_sel,
                args_zero(None),
                rel,
            )
            if rel != FALSE:
                dc_parts.append((("exit", cfa.owner, loc.id), rel))

    delta_c = FALSE
    for _, rel in dc_parts:
        delta_c = mgr.apply("or", delta_c, rel)

    # ---- initial condition
    init = not_err
    for cfa in cfaset.cfas:
        init = mgr.apply("and", init, at_loc[(cfa.owner, 0)])
    for v in model.vars:
        bits = vm.var_bits[v.name]
        if v.init is not None:
            init = mgr.apply(
                "and",
                init,
                levels_equal_value(mgr, [cur for cur, _ in bits], v.init),
            )
        else:
            count = M.type_value_count(v.ty)
            if count < (1 << v.ty.width):
                init = mgr.apply(
                    "and",
                    init,
                    vec_lt(
                        mgr,
                        [mgr.var(cur) for cur, _ in bits],
                        const_vec(mgr, count, v.ty.width),
                    ),
                )

    # ---- goals and fairness
    goals: list[int] = []
    names: list[str] = []
    selected = model.goals
    if goal_names:
        selected = [g for g in model.goals if g.name in goal_names]
        missing = set(goal_names) - {g.name for g in selected}
        if missing:
            raise TypeCheckError(
                f"unknown goal(s): {sorted(missing)}", Position("<goals>", 0, 0)
            )
    enc = _TreeEncoder(vm, "env", None, -1)
    store = {name: enc.ident[name] for name in vm.var_bits}
    for g in selected:
        region = enc.eval_bit(g.expr, store, {})
        goals.append(mgr.apply("and", region, not_err))
        names.append(g.name)
    if not goals:
        goals = [not_err]
        names = ["<safety>"]

    fairness: list[int] = []
    fairness_names: list[str] = []
    for cfa in cfaset.cfas:
        ip = vm.proc_index[cfa.owner]
        phi = mgr.apply(
            "or",
            levels_equal_value(mgr, vm.yu_sched, ip),
            mgr.neg(runnable[cfa.owner]),
        )
        fairness.append(phi)
        fairness_names.append(cfa.owner)
    if not fairness:
        fairness = [TRUE]
        fairness_names = ["<trivial>"]

    return SymbolicGame(
        mgr=mgr,
        varmap=vm,
        model=model,
        cfaset=cfaset,
        init=init,
        delta_c=delta_c,
        delta_u=delta_u,
        goals=goals,
        goal_names=names,
        fairness=fairness,
        fairness_names=fairness_names,
        error_states=err,
        controller_turn=controller_turn,
        du_parts=du_parts,
        dc_parts=dc_parts,
        runnable=runnable,
        at_loc=at_loc,
    )


def _identity(vm: VarMap) -> int:
    mgr = vm.mgr
    r = TRUE
    for bits in list(vm.pc_bits.values()) + list(vm.var_bits.values()):
        for cur, nxt in bits:
            r = mgr.apply("and", r, mgr.equiv(mgr.var(nxt), mgr.var(cur)))
    ecur, enxt = vm.err_bit
    return mgr.apply("and", r, mgr.equiv(mgr.var(enxt), mgr.var(ecur)))


# ----------------------------------------------------------------------
# concrete state and move conversions


def state_to_cube(game: SymbolicGame, state) -> dict[int, bool]:
    """Bit assignment over current-state levels for an interpreter state."""
    vm = game.varmap
    out: dict[int, bool] = {}
    for name, bits in vm.var_bits.items():
        value = state.values[name]
        for i, (cur, _) in enumerate(bits):
            out[cur] = bool((value >> i) & 1)
    for proc, bits in vm.pc_bits.items():
        value = state.pcs[proc]
        for i, (cur, _) in enumerate(bits):
            out[cur] = bool((value >> i) & 1)
    out[vm.err_bit[0]] = state.err
    return out


def cube_to_state(game: SymbolicGame, cube: dict[int, bool]):
    from .interp import ConcreteState

    vm = game.varmap
    values = {}
    for name, bits in vm.var_bits.items():
        values[name] = sum(
            (1 << i) for i, (cur, _) in enumerate(bits) if cube.get(cur, False)
        )
    pcs = {}
    for proc, bits in vm.pc_bits.items():
        pcs[proc] = sum(
            (1 << i) for i, (cur, _) in enumerate(bits) if cube.get(cur, False)
        )
    return ConcreteState(values, pcs, cube.get(vm.err_bit[0], False))


def decode_env_move(game: SymbolicGame, cube: dict[int, bool]):
    """(process name, choice bits) from a Yu assignment."""
    vm = game.varmap
    sched = sum((1 << i) for i, l in enumerate(vm.yu_sched) if cube.get(l, False))
    procs = list(vm.proc_index)
    proc = procs[sched] if sched < len(procs) else procs[0] if procs else None
    choice = {i: bool(cube.get(l, False)) for i, l in enumerate(vm.yu_choice)}
    return proc, choice


def encode_env_move(game: SymbolicGame, proc: str, choice: dict[int, bool]) -> dict[int, bool]:
    vm = game.varmap
    out: dict[int, bool] = {}
    ip = vm.proc_index[proc]
    for i, l in enumerate(vm.yu_sched):
        out[l] = bool((ip >> i) & 1)
    for i, l in enumerate(vm.yu_choice):
        out[l] = bool(choice.get(i, False))
    return out


def decode_ctrl_move(game: SymbolicGame, cube: dict[int, bool]):
    """('exit', None) or (task name, per-parameter argument values)."""
    vm = game.varmap
    sel = sum((1 << i) for i, l in enumerate(vm.yc_sel) if cube.get(l, False))
    if sel == 0:
        return "exit", None
    tasks = list(vm.task_index)
    task = tasks[sel - 1]
    args = []
    for levels in vm.yc_args[task]:
        args.append(sum((1 << i) for i, l in enumerate(levels) if cube.get(l, False)))
    return task, args


def encode_ctrl_move(game: SymbolicGame, action: str, args: list[int] | None) -> dict[int, bool]:
    vm = game.varmap
    out = {l: False for l in vm.yc_levels}
    if action == "exit":
        return out
    sel = vm.task_index[action] + 1
    for i, l in enumerate(vm.yc_sel):
        out[l] = bool((sel >> i) & 1)
    for levels, value in zip(vm.yc_args[action], args or []):
        for i, l in enumerate(levels):
            out[l] = bool((value >> i) & 1)
    return out


def game_stats(game: SymbolicGame) -> dict:
    vm = game.varmap
    return {
        "processes": len(game.cfaset.cfas),
        "state_bits": vm.state_bit_count,
        "pc_bits": vm.pc_bit_count,
        "yu_bits": len(vm.yu_levels),
        "yc_bits": len(vm.yc_levels),
        "bdd_vars": vm.mgr.nvars,
        "delta_u_nodes": game.mgr.node_count(game.delta_u),
        "delta_c_nodes": game.mgr.node_count(game.delta_c),
        "init_nodes": game.mgr.node_count(game.init),
        "goals": game.goal_names,
        "fairness": game.fairness_names,
        "manager_nodes": len(game.mgr),
        "variable_map": {
            "vars": {
                name: [cur for cur, _ in bits] for name, bits in vm.var_bits.items()
            },
            "pcs": {
                name: [cur for cur, _ in bits] for name, bits in vm.pc_bits.items()
            },
            "error_bit": vm.err_bit[0],
            "scheduler": list(vm.yu_sched),
            "choice_pool": list(vm.yu_choice),
            "task_selector": list(vm.yc_sel),
            "task_args": {
                name: [list(levels) for levels in arg_levels]
                for name, arg_levels in vm.yc_args.items()
            },
        },
    }
