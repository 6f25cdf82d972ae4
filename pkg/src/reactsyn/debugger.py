"""Interactive counterexample debugging.

The user plays the controller; the engine answers for the environment.
In counterexample mode the engine follows the spoiling certificate:
it steers the play down the goal-starvation attractor (or into the
error attractor) while never leaving the losing region, schedules
processes round-robin among the moves that comply, and resolves ``*``
reads with the deterministic lowest-bits cube policy, so published
walkthroughs replay exactly.  Free-play mode drives any specification
with the same deterministic policy over the full transition relation.

Every explored transition lands in a trace graph; the user can jump
back to any node and branch differently.  The last transition's events
replay statement by statement for source-level single-stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import interp
from .bdd import FALSE
from .cfa import MAGIC
from .diagnostics import Position
from .encode import (
    SymbolicGame,
    decode_env_move,
    encode_ctrl_move,
    encode_env_move,
    state_to_cube,
)
from .frontend import model as M
from .frontend import parse_statement
from .frontend import ast as A
from .solver import SpoilingCert, WinningCert

COUNTEREXAMPLE = "counterexample"
FREE_PLAY = "free-play"


class DebuggerError(Exception):
    kind = "debugger"


class NoLosingInitial(DebuggerError):
    kind = "no-losing-initial"


class IllegalAction(DebuggerError):
    kind = "illegal-action"


class UnknownNode(DebuggerError):
    kind = "unknown-node"


class Stuck(DebuggerError):
    kind = "stuck"


class TraceLimit(DebuggerError):
    kind = "trace-limit"


@dataclass
class AssertionViolation:
    pos: Position
    message: str

    def to_json(self) -> dict:
        return {
            "pos": {"file": self.pos.file, "line": self.pos.line, "col": self.pos.col},
            "message": self.message,
        }


@dataclass
class TraceNode:
    id: int
    state: interp.ConcreteState
    label: str


@dataclass
class TraceEdge:
    id: int
    src: int
    dst: int
    move: dict  # serialisable move description
    events: list[interp.StepEvent]


@dataclass
class StepResult:
    node: TraceNode
    edge: TraceEdge
    violation: AssertionViolation | None = None


class Session:
    """One debugging session over one solved game."""

    def __init__(
        self,
        game: SymbolicGame,
        cert,
        mode: str = COUNTEREXAMPLE,
        max_nodes: int = 10_000,
    ):
        self.game = game
        self.model: M.SpecModel = game.model
        self.cfaset = game.cfaset
        self.cert = cert
        self.mode = mode
        self.max_nodes = max_nodes
        self.nodes: list[TraceNode] = []
        self.edges: list[TraceEdge] = []
        self.active: int = 0
        self._rr = 0  # round-robin pointer over processes
        self._replay: tuple[int, int] | None = None  # (edge id, event index)
        mgr = game.mgr
        if mode == COUNTEREXAMPLE:
            if not isinstance(cert, SpoilingCert):
                raise NoLosingInitial(
                    "the specification is realizable; no losing initial state"
                )
            root_region = mgr.apply("and", game.init, cert.w_env)
            if root_region == FALSE:
                raise NoLosingInitial("no initial state is losing")
        else:
            root_region = game.init
        cube = mgr.pick_cube(root_region, game.varmap.x_levels)
        from .encode import cube_to_state

        root_state = cube_to_state(game, cube)
        self._add_node(root_state, "initial")

    # ------------------------------------------------------------------

    def _add_node(self, state: interp.ConcreteState, label: str) -> TraceNode:
        if len(self.nodes) >= self.max_nodes:
            raise TraceLimit(f"trace graph limit of {self.max_nodes} nodes reached")
        node = TraceNode(len(self.nodes), state, label)
        self.nodes.append(node)
        return node

    def _add_edge(self, src: int, dst: int, move: dict, events) -> TraceEdge:
        edge = TraceEdge(len(self.edges), src, dst, move, list(events))
        self.edges.append(edge)
        self._replay = (edge.id, 0)
        return edge

    @property
    def active_state(self) -> interp.ConcreteState:
        return self.nodes[self.active].state

    def at_magic(self):
        return interp.magic_pc(self.cfaset, self.active_state)

    # ------------------------------------------------------------------
    # environment steps

    def env_step(self) -> StepResult:
        """The engine takes one environment move at the active node."""
        state = self.active_state
        if state.err or self.at_magic() is not None:
            raise Stuck("the environment cannot move here")
        mgr = self.game.mgr
        cube = state_to_cube(self.game, state)
        state_bdd = mgr.cube(cube)
        moves = mgr.and_exists(
            self.game.varmap.xp_levels,
            self.game.delta_u,
            self._allowed_successors(state),
        )
        moves = mgr.apply("and", moves, state_bdd)
        moves = mgr.exists(self.game.varmap.x_levels, moves)
        if moves == FALSE:
            raise Stuck("no admissible environment move (certificate gap)")
        move_cube = self._round_robin_pick(moves)
        proc, choice = decode_env_move(self.game, move_cube)
        runnable = interp.runnable_processes(self.cfaset, state)
        if proc in runnable:
            out = interp.env_move(
                self.cfaset, state, proc, interp.ChoiceSource(fixed=choice)
            )
            move = {
                "kind": "env",
                "process": proc,
                "choices": dict(out.choices_used),
            }
        else:
            out = interp.env_stutter(state)
            move = {"kind": "env", "process": None, "choices": {}}
        if self.mode == COUNTEREXAMPLE:
            new_cube = state_to_cube(self.game, out.state)
            assert mgr.eval(self.cert.w_env, new_cube), (
                "engine move left the losing region"
            )
        node = self._add_node(out.state, self._label(out.state))
        edge = self._add_edge(self.active, node.id, move, out.events)
        self.active = node.id
        violation = None
        if out.failed_at is not None:
            violation = AssertionViolation(out.failed_at, "assertion violated")
        return StepResult(node, edge, violation)

    def _allowed_successors(self, state: interp.ConcreteState) -> int:
        """Successor filter implementing the spoiling policy tiers."""
        mgr = self.game.mgr
        if self.mode != COUNTEREXAMPLE:
            from .bdd import TRUE

            return TRUE
        cert: SpoilingCert = self.cert
        cube = state_to_cube(self.game, state)
        for trap, rings in zip(cert.traps, cert.attractor_rings):
            if not rings or not mgr.eval(rings[-1], cube):
                continue
            if mgr.eval(trap, cube):
                return mgr.swap_prime(trap)
            for k, ring in enumerate(rings):
                if mgr.eval(ring, cube):
                    return mgr.swap_prime(rings[k - 1] if k else trap)
        return mgr.swap_prime(cert.w_env)

    def _round_robin_pick(self, moves: int) -> dict[int, bool]:
        """Prefer the next process in rotation that owns an admissible
        move; inside a process, the lowest cube."""
        mgr = self.game.mgr
        vm = self.game.varmap
        procs = list(vm.proc_index)
        n = len(procs)
        for k in range(n):
            p = procs[(self._rr + k) % n]
            sel = moves
            ip = vm.proc_index[p]
            for i, lvl in enumerate(vm.yu_sched):
                bit = mgr.var(lvl) if (ip >> i) & 1 else mgr.nvar(lvl)
                sel = mgr.apply("and", sel, bit)
            if sel != FALSE:
                self._rr = (self._rr + k + 1) % n
                return mgr.pick_cube(sel, vm.yu_levels)
        # deadlock stutter (or no processes at all)
        return mgr.pick_cube(moves, vm.yu_levels)

    # ------------------------------------------------------------------
    # controller actions

    def user_action(self, action) -> StepResult:
        """Apply a controller action: ``exit`` or a controllable call.

        ``action`` is either source text (``jb.cmd_put()``) or an already
        parsed (task name, argument values) pair.
        """
        state = self.active_state
        if self.at_magic() is None:
            raise IllegalAction("no process is inside a magic block here")
        if isinstance(action, str):
            action = self._parse_action(action, state)
        task_name, args = action
        mgr = self.game.mgr
        if task_name == "exit":
            move_bits = encode_ctrl_move(self.game, "exit", None)
        else:
            if task_name not in self.cfaset.controllable:
                raise IllegalAction(f"{task_name!r} is not a controllable task")
            task = self.cfaset.controllable[task_name].task
            if len(args) != len(task.params):
                raise IllegalAction(
                    f"{task_name} expects {len(task.params)} argument(s)"
                )
            for value, (pname, ty) in zip(args, task.params):
                if not 0 <= value < M.type_value_count(ty):
                    raise IllegalAction(
                        f"argument {pname}={value} out of range for {ty}"
                    )
            move_bits = encode_ctrl_move(self.game, task_name, args)
        cube = state_to_cube(self.game, state)
        cube.update(move_bits)
        probe = mgr.cube(cube)
        if mgr.apply("and", probe, self.game.delta_c) == FALSE:
            raise IllegalAction("this action is not enabled here")
        if task_name == "exit":
            out = interp.ctrl_exit(self.cfaset, state)
            move = {"kind": "ctrl", "action": "exit"}
        else:
            out = interp.ctrl_call(self.cfaset, state, task_name, args)
            move = {"kind": "ctrl", "action": task_name, "args": list(args)}
        node = self._add_node(out.state, self._label(out.state))
        edge = self._add_edge(self.active, node.id, move, out.events)
        self.active = node.id
        violation = None
        if out.failed_at is not None:
            violation = AssertionViolation(
                out.failed_at, f"assertion violated by {task_name}"
            )
        return StepResult(node, edge, violation)

    def _parse_action(self, text: str, state: interp.ConcreteState):
        text = text.strip().rstrip(";").strip()
        if text == "exit":
            return "exit", None
        stmt = parse_statement(text + ";")
        if not isinstance(stmt, A.ACall):
            raise IllegalAction(
                "type a controllable call like jb.cmd_put(), or exit"
            )
        name = stmt.callee.dotted()
        if name not in self.model.task_by_name:
            raise IllegalAction(f"unknown task {name!r}")
        args = [self._eval_action_arg(a, state) for a in stmt.args]
        return name, args

    def _eval_action_arg(self, e: A.ExprAst, state: interp.ConcreteState) -> int:
        if isinstance(e, A.AInt):
            return e.value
        if isinstance(e, A.ABool):
            return int(e.value)
        if isinstance(e, A.AName):
            name = e.dotted()
            if name in state.values:
                return state.values[name]
            # enum literals resolve against the target variable's type at
            # validation time; accept bare literal names scoped per type
            for v in self.model.vars:
                ty = v.ty
                if isinstance(ty, M.EnumType) and e.parts[-1] in ty.literals:
                    return ty.literals.index(e.parts[-1])
            raise IllegalAction(f"cannot evaluate argument {name!r}")
        raise IllegalAction("arguments must be literals or state variables")

    # ------------------------------------------------------------------
    # statement-level stepping and navigation

    def single_step(self) -> interp.StepEvent | None:
        """Advance the pending replay of the last transition by one
        recorded event; None when the replay is exhausted."""
        if self._replay is None:
            raise Stuck("no pending segment replay")
        edge_id, index = self._replay
        events = self.edges[edge_id].events
        if index >= len(events):
            return None
        self._replay = (edge_id, index + 1)
        return events[index]

    def replay_edge(self, edge_id: int) -> None:
        """Arm single-stepping over an already explored edge."""
        if not 0 <= edge_id < len(self.edges):
            raise UnknownNode(f"no edge {edge_id}")
        self._replay = (edge_id, 0)

    def goto_node(self, node_id: int) -> TraceNode:
        if not 0 <= node_id < len(self.nodes):
            raise UnknownNode(f"no node {node_id}")
        self.active = node_id
        self._replay = None
        return self.nodes[node_id]

    # ------------------------------------------------------------------
    # rendering

    def _label(self, state: interp.ConcreteState) -> str:
        if state.err:
            return "error"
        at = interp.magic_pc(self.cfaset, state)
        if at is not None:
            proc, loc = at
            site = self.model.magic_sites[loc.site]
            return f"magic:{site.task}"
        return "env"

    def render_value(self, var: M.VarDecl, value: int) -> str:
        if isinstance(var.ty, M.EnumType):
            return var.ty.literals[value]
        if isinstance(var.ty, M.BoolType):
            return "true" if value else "false"
        return str(value)

    def state_json(self, state: interp.ConcreteState) -> dict:
        values = {}
        for v in self.model.vars:
            values[v.name] = {
                "raw": state.values[v.name],
                "text": self.render_value(v, state.values[v.name]),
            }
        at = interp.magic_pc(self.cfaset, state)
        return {
            "values": values,
            "pcs": dict(state.pcs),
            "err": state.err,
            "at_magic_site": None if at is None else at[1].site,
            "controller_turn": at is not None,
        }

    def node_json(self, node: TraceNode) -> dict:
        return {
            "id": node.id,
            "label": node.label,
            "state": self.state_json(node.state),
        }

    def trace_json(self) -> dict:
        return {
            "mode": self.mode,
            "active": self.active,
            "nodes": [self.node_json(n) for n in self.nodes],
            "edges": [
                {
                    "id": e.id,
                    "src": e.src,
                    "dst": e.dst,
                    "move": e.move,
                    "events": [ev.to_json() for ev in e.events],
                }
                for e in self.edges
            ],
        }


def start(game: SymbolicGame, cert, mode: str = COUNTEREXAMPLE, **kw) -> Session:
    """Open a session; counterexample mode needs a spoiling certificate
    and a losing initial state."""
    if mode == COUNTEREXAMPLE and isinstance(cert, WinningCert):
        raise NoLosingInitial("the specification is realizable")
    return Session(game, cert, mode, **kw)
