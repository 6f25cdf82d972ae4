"""User-guided code generation.

The generator fills one magic site per request: it recompiles the model
with every fill produced so far folded into the uncontrollable relation,
computes the reachable states, validates them against the winning
region, partitions the states reachable at the chosen site by a common
winning action, and renders the partition as an if/else statement over
resugared conditions.  Applying the patch re-elaborates the model; user
fills are never modified.

Action selection is deterministic: a do-nothing partition is carved
first wherever leaving the block is winning; then candidate actions are
ranked by the size of the region they win in (allowing one ring of
slack, so a repositioning command may serve a whole region), breaking
ties by strict ring progress and then by task declaration order.
Argument resugaring prefers a program variable whose value matches the
winning argument bits across the whole region over literal constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cfa as C
from .bdd import FALSE, TRUE, Bdd
from .diagnostics import CompileError, SourceError
from .encode import SymbolicGame, cube_to_state, decode_env_move, encode_game
from .frontend import ast as A
from .frontend import model as M
from .frontend import parse_statement
from .frontend.check import Checker
from .frontend.flatten import elaborate_statement
from .solver import Solver, WinningCert


class CodegenError(SourceError):
    pass


@dataclass
class Fill:
    site: int
    origin: str  # "user" | "generated"
    text: str
    stmt: M.Stmt


@dataclass
class PartialImpl:
    """A model plus the code filled into its magic sites so far."""

    model: M.SpecModel
    fills: dict[int, Fill] = field(default_factory=dict)

    def open_sites(self) -> list[int]:
        return [s.site for s in self.model.magic_sites if s.site not in self.fills]

    def fill_stmts(self) -> dict[int, M.Stmt]:
        return {site: f.stmt for site, f in self.fills.items()}


@dataclass
class Action:
    kind: str  # "call" | "exit"
    task: str = ""
    args: tuple = ()  # per parameter: ("var", qualified name) | ("lit", value)

    def describe(self) -> str:
        if self.kind == "exit":
            return "(leave block)"
        parts = [value if kind == "var" else str(value) for kind, value in self.args]
        return f"{self.task}({', '.join(parts)})"


@dataclass
class PartitionPiece:
    region: int  # over X, within R_l
    action: Action
    sat_count: int


@dataclass
class Partition:
    site: int
    r_l: int
    pieces: list[PartitionPiece]


@dataclass
class Violation:
    """A reachable state outside the winning region, with a replayable
    path of environment moves from an initial state."""

    state: dict
    path: list[dict]

    def to_json(self) -> dict:
        return {"state": self.state, "path": self.path}


@dataclass
class CodePatch:
    site: int
    text: str
    partitions: list[dict]  # evidence: action + sat count per branch
    empty: bool

    def to_json(self) -> dict:
        return {
            "site": self.site,
            "text": self.text,
            "partitions": self.partitions,
            "empty": self.empty,
        }


@dataclass
class ReachResult:
    game: SymbolicGame  # the partial game (fills folded into delta_u)
    rings: list[int]  # reachability onion, in the partial game's manager
    reach_full: int  # transferred onto the solving game's manager
    r_l: int  # reachable states at the site (solving manager)


def transfer(src: Bdd, f: int, dst: Bdd) -> int:
    """Copy a function between managers with identical variable orders."""
    return dst.load_nodes(src.dump_nodes([f]))[0]


class Generator:
    """Drives code generation for one partial implementation."""

    def __init__(self, game: SymbolicGame, cert: WinningCert, impl: PartialImpl):
        if len(game.goals) != 1:
            raise CodegenError(
                "code generation needs a single goal region; restrict the "
                "game to one goal first"
            )
        self.game = game
        self.cert = cert
        self.impl = impl
        self.solver = Solver(game)
        self.mgr = game.mgr
        self._move_cache: dict = {}

    # ------------------------------------------------------------------
    # reachability of the partial implementation

    def simulate_reachable(self, site: int, reopen: bool = True) -> ReachResult:
        """Reachability of the partial implementation, restricted to the
        site; regenerating an already generated site reopens it first."""
        model = self.impl.model
        fills = self.impl.fill_stmts()
        if reopen and site in fills:
            del fills[site]
        cfaset = C.build_cfa(model, fills, layout=self.game.cfaset)
        partial = encode_game(model, cfaset)
        mgr = partial.mgr
        q = list(partial.varmap.yu_levels) + list(partial.varmap.x_levels)
        reach = partial.init
        rings = [reach]
        while True:
            img = mgr.swap_prime(mgr.and_exists(q, partial.delta_u, reach))
            new = mgr.apply("or", reach, img)
            if new == reach:
                break
            reach = new
            rings.append(reach)
        reach_main = transfer(mgr, reach, self.mgr)
        entry = cfaset.site_locations.get(site)
        if entry is None:
            r_l = FALSE
        else:
            proc, locid = entry
            r_l = self.mgr.apply("and", reach_main, self.game.at_loc[(proc, locid)])
        return ReachResult(partial, rings, reach_main, r_l)

    # ------------------------------------------------------------------
    # winning check

    def check_winning(self, reach: ReachResult):
        """None when every reachable state is winning; otherwise a
        violation with a concrete path from an initial state."""
        bad = self.mgr.apply(
            "and", reach.reach_full, self.mgr.neg(self.cert.winning)
        )
        if bad == FALSE:
            return None
        partial = reach.game
        mgr = partial.mgr
        bad_p = transfer(self.mgr, bad, mgr)
        # walk the reachability onion backwards for a shortest path
        k = 0
        while mgr.apply("and", reach.rings[k], bad_p) == FALSE:
            k += 1
        target = mgr.pick_cube(
            mgr.apply("and", reach.rings[k], bad_p), partial.varmap.x_levels
        )
        path = []
        for i in range(k - 1, -1, -1):
            cube_bdd = mgr.cube(target)
            pred = mgr.conj(
                partial.delta_u,
                reach.rings[i],
                mgr.swap_prime(cube_bdd),
            )
            pick = mgr.pick_cube(
                pred, partial.varmap.x_levels + partial.varmap.yu_levels
            )
            proc, choices = decode_env_move(partial, pick)
            state_cube = {l: v for l, v in pick.items() if l in set(partial.varmap.x_levels)}
            path.append(
                {
                    "state": cube_to_state(partial, pick).to_json(),
                    "process": proc,
                    "choices": {k2: v for k2, v in choices.items() if v},
                }
            )
            target = state_cube
        path.reverse()
        final_state = cube_to_state(partial, mgr.pick_cube(
            mgr.apply("and", reach.rings[k], bad_p), partial.varmap.x_levels
        ))
        return Violation(final_state.to_json(), path)

    # ------------------------------------------------------------------
    # partitioning

    def _rings(self) -> list[int]:
        return self.cert.rings[0]

    def _move_rel(self, action: Action) -> int:
        """deltaC restricted to this action, over (X, X')."""
        key = (action.kind, action.task, action.args)
        rel = self._move_cache.get(key)
        if rel is not None:
            return rel
        mgr = self.mgr
        vm = self.game.varmap
        if action.kind == "exit":
            sel = 0
            constraint = TRUE
            for i, lvl in enumerate(vm.yc_sel):
                constraint = mgr.apply("and", constraint, mgr.nvar(lvl))
            for levels in [l for ls in vm.yc_args.values() for l in ls]:
                for lvl in levels:
                    constraint = mgr.apply("and", constraint, mgr.nvar(lvl))
        else:
            selval = vm.task_index[action.task] + 1
            constraint = TRUE
            for i, lvl in enumerate(vm.yc_sel):
                bit = mgr.var(lvl) if (selval >> i) & 1 else mgr.nvar(lvl)
                constraint = mgr.apply("and", constraint, bit)
            for (kind, value), levels in zip(action.args, vm.yc_args[action.task]):
                if kind == "lit":
                    for i, lvl in enumerate(levels):
                        bit = mgr.var(lvl) if (value >> i) & 1 else mgr.nvar(lvl)
                        constraint = mgr.apply("and", constraint, bit)
                else:
                    bits = self.game.varmap.var_bits[value]
                    for i, lvl in enumerate(levels):
                        if i < len(bits):
                            eq = mgr.equiv(mgr.var(lvl), mgr.var(bits[i][0]))
                        else:
                            eq = mgr.nvar(lvl)
                        constraint = mgr.apply("and", constraint, eq)
        rel = mgr.and_exists(
            vm.yc_levels, self.game.delta_c, constraint
        )
        self._move_cache[key] = rel
        return rel

    def _winning_cover(self, action: Action, within: int) -> int:
        """States of ``within`` where taking the action is winning.

        Winning: the unique successor stays in W and either hits the goal,
        or climbs at most one ring above the state's own stratum; from
        goal states any W successor is acceptable (the measure resets).
        """
        mgr = self.mgr
        rings = self._rings()
        w = self.cert.winning
        goal = self.game.goals[0]
        move = self._move_rel(action)
        succ_w = mgr.swap_prime(w)
        succ_goal = mgr.swap_prime(mgr.apply("and", goal, w))
        out = mgr.conj(
            within,
            goal,
            mgr.and_exists(self.game.varmap.xp_levels, move, succ_w),
        )
        k_top = len(rings) - 1
        for r in range(1, len(rings)):
            stratum = mgr.conj(within, mgr.neg(goal), rings[r], mgr.neg(rings[r - 1]))
            if stratum == FALSE:
                continue
            cap = rings[min(r + 1, k_top)]
            ok = mgr.apply("or", succ_goal, mgr.swap_prime(mgr.apply("and", cap, w)))
            cover = mgr.and_exists(self.game.varmap.xp_levels, move, ok)
            out = mgr.apply("or", out, mgr.apply("and", stratum, cover))
        return out

    def _strict_cover(self, action: Action, within: int) -> int:
        mgr = self.mgr
        vm = self.game.varmap
        rho = self.cert.strategy[0]
        if action.kind == "exit":
            constraint = TRUE
            for lvl in vm.yc_levels:
                constraint = mgr.apply("and", constraint, mgr.nvar(lvl))
        else:
            selval = vm.task_index[action.task] + 1
            constraint = TRUE
            for i, lvl in enumerate(vm.yc_sel):
                bit = mgr.var(lvl) if (selval >> i) & 1 else mgr.nvar(lvl)
                constraint = mgr.apply("and", constraint, bit)
            for (kind, value), levels in zip(action.args, vm.yc_args[action.task]):
                if kind == "lit":
                    for i, lvl in enumerate(levels):
                        bit = mgr.var(lvl) if (value >> i) & 1 else mgr.nvar(lvl)
                        constraint = mgr.apply("and", constraint, bit)
                else:
                    bits = vm.var_bits[value]
                    for i, lvl in enumerate(levels):
                        if i < len(bits):
                            eq = mgr.equiv(mgr.var(lvl), mgr.var(bits[i][0]))
                        else:
                            eq = mgr.nvar(lvl)
                        constraint = mgr.apply("and", constraint, eq)
        return mgr.apply(
            "and", within, mgr.and_exists(vm.yc_levels, rho, constraint)
        )

    def _candidates(self, uncovered: int) -> list[Action]:
        """Deterministic candidate actions: parameterless tasks, tasks with
        variable-valued arguments, then strategy-derived literals."""
        mgr = self.mgr
        out: list[Action] = []
        for task in self.impl.model.controllable_tasks():
            if not task.params:
                out.append(Action("call", task.name))
                continue
            options: list[list[tuple]] = []
            for pname, pty in task.params:
                vars_ok = [
                    ("var", v.name)
                    for v in self.impl.model.vars
                    if isinstance(v.ty, M.UIntType) == isinstance(pty, M.UIntType)
                    and v.ty.width <= pty.width
                    and type(v.ty) is type(pty)
                ]
                options.append(vars_ok)
            combos = [()]
            for opts in options:
                combos = [c + (o,) for c in combos for o in opts]
            for combo in combos:
                out.append(Action("call", task.name, combo))
            # literal fallback taken from the strategy at some uncovered state
            lit = self._literal_candidate(task, uncovered)
            if lit is not None:
                out.append(lit)
        return out

    def _literal_candidate(self, task: M.TaskDecl, uncovered: int) -> Action | None:
        mgr = self.mgr
        vm = self.game.varmap
        rho = self.cert.strategy[0]
        selval = vm.task_index[task.name] + 1
        sel = TRUE
        for i, lvl in enumerate(vm.yc_sel):
            bit = mgr.var(lvl) if (selval >> i) & 1 else mgr.nvar(lvl)
            sel = mgr.apply("and", sel, bit)
        here = mgr.conj(rho, uncovered, sel)
        if here == FALSE:
            return None
        cube = mgr.pick_cube(here, vm.yc_levels)
        args = []
        for levels in vm.yc_args[task.name]:
            value = sum((1 << i) for i, l in enumerate(levels) if cube.get(l, False))
            args.append(("lit", value))
        return Action("call", task.name, tuple(args))

    def partition(self, r_l: int) -> Partition:
        mgr = self.mgr
        if mgr.apply("and", r_l, mgr.neg(self.cert.winning)) != FALSE:
            raise CodegenError("reachable states at the site are not all winning")
        x_levels = self.game.varmap.x_levels
        pieces: list[PartitionPiece] = []
        uncovered = r_l
        # do-nothing first: wherever simply leaving the block is winning
        exit_cover = self._winning_cover(Action("exit"), uncovered)
        if exit_cover != FALSE:
            pieces.append(
                PartitionPiece(
                    exit_cover, Action("exit"), mgr.sat_count(exit_cover, x_levels)
                )
            )
            uncovered = mgr.apply("and", uncovered, mgr.neg(exit_cover))
        guard = 0
        while uncovered != FALSE:
            guard += 1
            if guard > 64:
                raise CodegenError("partitioning did not converge")
            best = None
            for idx, action in enumerate(self._candidates(uncovered)):
                cover = self._winning_cover(action, uncovered)
                if cover == FALSE:
                    continue
                sc = mgr.sat_count(cover, x_levels)
                strict = mgr.sat_count(
                    self._strict_cover(action, uncovered), x_levels
                )
                key = (sc, strict, -idx)
                if best is None or key > best[0]:
                    best = (key, action, cover, sc)
            if best is None:
                raise CodegenError(
                    "no winning action covers the remaining states; the "
                    "strategy may need state the template cannot observe"
                )
            _, action, cover, sc = best
            pieces.append(PartitionPiece(cover, action, sc))
            uncovered = mgr.apply("and", uncovered, mgr.neg(cover))
        return Partition(-1, r_l, pieces)

    # ------------------------------------------------------------------
    # condition synthesis

    def _site_scope(self, site: int):
        """(instance path, port rendering map) of the site's template."""
        task_name = self.impl.model.magic_sites[site].task
        path = tuple(task_name.split(".")[:-1])
        portmap = self.impl.model.portmaps.get(path, {})
        render: dict[tuple[str, ...], str] = {path: ""}
        for port, target in portmap.items():
            render[target] = port
        return path, render

    def _render_var(self, name: str, render: dict) -> str:
        parts = tuple(name.split("."))
        owner, leaf = parts[:-1], parts[-1]
        if owner in render:
            prefix = render[owner]
            return f"{prefix}.{leaf}" if prefix else leaf
        raise CodegenError(
            f"variable {name!r} is not observable from the site's template; "
            f"provide this branch manually"
        )

    def _var_bdd(self, name: str) -> list[int]:
        return [self.mgr.var(cur) for cur, _ in self.game.varmap.var_bits[name]]

    def _atoms(self, support_vars: list[M.VarDecl], render: dict):
        """Candidate comparison atoms, in resugaring preference order:
        enum literals, variable equalities, bool tests, then constants."""
        from .encode import const_vec, vec_eq

        mgr = self.mgr
        atoms: list[tuple[str, int]] = []  # (source text, bdd)
        enums = [v for v in support_vars if isinstance(v.ty, M.EnumType)]
        uints = [v for v in support_vars if isinstance(v.ty, M.UIntType)]
        bools = [v for v in support_vars if isinstance(v.ty, M.BoolType)]
        for v in enums:
            name = self._render_var(v.name, render)
            for i, lit in enumerate(v.ty.literals):
                bdd = vec_eq(mgr, self._var_bdd(v.name), const_vec(mgr, i, v.ty.width))
                atoms.append((f"{name} == {lit}", bdd))
        for i, a in enumerate(uints):
            for b in uints[i + 1 :]:
                bdd = vec_eq(mgr, self._var_bdd(a.name), self._var_bdd(b.name))
                atoms.append(
                    (
                        f"{self._render_var(a.name, render)} == "
                        f"{self._render_var(b.name, render)}",
                        bdd,
                    )
                )
        for v in bools:
            atoms.append((self._render_var(v.name, render), self._var_bdd(v.name)[0]))
        return atoms

    def _synth_condition(self, region: int, care: int, render: dict) -> str:
        """A source-level condition agreeing with the region on the care
        set; small conjunctions over comparison atoms are preferred, with
        an irredundant bit-level cover as the fallback."""
        mgr = self.mgr
        support = mgr.support(mgr.apply("or", region, mgr.neg(care)))
        support_vars = [
            v
            for v in self.impl.model.vars
            if any(cur in support for cur, _ in self.game.varmap.var_bits[v.name])
        ]
        atoms = self._atoms(support_vars, render)
        literals: list[tuple[str, int]] = []
        for text, bdd in atoms:
            literals.append((text, bdd))
            if " == " in text:
                negated = text.replace(" == ", " != ", 1)
            elif " " in text:
                negated = f"!({text})"
            else:
                negated = f"!{text}"
            literals.append((negated, mgr.neg(bdd)))

        def matches(bdd: int) -> bool:
            return mgr.apply("and", bdd, care) == mgr.apply("and", region, care)

        if matches(TRUE):
            return "true"
        for text, bdd in literals:
            if matches(bdd):
                return text
        for i, (t1, b1) in enumerate(literals):
            for t2, b2 in literals[i + 1 :]:
                if matches(mgr.apply("and", b1, b2)):
                    return f"{t1} && {t2}"
        for i, (t1, b1) in enumerate(literals):
            for j, (t2, b2) in enumerate(literals[i + 1 :], start=i + 1):
                for t3, b3 in literals[j + 1 :]:
                    if matches(mgr.conj(b1, b2, b3)):
                        return f"{t1} && {t2} && {t3}"
        return self._bit_level_condition(region, care, render)

    def _bit_level_condition(self, region: int, care: int, render: dict) -> str:
        """Fallback: an irredundant cover rendered cube by cube, using
        equality for fully constrained variables and bit slices otherwise."""
        mgr = self.mgr
        level_to_var: dict[int, tuple[M.VarDecl, int]] = {}
        for v in self.impl.model.vars:
            for i, (cur, _) in enumerate(self.game.varmap.var_bits[v.name]):
                level_to_var[cur] = (v, i)
        cubes = mgr.extract_cover(region, care)
        terms = []
        for cube in cubes:
            per_var: dict[str, dict[int, bool]] = {}
            for lvl, val in cube.items():
                if lvl not in level_to_var:
                    raise CodegenError(
                        "condition depends on control state; cannot express "
                        "it in source terms"
                    )
                v, bit = level_to_var[lvl]
                per_var.setdefault(v.name, {})[bit] = val
            factors = []
            for name, bits in per_var.items():
                v = self.impl.model.var_by_name[name]
                rendered = self._render_var(name, render)
                if isinstance(v.ty, M.BoolType):
                    factors.append(rendered if bits[0] else f"!{rendered}")
                elif len(bits) == v.ty.width:
                    value = sum((1 << b) for b, on in bits.items() if on)
                    if isinstance(v.ty, M.EnumType):
                        factors.append(f"{rendered} == {v.ty.literals[value]}")
                    else:
                        factors.append(f"{rendered} == {value}")
                else:
                    # contiguous runs of constrained bits become slices
                    run = sorted(bits)
                    lo = run[0]
                    for k in range(len(run)):
                        hi = run[k]
                        if k + 1 < len(run) and run[k + 1] == hi + 1:
                            continue
                        value = sum(
                            (1 << (b - lo)) for b in run[: k + 1] if bits[b]
                        )
                        width = hi - lo + 1
                        factors.append(f"{rendered}[{hi}:{lo}] == {value}")
                        run = run[k + 1 :]
                        lo = run[0] if run else 0
            terms.append(" && ".join(factors) if factors else "true")
        if len(terms) == 1:
            return terms[0]
        return " || ".join(f"({t})" for t in terms)

    # ------------------------------------------------------------------
    # statement synthesis

    def synthesize_statement(self, site: int, partition: Partition) -> CodePatch:
        mgr = self.mgr
        _, render = self._site_scope(site)
        calls = [p for p in partition.pieces if p.action.kind == "call"]
        exits = [p for p in partition.pieces if p.action.kind == "exit"]
        calls.sort(key=lambda p: -p.sat_count)
        evidence = [
            {
                "action": p.action.describe(),
                "sat_count": p.sat_count,
                "kind": p.action.kind,
            }
            for p in calls + exits
        ]

        def render_call(piece: PartitionPiece) -> str:
            args = []
            task = self.impl.model.task_by_name[piece.action.task]
            for (kind, value), (pname, pty) in zip(piece.action.args, task.params):
                if kind == "var":
                    args.append(self._render_var(value, render))
                elif isinstance(pty, M.EnumType):
                    args.append(pty.literals[value])
                else:
                    args.append(str(value))
            name = self._render_task(piece.action.task, render)
            return f"{name}({', '.join(args)});"

        if not calls:
            text = ";"
        elif len(calls) == 1 and not exits:
            text = render_call(calls[0])
        else:
            lines = []
            for i, piece in enumerate(calls):
                last_call = i == len(calls) - 1
                if last_call and not exits:
                    lines.append(f"else {render_call(piece)}")
                else:
                    cond = self._synth_condition(piece.region, partition.r_l, render)
                    head = "if" if i == 0 else "else if"
                    lines.append(f"{head} ({cond}) {render_call(piece)}")
            text = "\n".join(lines)
        return CodePatch(site=site, text=text, partitions=evidence, empty=not calls)

    def _render_task(self, name: str, render: dict) -> str:
        parts = tuple(name.split("."))
        owner, leaf = parts[:-1], parts[-1]
        if owner in render:
            prefix = render[owner]
            return f"{prefix}.{leaf}" if prefix else leaf
        raise CodegenError(f"task {name!r} is not callable from the site's template")

    # ------------------------------------------------------------------
    # patching

    def generate(self, site: int) -> tuple[CodePatch, ReachResult]:
        """Steps 2-6 for one site: simulate, validate, partition, render."""
        if site in self.impl.fills and self.impl.fills[site].origin == "user":
            raise CodegenError("the site holds user code; it is read-only")
        reach = self.simulate_reachable(site)
        violation = self.check_winning(reach)
        if violation is not None:
            raise _violation_error(violation)
        partition = self.partition(reach.r_l) if reach.r_l != FALSE else Partition(
            site, FALSE, []
        )
        partition.site = site
        patch = self.synthesize_statement(site, partition)
        self._check_patch_faithful(site, partition, patch)
        return patch, reach

    def _check_patch_faithful(self, site: int, partition: Partition, patch: CodePatch):
        """Re-parse each emitted condition and compare it with its region
        on the reachable set (the emitted-condition faithfulness check)."""
        if patch.empty or partition.r_l == FALSE:
            return
        mgr = self.mgr
        stmt = self._elaborate_fill(site, patch.text)
        calls = [p for p in partition.pieces if p.action.kind == "call"]
        calls.sort(key=lambda p: -p.sat_count)
        node = stmt
        # walk the if/else chain in emission order
        chain: list[tuple[M.Expr | None, M.Stmt]] = []

        def flatten_chain(s: M.Stmt):
            if isinstance(s, M.SSeq) and len(s.stmts) == 1:
                flatten_chain(s.stmts[0])
            elif isinstance(s, M.SIf):
                chain.append((s.cond, s.then))
                if s.els is not None:
                    flatten_chain(s.els)
            else:
                chain.append((None, s))

        flatten_chain(stmt)
        enc = _ExprEncoder(self.game)
        for piece, (cond, _) in zip(calls, chain):
            if cond is None:
                continue
            bdd = enc.encode(cond)
            same = mgr.apply("and", bdd, partition.r_l) == mgr.apply(
                "and", piece.region, partition.r_l
            )
            if not same:
                raise CodegenError(
                    "emitted condition does not match its region on the "
                    "reachable set"
                )

    def _elaborate_fill(self, site: int, text: str) -> M.Stmt:
        return elaborate_fill(self.impl.model, site, text)

    def apply_patch(self, patch: CodePatch, origin: str = "generated") -> None:
        apply_fill(self.impl, patch.site, patch.text, origin)

    # ------------------------------------------------------------------
    # the non-interactive flow

    def auto_generate_all(self) -> list[CodePatch]:
        """Fill every open site; sites whose location is unreachable under
        the current code are retried after others are filled, and sites
        that never become reachable are filled with an empty statement."""
        patches: list[CodePatch] = []
        pending = list(self.impl.open_sites())
        while pending:
            progressed = False
            deferred = []
            for site in pending:
                patch, reach = self.generate(site)
                if reach.r_l == FALSE and not patch.empty:
                    raise AssertionError("non-empty patch for unreachable site")
                if reach.r_l == FALSE:
                    deferred.append(site)
                    continue
                self.apply_patch(patch)
                patches.append(patch)
                progressed = True
            if not progressed:
                for site in deferred:
                    patch = CodePatch(site=site, text=";", partitions=[], empty=True)
                    self.apply_patch(patch)
                    patches.append(patch)
                break
            pending = deferred
        return patches


def _violation_error(v: Violation) -> Exception:
    err = CodegenError(
        "the partial implementation reaches a state outside the winning "
        "region; the attached path replays the failure"
    )
    err.violation = v
    return err


class _ExprEncoder:
    """Encode a model expression over current-state bits (no choices)."""

    def __init__(self, game: SymbolicGame):
        from .encode import _TreeEncoder

        self._enc = _TreeEncoder(game.varmap, "env", None, -1)
        self._store = {
            name: self._enc.ident[name] for name in game.varmap.var_bits
        }

    def encode(self, e: M.Expr) -> int:
        return self._enc.eval_bit(e, self._store, {})


# ----------------------------------------------------------------------
# fills: validation and elaboration


def elaborate_fill(model: M.SpecModel, site: int, text: str) -> M.Stmt:
    """Parse, validate and resolve replacement code for a magic site.

    Replacement statements may only call controllable tasks, branch on
    expressions over variables the template can see, and sequence; this
    keeps every fill expressible inside the uncontrollable relation.
    """
    task_name = model.magic_sites[site].task
    path = tuple(task_name.split(".")[:-1])
    template = model.instance_of[path]
    try:
        stmt = parse_statement(text if text.strip() else ";")
    except SourceError as e:
        raise CompileError(f"fill does not parse: {e.message}", e.pos)
    checker = Checker(model.ast)
    for t in model.ast.templates:
        checker.infos[t.name] = checker._collect(t)
    info = checker.infos[template]
    try:
        _validate_fill(stmt, checker, info)
        checker._check_stmt(stmt, info, params=None, ctx="task")
    except CompileError:
        raise
    except SourceError as e:
        raise CompileError(f"fill does not type-check: {e.message}", e.pos)
    return elaborate_statement(model, path, stmt)


def _validate_fill(stmt: A.StmtAst, checker: Checker, info) -> None:
    from .frontend.check import TaskBinding

    if isinstance(stmt, A.ABlock):
        for s in stmt.stmts:
            _validate_fill(s, checker, info)
    elif isinstance(stmt, A.ASkip):
        pass
    elif isinstance(stmt, A.AIf):
        _reject_nondet(stmt.cond)
        _validate_fill(stmt.then, checker, info)
        if stmt.els is not None:
            _validate_fill(stmt.els, checker, info)
    elif isinstance(stmt, A.ACall):
        binding = checker._resolve_name(stmt.callee, info, None)
        if not isinstance(binding, TaskBinding) or not binding.controllable:
            raise CompileError(
                "fills may only call controllable tasks", stmt.pos
            )
        for a in stmt.args:
            _reject_nondet(a)
    else:
        raise CompileError(
            "fills are calls to controllable tasks, conditionals and "
            "sequencing only",
            stmt.pos,
        )


def _reject_nondet(e: A.ExprAst) -> None:
    if isinstance(e, A.ANondet):
        raise CompileError("'*' is not allowed in fills", e.pos)
    if isinstance(e, A.AUnary):
        _reject_nondet(e.operand)
    elif isinstance(e, A.ABinary):
        _reject_nondet(e.lhs)
        _reject_nondet(e.rhs)


def apply_fill(impl: PartialImpl, site: int, text: str, origin: str) -> None:
    """Install replacement code at a site.

    Generated code may be regenerated; user code is read-only and can
    only be replaced by its author (origin ``user`` again).
    """
    existing = impl.fills.get(site)
    if existing is not None and existing.origin == "user" and origin != "user":
        raise CompileError(
            f"site {site} holds user-provided code; the generator never "
            f"changes it",
            impl.model.magic_sites[site].pos,
        )
    stmt = elaborate_fill(impl.model, site, text)
    # the model must still elaborate with the new fill in place
    fills = impl.fill_stmts()
    fills[site] = stmt
    C.build_cfa(impl.model, fills)
    impl.fills[site] = Fill(site, origin, text, stmt)

