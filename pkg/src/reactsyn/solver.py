"""Symbolic game solving: winning region, strategy, counterstrategy.

The winning region is the Piterman-Pnueli-Sa'ar triple fixpoint

    W = nu Z. AND_i  mu Y. OR_j  nu X.
            escape  |  cpre_deny_j(X, escape)
    with escape = (goal_i & cpre(Z)) | cpre(Y)

adapted to turn-based ownership and move-based fairness: the
controllable predecessor lets the state's owner move, and the
fairness-denying predecessor applies only to environment-owned states
(a controller move never discharges a fairness obligation, so it can
never deny one either); an environment move that does credit the
condition is tolerated only if it lands in the escape set, i.e. makes
progress for the controller.

A play is judged fair when every fairness condition holds on infinitely
many environment moves, or when the environment moves only finitely
often; the controller wins a play iff it is unfair or every goal region
recurs.  The explicit-state oracle in the test suite implements the same
judgement by enumeration.

The mu-iterates ("onion rings") are retained per goal: strategy
extraction, its verification and code generation all consume them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .bdd import FALSE, TRUE
from .encode import SymbolicGame


class VerificationFailure(Exception):
    """A certificate failed model checking; carries a violating witness."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


@dataclass
class SolveStats:
    realizable: bool
    z_iterations: int = 0
    y_iterations: int = 0
    x_iterations: int = 0
    cpre_calls: int = 0
    peak_nodes: int = 0
    wall_time_s: float = 0.0

    def to_json(self) -> dict:
        return {
            "realizable": self.realizable,
            "z_iterations": self.z_iterations,
            "y_iterations": self.y_iterations,
            "x_iterations": self.x_iterations,
            "cpre_calls": self.cpre_calls,
            "peak_nodes": self.peak_nodes,
            "wall_time_s": round(self.wall_time_s, 3),
        }


@dataclass
class WinningCert:
    winning: int  # W over X
    rings: list[list[int]]  # per goal: FALSE = Y_0 < Y_1 < ... < Y_K
    xsets: list[list[list[int]]]  # per goal, per ring r>=1: X-set per fairness j
    strategy: list[int]  # per goal: move relation over (X, Yc)
    stats: SolveStats


@dataclass
class SpoilingCert:
    w_env: int  # losing states reachable from a losing initial state
    counter_moves: int  # over (X, Yu): stay inside the losing region
    traps: list[int]  # per goal: env can hold the play outside the goal
    attractor_rings: list[list[int]]  # per goal: onion to the trap
    stats: SolveStats


class Solver:
    def __init__(self, game: SymbolicGame):
        self.game = game
        self.mgr = game.mgr
        vm = game.varmap
        self._q_yc_xp = vm.yc_levels + vm.xp_levels
        self._q_yu_xp = vm.yu_levels + vm.xp_levels
        self._q_xp = list(vm.xp_levels)
        self._q_yu = list(vm.yu_levels)
        self._q_yc = list(vm.yc_levels)
        self._du = [rel for _, rel in game.du_parts]
        self._stats = SolveStats(realizable=False)

    # -- predecessor operators -------------------------------------------

    def cpre(self, s: int) -> int:
        """States whose owner can force the next state into ``s``."""
        self._stats.cpre_calls += 1
        mgr = self.mgr
        sp = mgr.swap_prime(s)
        ctrl = mgr.apply(
            "and",
            self.game.controller_turn,
            mgr.and_exists(self._q_yc_xp, self.game.delta_c, sp),
        )
        bad = mgr.neg(sp)
        escape = FALSE
        for rel in self._du:
            escape = mgr.apply("or", escape, mgr.and_exists(self._q_yu_xp, rel, bad))
        env = mgr.conj(
            mgr.neg(self.game.controller_turn),
            mgr.neg(escape),
        )
        self._note_peak()
        return mgr.apply("or", ctrl, env)

    def cpre_deny(self, s: int, phi: int, escape: int) -> int:
        """Environment-owned states whose every move either denies the
        fairness condition while staying in ``s``, or lands in the escape
        set (the states already known to make progress).

        A play that stays outside the escape set forever therefore never
        credits the condition: it is unfair and the controller wins it.
        """
        self._stats.cpre_calls += 1
        mgr = self.mgr
        sp = mgr.swap_prime(s)
        ep = mgr.swap_prime(escape)
        ok = mgr.apply("or", mgr.apply("and", mgr.neg(phi), sp), ep)
        bad = mgr.neg(ok)
        leak = FALSE
        for rel in self._du:
            leak = mgr.apply("or", leak, mgr.and_exists(self._q_yu_xp, rel, bad))
        self._note_peak()
        return mgr.conj(mgr.neg(self.game.controller_turn), mgr.neg(leak))

    def epre(self, s: int) -> int:
        """States from which the environment can force the next state
        into ``s`` (its own choice at its states, all controller moves
        at controller states)."""
        mgr = self.mgr
        sp = mgr.swap_prime(s)
        env = mgr.conj(
            mgr.neg(self.game.controller_turn),
            mgr.and_exists(self._q_yu_xp, self.game.delta_u, sp),
        )
        ctrl = mgr.conj(
            self.game.controller_turn,
            mgr.neg(
                mgr.and_exists(self._q_yc_xp, self.game.delta_c, mgr.neg(sp))
            ),
        )
        return mgr.apply("or", env, ctrl)

    def ctrl_moves_to(self, s: int) -> int:
        """Move relation over (X, Yc): controller moves whose unique
        successor lies in ``s``."""
        mgr = self.mgr
        sp = mgr.swap_prime(s)
        any_move = mgr.exists(self._q_xp, self.game.delta_c)
        bad = mgr.and_exists(self._q_xp, self.game.delta_c, mgr.neg(sp))
        return mgr.apply("and", any_move, mgr.neg(bad))

    def env_moves_to(self, s: int) -> int:
        """Move relation over (X, Yu): environment moves landing in ``s``."""
        mgr = self.mgr
        sp = mgr.swap_prime(s)
        return mgr.and_exists(self._q_xp, self.game.delta_u, sp)

    def _note_peak(self) -> None:
        n = len(self.mgr)
        if n > self._stats.peak_nodes:
            self._stats.peak_nodes = n

    # -- the fixpoint -------------------------------------------------------

    def winning_region(self, collect: bool = True):
        """Compute W and, optionally, the rings justifying it."""
        mgr = self.mgr
        game = self.game
        z = TRUE
        while True:
            self._stats.z_iterations += 1
            z_new = TRUE
            for goal in game.goals:
                y_inf = self._mu_y(goal, z, collect=False)[0]
                z_new = mgr.apply("and", z_new, y_inf)
            assert mgr.apply("and", z_new, mgr.neg(z)) == FALSE, (
                "Z iterates must be non-increasing"
            )
            if z_new == z:
                break
            z = z_new
        rings: list[list[int]] = []
        xsets: list[list[list[int]]] = []
        if collect:
            for goal in game.goals:
                _, r, xs = self._mu_y(goal, z, collect=True)
                rings.append(r)
                xsets.append(xs)
        return z, rings, xsets

    def _mu_y(self, goal: int, z: int, collect: bool):
        mgr = self.mgr
        base = mgr.apply("and", goal, self.cpre(z))
        y = FALSE
        rings = [FALSE]
        xsets: list[list[int]] = []
        while True:
            self._stats.y_iterations += 1
            target = mgr.apply("or", base, self.cpre(y))
            y_new = FALSE
            x_per_j: list[int] = []
            for phi in self.game.fairness:
                x = z  # nu X within Z: starting above the fixpoint is sound
                while True:
                    self._stats.x_iterations += 1
                    x_new = mgr.apply("or", target, self.cpre_deny(x, phi, target))
                    x_new = mgr.apply("and", x_new, x)
                    if x_new == x:
                        break
                    x = x_new
                x_per_j.append(x)
                y_new = mgr.apply("or", y_new, x)
            assert mgr.apply("and", y, mgr.neg(y_new)) == FALSE, (
                "Y iterates must be non-decreasing"
            )
            if y_new == y:
                break
            y = y_new
            if collect:
                rings.append(y)
                xsets.append(x_per_j)
        return y, rings, xsets


def solve(game: SymbolicGame):
    """Solve the game: a winning certificate when every initial state is
    winning, else a spoiling certificate for the environment."""
    solver = Solver(game)
    t0 = time.time()
    w, rings, xsets = solver.winning_region(collect=True)
    mgr = game.mgr
    losing_initial = mgr.apply("and", game.init, mgr.neg(w))
    realizable = losing_initial == FALSE
    solver._stats.realizable = realizable
    if realizable:
        strategy = [
            _extract_strategy(solver, w, goal, rings[i])
            for i, goal in enumerate(game.goals)
        ]
        solver._stats.wall_time_s = time.time() - t0
        return WinningCert(w, rings, xsets, strategy, solver._stats)
    cert = _extract_counterstrategy(solver, w)
    solver._stats.wall_time_s = time.time() - t0
    cert.stats = solver._stats
    return cert


def _extract_strategy(solver: Solver, w: int, goal: int, rings: list[int]) -> int:
    """Goal moves stay in W; ring moves descend strictly."""
    mgr = solver.mgr
    rho = mgr.conj(goal, w, solver.ctrl_moves_to(w))
    for r in range(2, len(rings)):
        stratum = mgr.conj(w, rings[r], mgr.neg(rings[r - 1]))
        rho = mgr.apply(
            "or", rho, mgr.apply("and", stratum, solver.ctrl_moves_to(rings[r - 1]))
        )
    return rho


def verify_strategy(game: SymbolicGame, cert: WinningCert) -> dict:
    """Model-check a winning certificate.

    Confirms the strategy only uses enabled moves, covers every
    controller-owned winning state, keeps the play inside W, and that
    every move strictly descends the goal's rings or sits in the goal
    region; environment moves may alternatively hold the play inside a
    fairness-denying X-set.  Raises `VerificationFailure` with a witness
    otherwise.
    """
    solver = Solver(game)
    mgr = game.mgr
    w = cert.winning
    vm = game.varmap

    def witness(rel: int, scope) -> dict:
        cube = mgr.pick_cube(rel, scope)
        return {mgr.var_name(l): v for l, v in sorted(cube.items())} if cube else {}

    if mgr.apply("and", w, game.error_states) != FALSE:
        raise VerificationFailure("winning region intersects error states")

    # environment closure of W
    bad = mgr.conj(game.delta_u, w, mgr.neg(game.controller_turn),
                   mgr.neg(mgr.swap_prime(w)))
    if bad != FALSE:
        raise VerificationFailure(
            "environment can leave W", witness(bad, vm.x_levels + vm.yu_levels)
        )

    report = {"goals": []}
    enabled = mgr.exists(solver._q_xp, game.delta_c)
    for i, rho in enumerate(cert.strategy):
        goal = game.goals[i]
        rings = cert.rings[i]
        stray = mgr.apply("and", rho, mgr.neg(enabled))
        if stray != FALSE:
            raise VerificationFailure(
                f"strategy {i} uses a move outside the controllable relation",
                witness(stray, vm.x_levels + vm.yc_levels),
            )
        uncovered = mgr.conj(
            game.controller_turn, w, mgr.neg(mgr.exists(vm.yc_levels, rho))
        )
        if uncovered != FALSE:
            raise VerificationFailure(
                f"strategy {i} has no move at a winning controller state",
                witness(uncovered, vm.x_levels),
            )
        # controller closure
        bad = mgr.conj(game.delta_c, rho, w, mgr.neg(mgr.swap_prime(w)))
        if bad != FALSE:
            raise VerificationFailure(
                f"strategy {i} can leave W",
                witness(bad, vm.x_levels + vm.yc_levels),
            )
        # strict ring descent for strategy moves away from the goal
        for r in range(2, len(rings)):
            stratum = mgr.conj(w, rings[r], mgr.neg(rings[r - 1]))
            bad = mgr.conj(
                game.delta_c,
                rho,
                stratum,
                mgr.neg(goal),
                mgr.neg(mgr.swap_prime(rings[r - 1])),
            )
            if bad != FALSE:
                raise VerificationFailure(
                    f"strategy {i} fails to descend from ring {r}",
                    witness(bad, vm.x_levels + vm.yc_levels),
                )
        # environment measure: every move descends a ring, reaches the
        # escape set of its ring, or denies some fairness condition while
        # staying inside that condition's X-set
        for r in range(1, len(rings)):
            stratum = mgr.conj(
                w,
                rings[r],
                mgr.neg(rings[r - 1]),
                mgr.neg(game.controller_turn),
                mgr.neg(goal),
            )
            if stratum == FALSE:
                continue
            escape = mgr.apply(
                "or",
                mgr.apply("and", goal, solver.cpre(w)),
                solver.cpre(rings[r - 1]),
            )
            allowed = mgr.swap_prime(mgr.apply("or", rings[r - 1], escape))
            xs = cert.xsets[i][r - 1] if r - 1 < len(cert.xsets[i]) else []
            for j, xset in enumerate(xs):
                stay = mgr.conj(
                    xset,
                    mgr.neg(game.fairness[j]),
                    mgr.swap_prime(xset),
                )
                allowed = mgr.apply("or", allowed, stay)
            bad = mgr.conj(game.delta_u, stratum, mgr.neg(allowed))
            if bad != FALSE:
                raise VerificationFailure(
                    f"environment escapes the ring measure at ring {r} of "
                    f"goal {i}",
                    witness(bad, vm.x_levels + vm.yu_levels),
                )
        report["goals"].append({"rings": len(rings) - 1})
    report["ok"] = True
    return report


def _extract_counterstrategy(solver: Solver, w: int) -> SpoilingCert:
    """Moves that keep the play losing, plus goal-starvation guidance.

    For each goal the environment owns a trap (stay outside the goal
    forever, within the losing region) and an attractor onion towards it;
    the debugger walks rings downward and schedules processes round-robin
    among the moves this relation allows.
    """
    mgr = solver.mgr
    game = solver.game
    not_w = mgr.neg(w)
    # losing states reachable from a losing initial state when both
    # players keep the play losing (the controller cannot leave anyway)
    q_u = solver._q_yu + list(game.varmap.x_levels)
    q_c = solver._q_yc + list(game.varmap.x_levels)
    reach = mgr.apply("and", game.init, not_w)
    while True:
        img_u = mgr.and_exists(q_u, game.delta_u, reach)
        img_c = mgr.and_exists(q_c, game.delta_c, reach)
        img = mgr.swap_prime(mgr.apply("or", img_u, img_c))
        img = mgr.apply("and", img, not_w)
        new = mgr.apply("or", reach, img)
        if new == reach:
            break
        reach = new
    counter = mgr.conj(solver.env_moves_to(not_w), not_w, reach)
    traps: list[int] = []
    attractors: list[list[int]] = []
    for goal in game.goals:
        safe = mgr.conj(mgr.neg(goal), not_w)
        trap = safe
        while True:
            nxt = mgr.apply("and", safe, solver.epre(trap))
            if nxt == trap:
                break
            trap = nxt
        rings = [trap]
        att = trap
        while True:
            nxt = mgr.apply("or", att, mgr.apply("and", not_w, solver.epre(att)))
            if nxt == att:
                break
            att = nxt
            rings.append(att)
        traps.append(trap)
        attractors.append(rings)
    return SpoilingCert(reach, counter, traps, attractors, solver._stats)
