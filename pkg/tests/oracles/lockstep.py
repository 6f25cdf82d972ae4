"""Lockstep drivers: interpreter vs interpreter, interpreter vs C.

Shared by the code-generation tests and the acceptance suite.
"""

from __future__ import annotations

import os
import random
import subprocess
import tempfile

from reactsyn import interp
from reactsyn.c_backend import CModule, emit_test_harness
from reactsyn.cfa import CfaSet, build_cfa
from reactsyn.frontend import model as M

# Handler bodies behaviourally matching the published implementation of
# the jukebox controller, written as magic-block fills.
REFERENCE_JUKEBOX_FILLS = {
    0: (
        "if (jb.position == jb.selection && jb.arm_down) jb.cmd_play(); "
        "else if (jb.arm_down) jb.cmd_lift(); "
        "else jb.cmd_rotate(jb.selection);"
    ),
    1: "jb.cmd_put();",
    2: (
        "if (jb.have_selection) { "
        "if (jb.arm_down) jb.cmd_play(); else jb.cmd_rotate(jb.selection); };"
    ),
    3: "jb.cmd_lift();",
}


def closed_cfaset(impl) -> CfaSet:
    assert not impl.open_sites(), "lockstep needs a closed implementation"
    return build_cfa(impl.model, impl.fill_stmts())


def run_lockstep_interp(impl_a, impl_b, schedules: int, steps: int, seed: int) -> int:
    """Drive two closed implementations under identical environment
    choices; their full variable states must agree after every step.
    Returns the number of compared steps."""
    model = impl_a.model
    cfas_a = closed_cfaset(impl_a)
    cfas_b = closed_cfaset(impl_b)
    compared = 0
    for s in range(schedules):
        seed_rng = random.Random((seed, s).__hash__())
        free = {
            v.name: seed_rng.randrange(M.type_value_count(v.ty))
            for v in model.vars
            if v.init is None
        }
        st_a = interp.initial_state(model, cfas_a, free)
        st_b = interp.initial_state(model, cfas_b, free)
        rng_a = random.Random((seed, s, "x").__hash__())
        rng_b = random.Random((seed, s, "x").__hash__())
        for _ in range(steps):
            pa = interp.runnable_processes(cfas_a, st_a)
            pb = interp.runnable_processes(cfas_b, st_b)
            assert pa == pb
            if not pa:
                st_a = interp.env_stutter(st_a).state
                st_b = interp.env_stutter(st_b).state
                continue
            pick = rng_a.randrange(len(pa))
            rng_b.randrange(len(pb))
            out_a = interp.env_move(
                cfas_a, st_a, pa[pick], interp.ChoiceSource(rng=rng_a)
            )
            out_b = interp.env_move(
                cfas_b, st_b, pb[pick], interp.ChoiceSource(rng=rng_b)
            )
            st_a, st_b = out_a.state, out_b.state
            assert st_a.err == st_b.err
            assert st_a.values == st_b.values, (
                f"divergence at schedule {s}: {st_a.values} vs {st_b.values}"
            )
            compared += 1
    return compared


class CHarness:
    """A compiled controller module behind the line protocol."""

    def __init__(self, mod: CModule, workdir: str | None = None):
        self.mod = mod
        self.dir = workdir or tempfile.mkdtemp(prefix="cmod-")
        with open(os.path.join(self.dir, f"{mod.name}.h"), "w") as fh:
            fh.write(mod.header)
        with open(os.path.join(self.dir, f"{mod.name}.c"), "w") as fh:
            fh.write(mod.source)
        with open(os.path.join(self.dir, "harness.c"), "w") as fh:
            fh.write(emit_test_harness(mod))
        subprocess.run(
            [
                "gcc", "-std=c99", "-Wall", "-Wextra", "-Werror",
                f"{mod.name}.c", "harness.c", "-o", "sim",
            ],
            cwd=self.dir,
            check=True,
            capture_output=True,
        )
        self.proc = subprocess.Popen(
            [os.path.join(self.dir, "sim")],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )

    def call(self, handler_leaf: str, env_values: dict[str, int]) -> list[tuple[str, list[int]]]:
        vals = " ".join(
            str(env_values[qual]) for _, qual, _ in self.mod.env_fields
        )
        self.proc.stdin.write(f"CALL {handler_leaf} {vals}\n")
        self.proc.stdin.flush()
        out = []
        while True:
            line = self.proc.stdout.readline()
            if not line:
                raise RuntimeError("harness died")
            line = line.strip()
            if line == "OK":
                return out
            parts = line.split()
            assert parts[0] == "CB"
            out.append((parts[1], [int(x) for x in parts[2:]]))

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)


def scan_decisions(model, src_state, events, handlers: set[str]):
    """(handler leaf, env snapshot, callback decisions) groups of a move.

    Snapshots are the variable values at the moment each handler was
    entered; decisions are the controllable calls its body then issued,
    with their argument values."""
    values = dict(src_state.values)
    groups = []
    current = None  # [handler leaf, snapshot, decisions]
    pending = None  # (task leaf, [args]) of a controllable call being read
    controllable = {t.name for t in model.tasks if t.controllable}
    n_params = {
        t.name: len(t.params) for t in model.tasks if t.controllable
    }
    for ev in events:
        if ev.kind == "enter":
            task = ev.detail["task"]
            if task in handlers:
                if current is not None:
                    groups.append(tuple(current))
                current = [task.split(".")[-1], dict(values), []]
                pending = None
            elif task in controllable:
                assert pending is None, "overlapping controllable calls"
                leaf = task.split(".")[-1]
                if n_params[task] == 0:
                    if current is not None:
                        current[2].append((leaf, []))
                else:
                    pending = [leaf, [], n_params[task]]
        elif ev.kind == "bind" and pending is not None:
            pending[1].append(ev.detail["value"])
            if len(pending[1]) == pending[2]:
                if current is not None:
                    current[2].append((pending[0], list(pending[1])))
                pending = None
        elif ev.kind == "write":
            values[ev.detail["var"]] = ev.detail["new"]
    if current is not None:
        groups.append(tuple(current))
    return groups


def run_lockstep_c(impl, mod: CModule, schedules: int, steps: int, seed: int) -> int:
    """Drive the interpreter and the C module in lockstep.

    For every handler invocation along random fair schedules, the C
    handler receives the interpreter's environment snapshot and must
    issue exactly the callbacks the interpreter's inlined fill issued.
    Returns the number of compared handler invocations.
    """
    model = impl.model
    cfas = closed_cfaset(impl)
    handlers = {qual for _, qual in mod.handlers}
    harness = CHarness(mod)
    compared = 0
    try:
        for s in range(schedules):
            rng = random.Random((seed, s).__hash__())
            free = {
                v.name: rng.randrange(M.type_value_count(v.ty))
                for v in model.vars
                if v.init is None
            }
            state = interp.initial_state(model, cfas, free)
            for _ in range(steps):
                procs = interp.runnable_processes(cfas, state)
                if not procs:
                    break
                proc = procs[rng.randrange(len(procs))]
                out = interp.env_move(
                    cfas, state, proc, interp.ChoiceSource(rng=rng)
                )
                for leaf, snapshot, decisions in scan_decisions(
                    model, state, out.events, handlers
                ):
                    got = harness.call(leaf, snapshot)
                    want = [(cb, list(args)) for cb, args in decisions]
                    assert got == want, (
                        f"C module diverged in {leaf}: got {got}, want {want} "
                        f"(snapshot {snapshot})"
                    )
                    compared += 1
                state = out.state
                if state.err:
                    break
    finally:
        harness.close()
    return compared


def goal_recurrence(impl, game, steps: int, seed: int, window: int = 64) -> None:
    """A random fair run of a closed implementation must keep revisiting
    the goal region: the gap between visits stays under the window."""
    model = impl.model
    cfas = closed_cfaset(impl)
    rng = random.Random(seed)
    state = interp.initial_state(
        model,
        cfas,
        {v.name: rng.randrange(M.type_value_count(v.ty)) for v in model.vars if v.init is None},
    )
    mgr = game.mgr
    from reactsyn.encode import state_to_cube

    gap = 0
    for _ in range(steps):
        procs = interp.runnable_processes(cfas, state)
        assert procs, "closed jukebox never deadlocks"
        state = interp.env_move(
            cfas, state, rng.choice(procs), interp.ChoiceSource(rng=rng)
        ).state
        assert not state.err, "closed implementation must stay assertion-safe"
        cube = state_to_cube(game, state)
        for lvl in range(mgr.nvars):
            cube.setdefault(lvl, False)
        if mgr.eval(game.goals[0], cube):
            gap = 0
        else:
            gap += 1
            assert gap < window, f"goal region starved for {window} steps"
