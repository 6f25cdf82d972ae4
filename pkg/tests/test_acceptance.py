"""Acceptance criteria.

Each test exercises one acceptance criterion end to end at its stated
tolerance and prints a PASS line; run with ``pytest tests/test_acceptance.py -s``
for the per-criterion report.
"""

import itertools
import random
import time

import pytest

from conftest import compile_spec, spec_path

from oracles.explicit_gr1 import winning_region
from oracles.game_gen import random_game, symbolic_region_to_set, to_symbolic
from oracles.lockstep import (
    REFERENCE_JUKEBOX_FILLS,
    goal_recurrence,
    run_lockstep_c,
    run_lockstep_interp,
)

from test_codegen import accepted_flow

from reactsyn import debugger
from reactsyn.bdd import FALSE, TRUE, Bdd
from reactsyn.c_backend import emit_c
from reactsyn.cfa import build_cfa
from reactsyn.codegen import Generator, PartialImpl, apply_fill
from reactsyn.encode import encode_game
from reactsyn.frontend import SourceSpec, compile_model
from reactsyn.solver import Solver, SpoilingCert, WinningCert, solve, verify_strategy


def report(name: str, detail: str = "") -> None:
    suffix = f"  ({detail})" if detail else ""
    print(f"\nACCEPTANCE PASS: {name}{suffix}")


# ----------------------------------------------------------------------
# 1. jukebox realizability, and unrealizability of the defective variant


def test_criterion_jukebox_realizability(jukebox_cert):
    t0 = time.time()
    model = compile_spec("jukebox.tsl")
    game = encode_game(model, build_cfa(model))
    cert = solve(game)
    good_time = time.time() - t0
    assert isinstance(cert, WinningCert)
    assert good_time < 30.0

    # the defective variant is the published spec with the single
    # assignment removed; regenerate it from the pristine source
    with open(spec_path("jukebox.tsl")) as fh:
        text = fh.read()
    assert text.count("    state = put;\n") == 1
    bug_text = text.replace("    state = put;\n", "")
    with open(spec_path("jukebox_bug.tsl")) as fh:
        assert fh.read() == bug_text, "defective fixture out of sync"
    t0 = time.time()
    bug_model = compile_model(SourceSpec((("jukebox_bug.tsl", bug_text),)))
    bug_game = encode_game(bug_model, build_cfa(bug_model))
    bug_cert = solve(bug_game)
    bug_time = time.time() - t0
    assert isinstance(bug_cert, SpoilingCert)
    assert bug_time < 30.0
    report(
        "jukebox realizability",
        f"realizable in {good_time:.1f}s, defect unrealizable in {bug_time:.1f}s",
    )


# ----------------------------------------------------------------------
# 2. round trip: auto generation + the documented manual edit


def test_criterion_jukebox_round_trip(jukebox_model, jukebox_game, jukebox_cert):
    impl, gen = accepted_flow(jukebox_model, jukebox_game, jukebox_cert)
    # three handlers fully automatic, one manual edit
    origins = {site: impl.fills[site].origin for site in range(4)}
    assert origins == {0: "generated", 1: "generated", 2: "generated", 3: "user"}
    # branch counts 3/1/2/1 across the four handlers
    counts = {s: impl.fills[s].text.count("cmd_") for s in range(4)}
    assert counts == {0: 3, 1: 1, 2: 2, 3: 1}
    # behavioural equivalence with the published implementation:
    # lockstep differential simulation, zero divergences
    ref = PartialImpl(jukebox_model)
    for site, text in REFERENCE_JUKEBOX_FILLS.items():
        apply_fill(ref, site, text, origin="user")
    steps = run_lockstep_interp(impl, ref, schedules=10_000, steps=25, seed=99)
    assert steps > 200_000
    # and symbolically: the certificate model-checks
    assert verify_strategy(jukebox_game, jukebox_cert)["ok"]
    report(
        "jukebox round trip",
        f"branch counts 3/1/2/1; {steps} lockstep steps, zero divergences",
    )


# ----------------------------------------------------------------------
# 3. solver oracle equivalence


def test_criterion_solver_oracle_equivalence():
    rng_master = random.Random(20260809)
    checked = 0
    t0 = time.time()
    population = (
        [(rng_master.randint(2, 6), 2, 2)] * 140
        + [(rng_master.randint(7, 8), 3, 2)] * 50
        + [(rng_master.randint(9, 10), 2, 2)] * 10
    )
    for bits, yu, yc in population:
        rng = random.Random(rng_master.randrange(1 << 30))
        g = random_game(
            rng,
            state_bits=bits,
            yu_bits=yu,
            yc_bits=yc,
            n_goals=rng.randint(1, 3),
            n_fairness=rng.randint(0, 2),
        )
        want = winning_region(g)
        sym = to_symbolic(g)
        w = Solver(sym).winning_region(collect=False)[0]
        got = symbolic_region_to_set(sym, w)
        assert got == want, f"divergence on game {checked} ({bits} bits)"
        checked += 1
    assert checked >= 200
    report(
        "solver oracle equivalence",
        f"{checked} games bit-for-bit in {time.time() - t0:.0f}s",
    )


# ----------------------------------------------------------------------
# 4. the debugger walkthrough, event for event


def test_criterion_debugger_walkthrough(bug_setup):
    _, cfas, game, cert = bug_setup
    session = debugger.start(game, cert)
    # root: arm up, drum at position zero
    root = session.active_state
    assert root.values["jb.arm_down"] == 0 and root.values["jb.position"] == 0
    # engine simulates a request to play record number zero
    r1 = session.env_step()
    assert r1.node.state.values["jb.selection"] == 0
    assert r1.node.state.values["jb.have_selection"] == 1
    proc, loc = session.at_magic()
    assert game.model.magic_sites[loc.site].task == "ctl.evt_selection"
    # the user issues the put command
    r2 = session.user_action("jb.cmd_put()")
    assert r2.violation is None
    # engine loops the forever body without invoking any callback
    session.user_action("exit")
    for _ in range(5):
        r = session.env_step()
        assert session.at_magic() is None
        assert not r.node.state.err
    # single-stepping the command shows no write to the state variable
    session.replay_edge(r2.edge.id)
    kinds = []
    while True:
        ev = session.single_step()
        if ev is None:
            break
        kinds.append(ev.kind)
    assert "write" not in kinds and "check" in kinds
    report(
        "debugger walkthrough",
        "record 0 selected, cmd_put absorbed, loop starves the goal",
    )


# ----------------------------------------------------------------------
# 5. code generation soundness properties


def test_criterion_codegen_soundness(jukebox_model, jukebox_game, jukebox_cert):
    mgr = jukebox_game.mgr
    impl = PartialImpl(jukebox_model)
    gen = Generator(jukebox_game, jukebox_cert, impl)
    patches = 0
    pending = [0, 1, 3, 2]
    while pending:
        progressed = False
        for site in list(pending):
            patch, reach = gen.generate(site)
            if reach.r_l == FALSE:
                continue
            part = gen.partition(reach.r_l)
            # partition disjointness and coverage
            union = FALSE
            for i, piece in enumerate(part.pieces):
                for other in part.pieces[i + 1 :]:
                    assert mgr.apply("and", piece.region, other.region) == FALSE
                union = mgr.apply("or", union, piece.region)
            assert union == reach.r_l
            # emitted-condition faithfulness is asserted inside generate();
            # apply and re-validate every other open site
            gen.apply_patch(patch)
            patches += 1
            pending.remove(site)
            progressed = True
            for other in pending:
                r2 = gen.simulate_reachable(other)
                assert gen.check_winning(r2) is None
        if not progressed:
            break
    assert patches == 4 and not impl.open_sites()
    # end-to-end: the emitted C agrees with the model on random schedules
    mod = emit_c(impl, "accept_ctl")
    compared = run_lockstep_c(impl, mod, schedules=1000, steps=30, seed=17)
    assert compared > 15_000
    goal_recurrence(impl, jukebox_game, steps=10_000, seed=23)
    report(
        "codegen soundness",
        f"4 patches validated; {compared} C handler calls in lockstep",
    )


# ----------------------------------------------------------------------
# 6. BDD engine: canonicity and algebraic identities


def test_criterion_bdd_engine():
    mgr = Bdd()
    for i in range(5):
        mgr.add_var(f"x{i}")
    rng = random.Random(5150)

    def rand_formula(depth):
        if depth == 0 or rng.random() < 0.25:
            return ("v", rng.randrange(5))
        op = rng.choice(["and", "or", "xor", "not"])
        if op == "not":
            return (op, rand_formula(depth - 1))
        return (op, rand_formula(depth - 1), rand_formula(depth - 1))

    def build(f):
        if f[0] == "v":
            return mgr.var(f[1])
        if f[0] == "not":
            return mgr.neg(build(f[1]))
        return mgr.apply(f[0], build(f[1]), build(f[2]))

    def truth(f, env):
        if f[0] == "v":
            return env[f[1]]
        if f[0] == "not":
            return not truth(f[1], env)
        a, b = truth(f[1], env), truth(f[2], env)
        return {"and": a and b, "or": a or b, "xor": a != b}[f[0]]

    # canonicity, exhaustive over all 2^5 assignments per formula pair
    formulas = [rand_formula(4) for _ in range(150)]
    nodes = [build(f) for f in formulas]
    tables = [
        tuple(truth(f, env) for env in itertools.product([False, True], repeat=5))
        for f in formulas
    ]
    pairs = 0
    for i in range(len(formulas)):
        for j in range(i + 1, len(formulas)):
            assert (nodes[i] == nodes[j]) == (tables[i] == tables[j])
            pairs += 1
    mgr.check_integrity()

    # algebraic identities, ten thousand randomised trials
    trials = 0
    for _ in range(10_000):
        a, b, c = (build(rand_formula(3)) for _ in range(3))
        assert mgr.neg(mgr.apply("and", a, b)) == mgr.apply(
            "or", mgr.neg(a), mgr.neg(b)
        )
        assert mgr.apply("and", a, mgr.apply("or", b, c)) == mgr.apply(
            "or", mgr.apply("and", a, b), mgr.apply("and", a, c)
        )
        vs = [rng.randrange(5)]
        assert mgr.forall(vs, a) == mgr.neg(mgr.exists(vs, mgr.neg(a)))
        trials += 1
    report("bdd engine", f"{pairs} canonicity pairs, {trials} identity trials")


# ----------------------------------------------------------------------
# 7. what is explicitly out of reach


def test_criterion_case_study_substitution():
    """The published driver case studies (timings, sizes, automation
    percentages) are not reproducible: their specifications are not
    available.  The running example plus randomly generated games stand
    in; the round-trip criterion covers the '3 of 4 handlers automatic,
    one manual edit' substitute."""
    assert compile_spec("jukebox.tsl") is not None
    report(
        "case-study substitution",
        "device-driver table not reproducible; jukebox + random games substitute",
    )
