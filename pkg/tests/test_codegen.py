"""Code generation: reachability, partitioning, rendering, patching."""

import itertools
import random

import pytest

from oracles.lockstep import (
    REFERENCE_JUKEBOX_FILLS,
    goal_recurrence,
    run_lockstep_interp,
)

from conftest import compile_spec

from reactsyn import interp
from reactsyn.bdd import FALSE
from reactsyn.cfa import MAGIC, build_cfa, TChoice, walk_tree
from reactsyn.codegen import (
    CodegenError,
    Generator,
    PartialImpl,
    apply_fill,
    elaborate_fill,
)
from reactsyn.diagnostics import CompileError
from reactsyn.encode import cube_to_state, encode_game, state_to_cube
from reactsyn.frontend import model as M
from reactsyn.solver import solve


@pytest.fixture()
def jukebox_gen(jukebox_model, jukebox_game, jukebox_cert):
    return Generator(jukebox_game, jukebox_cert, PartialImpl(jukebox_model))


@pytest.fixture(scope="module")
def small():
    model = compile_spec("jukebox_small.tsl")
    cfas = build_cfa(model)
    game = encode_game(model, cfas)
    return model, cfas, game, solve(game)


# ----------------------------------------------------------------------
# reachability


def explicit_reach(model, cfas):
    """Brute-force reachable states by enumerating every choice valuation."""
    pool_bits = max(c.max_choice_slots for c in cfas.cfas)
    frontier = []
    for free in itertools.product(
        *(
            range(M.type_value_count(v.ty))
            for v in model.vars
            if v.init is None
        )
    ):
        names = [v.name for v in model.vars if v.init is None]
        st = interp.initial_state(model, cfas, dict(zip(names, free)))
        frontier.append(st)
    seen = {s.key(): s for s in frontier}
    while frontier:
        st = frontier.pop()
        for proc in interp.runnable_processes(cfas, st):
            for bits in itertools.product([False, True], repeat=pool_bits):
                fixed = dict(enumerate(bits))
                try:
                    out = interp.env_move(
                        cfas, st, proc, interp.ChoiceSource(fixed=fixed)
                    )
                except ValueError:
                    continue  # enum choice out of range
                k = out.state.key()
                if k not in seen:
                    seen[k] = out.state
                    frontier.append(out.state)
    return seen


def test_reachable_at_selection_site_matches_oracle(small):
    model, cfas, game, cert = small
    gen = Generator(game, cert, PartialImpl(model))
    reach = gen.simulate_reachable(0)
    # oracle: explicit interpreter search restricted to the site
    seen = explicit_reach(model, cfas)
    want = {
        k for k, s in seen.items() if interp.at_site(cfas, s, 0)
    }
    mgr = game.mgr
    got = set()
    # enumerate the symbolic set by exhaustive evaluation over reachable
    # candidates plus spot-check emptiness beyond them
    for k, s in seen.items():
        cube = state_to_cube(game, s)
        for lvl in range(mgr.nvars):
            cube.setdefault(lvl, False)
        if mgr.eval(reach.r_l, cube):
            got.add(k)
    assert got == want
    # spec shape: selection pending, mechanism idle, record free
    sample = cube_to_state(game, mgr.pick_cube(reach.r_l, game.varmap.x_levels))
    assert sample.values["jb.have_selection"] == 1
    assert sample.values["jb.state"] == 0
    sel_values = set()
    for k, s in seen.items():
        if k in want:
            sel_values.add(s.values["jb.selection"])
    assert sel_values == set(range(8))  # unconstrained selection


def test_unreachable_site_is_false(jukebox_gen):
    reach = jukebox_gen.simulate_reachable(1)  # rotation handler: no code yet
    assert reach.r_l == FALSE
    patch, _ = jukebox_gen.generate(1)
    assert patch.empty


def test_reach_full_winning_initially(jukebox_gen):
    reach = jukebox_gen.simulate_reachable(0)
    assert jukebox_gen.check_winning(reach) is None


# ----------------------------------------------------------------------
# violations


def test_unconditional_play_yields_violation(jukebox_model, jukebox_game, jukebox_cert):
    impl = PartialImpl(jukebox_model)
    gen = Generator(jukebox_game, jukebox_cert, impl)
    apply_fill(impl, 0, "jb.cmd_play();", origin="user")
    with pytest.raises(CodegenError) as exc:
        gen.generate(1)
    violation = getattr(exc.value, "violation", None)
    assert violation is not None
    # replay the path in the interpreter: it must reproduce the bad state
    cfas = build_cfa(jukebox_model, impl.fill_stmts())
    first = violation.path[0]["state"]
    state = interp.ConcreteState(
        dict(first["values"]), dict(first["pcs"]), first["err"]
    )
    for hop in violation.path:
        fixed = {int(k): v for k, v in hop["choices"].items()}
        out = interp.env_move(
            cfas, state, hop["process"],
            interp.ChoiceSource(fixed={**{i: False for i in range(16)}, **fixed}),
        )
        state = out.state
    assert state.to_json() == violation.state
    # the failure is the played assertion: the state is the error sink
    assert state.err


def test_violation_cleared_after_removing_bad_fill(
    jukebox_model, jukebox_game, jukebox_cert
):
    impl = PartialImpl(jukebox_model)
    gen = Generator(jukebox_game, jukebox_cert, impl)
    apply_fill(impl, 0, "jb.cmd_play();", origin="user")
    with pytest.raises(CodegenError):
        gen.generate(2)
    apply_fill(impl, 0, REFERENCE_JUKEBOX_FILLS[0], origin="user")
    patch, reach = gen.generate(1)
    assert gen.check_winning(reach) is None


# ----------------------------------------------------------------------
# partitioning


def test_partition_disjoint_and_covering(jukebox_gen):
    reach = jukebox_gen.simulate_reachable(0)
    part = jukebox_gen.partition(reach.r_l)
    mgr = jukebox_gen.mgr
    union = FALSE
    for i, piece in enumerate(part.pieces):
        assert mgr.apply("and", piece.region, mgr.neg(reach.r_l)) == FALSE
        for other in part.pieces[i + 1 :]:
            assert mgr.apply("and", piece.region, other.region) == FALSE
        union = mgr.apply("or", union, piece.region)
    assert union == reach.r_l


def test_selection_partition_matches_published_shape(jukebox_gen):
    patch, _ = jukebox_gen.generate(0)
    calls = [p for p in patch.partitions if p["kind"] == "call"]
    assert len(calls) == 3
    actions = {c["action"].split("(")[0] for c in calls}
    assert actions == {"jb.cmd_rotate", "jb.cmd_lift", "jb.cmd_play"}
    assert "jb.cmd_rotate(jb.selection)" in patch.text
    assert "jb.cmd_rotate(0)" not in patch.text  # no literal explosion


def test_single_state_single_partition(small):
    model, cfas, game, cert = small
    gen = Generator(game, cert, PartialImpl(model))
    reach = gen.simulate_reachable(0)
    mgr = game.mgr
    one = mgr.cube(mgr.pick_cube(reach.r_l, game.varmap.x_levels))
    part = gen.partition(one)
    assert len(part.pieces) == 1


def test_rotated_site_single_bare_call(jukebox_gen):
    patch0, _ = jukebox_gen.generate(0)
    jukebox_gen.apply_patch(patch0)
    patch1, _ = jukebox_gen.generate(1)
    assert patch1.text == "jb.cmd_put();"
    assert len(patch1.partitions) == 1


# ----------------------------------------------------------------------
# patches


def test_apply_patch_then_all_remaining_sites_stay_winning(
    jukebox_model, jukebox_game, jukebox_cert
):
    impl = PartialImpl(jukebox_model)
    gen = Generator(jukebox_game, jukebox_cert, impl)
    filled = []
    while impl.open_sites():
        progressed = False
        for site in list(impl.open_sites()):
            patch, reach = gen.generate(site)
            if reach.r_l == FALSE:
                continue
            gen.apply_patch(patch)
            filled.append(site)
            progressed = True
            # patch soundness: every remaining site still validates
            for other in impl.open_sites():
                r2 = gen.simulate_reachable(other)
                assert gen.check_winning(r2) is None
        if not progressed:
            break
    assert set(filled) == {0, 1, 2, 3}
    # pure auto flow accepts the empty playback suggestion
    assert impl.fills[3].text == ";"


def test_user_fill_is_read_only(jukebox_model, jukebox_game, jukebox_cert):
    impl = PartialImpl(jukebox_model)
    gen = Generator(jukebox_game, jukebox_cert, impl)
    apply_fill(impl, 3, "jb.cmd_lift();", origin="user")
    with pytest.raises((CodegenError, CompileError)):
        gen.generate(3)
    with pytest.raises(CompileError):
        apply_fill(impl, 3, ";", origin="generated")


def test_generated_fill_regenerates(jukebox_gen):
    patch, _ = jukebox_gen.generate(0)
    jukebox_gen.apply_patch(patch)
    again, _ = jukebox_gen.generate(0)
    jukebox_gen.apply_patch(again)
    assert jukebox_gen.impl.fills[0].origin == "generated"
    assert again.text == patch.text  # deterministic regeneration


def test_fill_validation_rules(jukebox_model):
    with pytest.raises(CompileError):
        elaborate_fill(jukebox_model, 0, "jb.state = idle;")  # assignment
    with pytest.raises(CompileError):
        elaborate_fill(jukebox_model, 0, "pause;")
    with pytest.raises(CompileError):
        elaborate_fill(jukebox_model, 0, "evt_rotated();")  # not controllable
    with pytest.raises(CompileError):
        elaborate_fill(jukebox_model, 0, "if (*) jb.cmd_put();")
    with pytest.raises(CompileError):
        elaborate_fill(jukebox_model, 0, "jb.cmd_put(")  # parse error
    elaborate_fill(jukebox_model, 0, "if (jb.arm_down) jb.cmd_lift();")


# ----------------------------------------------------------------------
# the documented interactive flow, end to end


def accepted_flow(model, game, cert):
    """Auto-generate with the one documented manual edit; returns impl."""
    impl = PartialImpl(model)
    gen = Generator(game, cert, impl)
    for site in (0, 1):
        patch, _ = gen.generate(site)
        gen.apply_patch(patch)
    suggestion, _ = gen.generate(3)
    assert suggestion.empty, "the playback handler starts out empty"
    apply_fill(impl, 3, "jb.cmd_lift();", origin="user")
    patch, _ = gen.generate(2)
    gen.apply_patch(patch)
    reach = gen.simulate_reachable(0)
    assert gen.check_winning(reach) is None
    return impl, gen


def test_flow_branch_counts(jukebox_model, jukebox_game, jukebox_cert):
    impl, gen = accepted_flow(jukebox_model, jukebox_game, jukebox_cert)
    texts = {site: impl.fills[site].text for site in range(4)}
    counts = {site: texts[site].count("cmd_") for site in range(4)}
    assert counts == {0: 3, 1: 1, 2: 2, 3: 1}


def test_flow_behaviour_matches_reference(jukebox_model, jukebox_game, jukebox_cert):
    impl, _ = accepted_flow(jukebox_model, jukebox_game, jukebox_cert)
    ref = PartialImpl(jukebox_model)
    for site, text in REFERENCE_JUKEBOX_FILLS.items():
        apply_fill(ref, site, text, origin="user")
    steps = run_lockstep_interp(impl, ref, schedules=300, steps=40, seed=7)
    assert steps > 8000


def test_flow_goal_recurrence(jukebox_model, jukebox_game, jukebox_cert):
    impl, _ = accepted_flow(jukebox_model, jukebox_game, jukebox_cert)
    goal_recurrence(impl, jukebox_game, steps=2000, seed=11)
