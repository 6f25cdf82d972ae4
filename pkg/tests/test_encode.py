"""Game encoding: variable allocation, transition soundness, framing."""

import random

import pytest

from conftest import compile_text

from reactsyn import interp
from reactsyn.bdd import FALSE, TRUE
from reactsyn.cfa import build_cfa
from reactsyn.diagnostics import WidthError
from reactsyn.encode import (
    encode_env_move,
    encode_ctrl_move,
    encode_game,
    encode_vars,
    game_stats,
    state_to_cube,
)
from reactsyn.frontend import model as M


def full_assignment(game, state, move_bits, next_state):
    """Total level->bool map for (state, move, successor)."""
    vm = game.varmap
    asg = state_to_cube(game, state)
    asg.update(move_bits)
    for name, bits in vm.var_bits.items():
        for i, (_, nxt) in enumerate(bits):
            asg[nxt] = bool((next_state.values[name] >> i) & 1)
    for proc, bits in vm.pc_bits.items():
        for i, (_, nxt) in enumerate(bits):
            asg[nxt] = bool((next_state.pcs[proc] >> i) & 1)
    asg[vm.err_bit[1]] = next_state.err
    for lvl in range(game.mgr.nvars):
        asg.setdefault(lvl, False)
    return asg


def choice_bits_of(game, outcome):
    bits = {i: False for i in range(len(game.varmap.yu_choice))}
    for ev in outcome.events:
        if ev.kind == "choice":
            off, val = ev.detail["offset"], ev.detail["value"]
            i = 0
            # spread little-endian over the bits the read consumed
            width = 0
            # retrieve width from the recorded value and the pool layout:
            # widths are not in the event, so re-derive from the value and
            # following reads; instead events carry offsets, and reads
            # never overlap, so writing value bits upward is safe
            while (val >> width) or width == 0:
                width += 1
                if width > 64:
                    break
            for i in range(width):
                bits[off + i] = bool((val >> i) & 1)
    return bits


def random_state(model, cfas, rng):
    values = {
        v.name: rng.randrange(M.type_value_count(v.ty)) for v in model.vars
    }
    pcs = {c.owner: rng.randrange(len(c.locations)) for c in cfas.cfas}
    return interp.ConcreteState(values, pcs, False)


# ----------------------------------------------------------------------
# variable allocation


def test_jukebox_bit_counts(jukebox_game):
    vm = jukebox_game.varmap
    # enum(5) -> 3 bits, two bools, two uint8s
    assert vm.state_bit_count == 3 + 1 + 8 + 1 + 8 == 21
    assert vm.pc_bit_count == 3  # six locations
    assert len(vm.yu_sched) == 0  # single process
    assert len(vm.yu_choice) == 9  # if (*) plus an 8-bit selection
    assert len(vm.yc_sel) == 3  # exit + four tasks
    assert sum(len(l) for ls in vm.yc_args.values() for l in ls) == 8


def test_single_bool_var_is_one_bit():
    m = compile_text("template main bool b; process p { pause; }; endtemplate")
    cfas = build_cfa(m)
    vm = encode_vars(m, cfas)
    assert len(vm.var_bits["b"]) == 1


def test_two_value_enum_is_one_bit():
    m = compile_text(
        """
template main
  typedef enum {off, on} t;
  t v = off;
  process p { pause; };
endtemplate
"""
    )
    vm = encode_vars(m, build_cfa(m))
    assert len(vm.var_bits["v"]) == 1


def test_width_error_past_64():
    m = compile_text("template main uint64 v; process p { pause; }; endtemplate")
    m.vars[0].ty = M.UIntType(65)  # bypass the frontend cap to hit the guard
    with pytest.raises(WidthError):
        encode_vars(m, build_cfa(m))


def test_interleaved_order(jukebox_game):
    vm = jukebox_game.varmap
    for bits in list(vm.var_bits.values()) + list(vm.pc_bits.values()):
        for cur, nxt in bits:
            assert nxt == cur + 1
    # controllable action bits come last
    assert min(vm.yc_levels, default=0) > max(vm.x_levels + vm.xp_levels)


# ----------------------------------------------------------------------
# specific transitions from the running example


def find_magic_state(model, cfas, game, site, **values):
    proc, loc = cfas.site_locations[site]
    st = interp.initial_state(model, cfas, {})
    st.pcs[proc] = loc
    st.values.update({f"jb.{k}": v for k, v in values.items()})
    return st


def test_spin_completion_forces_idle_and_rotated_magic(
    jukebox_model, jukebox_cfas, jukebox_game
):
    # schedule the process in state spin: the mechanism returns to idle
    # and stops inside the rotation handler
    game = jukebox_game
    mgr = game.mgr
    spin = 1
    st = interp.initial_state(jukebox_model, jukebox_cfas, {})
    st.values["jb.state"] = spin
    st.values["jb.have_selection"] = 1  # selection branch disabled
    st.pcs["jb.pjukebox"] = 5  # the loop pause
    out = interp.env_move(
        jukebox_cfas, st, "jb.pjukebox", interp.ChoiceSource(fixed={})
    )
    assert out.state.values["jb.state"] == 0
    rot_proc, rot_loc = jukebox_cfas.site_locations[1]
    assert out.state.pcs[rot_proc] == rot_loc
    move = encode_env_move(game, "jb.pjukebox", choice_bits_of(game, out))
    asg = full_assignment(game, st, move, out.state)
    assert mgr.eval(game.delta_u, asg)


def test_cmd_play_with_wrong_position_hits_error(
    jukebox_model, jukebox_cfas, jukebox_game
):
    game = jukebox_game
    st = find_magic_state(
        jukebox_model,
        jukebox_cfas,
        game,
        site=0,
        state=0,
        arm_down=1,
        have_selection=1,
        position=3,
        selection=4,
    )
    out = interp.ctrl_call(jukebox_cfas, st, "jb.cmd_play", [])
    assert out.state.err and out.failed_at is not None
    move = encode_ctrl_move(game, "jb.cmd_play", [])
    asg = full_assignment(game, st, move, out.state)
    assert game.mgr.eval(game.delta_c, asg)
    # and the encoder agrees the assertion-respecting variant is absent
    good = out.state.copy()
    good.err = False
    good.values["jb.state"] = 3
    asg2 = full_assignment(game, st, move, good)
    assert not game.mgr.eval(game.delta_c, asg2)


def test_noop_process_frames_data_vars():
    m = compile_text(
        """
template main
  uint4 v;
  bool b = true;
  process p { forever { pause; }; };
endtemplate
"""
    )
    cfas = build_cfa(m)
    game = encode_game(m, cfas)
    mgr = game.mgr
    rng = random.Random(0)
    for _ in range(50):
        st = random_state(m, cfas, rng)
        st.pcs["p"] = rng.randrange(2)
        out = interp.env_move(cfas, st, "p", interp.ChoiceSource(fixed={}))
        assert out.state.values == st.values
        move = encode_env_move(game, "p", {})
        asg = full_assignment(game, st, move, out.state)
        assert mgr.eval(game.delta_u, asg)
        # ... and nothing else is allowed: a changed data bit is rejected
        bad = out.state.copy()
        bad.values["v"] ^= 1
        assert not mgr.eval(game.delta_u, full_assignment(game, st, move, bad))


# ----------------------------------------------------------------------
# bulk agreement with the interpreter


def test_transition_soundness_bulk(jukebox_model, jukebox_cfas, jukebox_game):
    """Random (state, action) pairs: the relations accept exactly the
    interpreter's successor."""
    game = jukebox_game
    mgr = game.mgr
    rng = random.Random(2024)
    env_checked = ctrl_checked = 0
    for _ in range(10_000):
        st = random_state(jukebox_model, jukebox_cfas, rng)
        at = interp.magic_pc(jukebox_cfas, st)
        if at is not None and rng.random() < 0.6:
            # controller move: a call or the exit
            if rng.random() < 0.75:
                task = rng.choice(jukebox_model.controllable_tasks())
                args = [
                    rng.randrange(M.type_value_count(ty)) for _, ty in task.params
                ]
                out = interp.ctrl_call(jukebox_cfas, st, task.name, args)
                move = encode_ctrl_move(game, task.name, args)
            else:
                out = interp.ctrl_exit(jukebox_cfas, st)
                move = encode_ctrl_move(game, "exit", None)
            asg = full_assignment(game, st, move, out.state)
            assert mgr.eval(game.delta_c, asg), "controller transition missing"
            wrong = out.state.copy()
            wrong.values["jb.position"] ^= 1
            assert not mgr.eval(
                game.delta_c, full_assignment(game, st, move, wrong)
            ), "controller relation too permissive"
            ctrl_checked += 1
        else:
            procs = interp.runnable_processes(jukebox_cfas, st)
            if not procs:
                continue
            proc = rng.choice(procs)
            out = interp.env_move(jukebox_cfas, st, proc, interp.ChoiceSource(rng=rng))
            move = encode_env_move(game, proc, choice_bits_of(game, out))
            asg = full_assignment(game, st, move, out.state)
            assert mgr.eval(game.delta_u, asg), "environment transition missing"
            wrong = out.state.copy()
            wrong.values["jb.selection"] ^= 0b10
            assert not mgr.eval(
                game.delta_u, full_assignment(game, st, move, wrong)
            ), "environment relation too permissive"
            env_checked += 1
    assert env_checked > 3000 and ctrl_checked > 1000


# ----------------------------------------------------------------------
# invariants


def test_turn_discipline(jukebox_game):
    mgr = jukebox_game.mgr
    vm = jukebox_game.varmap
    q_u = vm.yu_levels + vm.xp_levels
    q_c = vm.yc_levels + vm.xp_levels
    du_states = mgr.exists(q_u, jukebox_game.delta_u)
    dc_states = mgr.exists(q_c, jukebox_game.delta_c)
    assert mgr.apply("and", du_states, jukebox_game.controller_turn) == FALSE
    assert (
        mgr.apply("and", dc_states, mgr.neg(jukebox_game.controller_turn)) == FALSE
    )


def test_error_states_absorbing(jukebox_game):
    game = jukebox_game
    mgr = game.mgr
    vm = game.varmap
    err_next = mgr.swap_prime(game.error_states)
    for rel in (game.delta_u, game.delta_c):
        leak = mgr.conj(rel, game.error_states, mgr.neg(err_next))
        assert leak == FALSE


def test_totality_outside_error(jukebox_game):
    game = jukebox_game
    mgr = game.mgr
    vm = game.varmap
    moves = mgr.apply(
        "or",
        mgr.exists(vm.yu_levels + vm.xp_levels, game.delta_u),
        mgr.exists(vm.yc_levels + vm.xp_levels, game.delta_c),
    )
    assert mgr.apply("and", mgr.neg(moves), TRUE) == mgr.neg(moves)
    # every state (even outside the reachable envelope) has some move
    assert mgr.neg(moves) == FALSE


def test_frame_soundness(jukebox_model, jukebox_cfas, jukebox_game):
    """Variables a segment never assigns satisfy v' = v on its moves."""
    game = jukebox_game
    mgr = game.mgr
    vm = game.varmap
    from reactsyn.cfa import TAssign, walk_tree

    for tag, rel in game.du_parts:
        if tag[0] != "seg":
            continue
        _, proc, loc = tag
        cfa = jukebox_cfas.cfa_of(proc)
        assigned = {
            n.var.name for n in walk_tree(cfa.trees[loc]) if isinstance(n, TAssign)
        }
        for v in jukebox_model.vars:
            if v.name in assigned:
                continue
            ident = TRUE
            for cur, nxt in vm.var_bits[v.name]:
                ident = mgr.apply(
                    "and", ident, mgr.equiv(mgr.var(nxt), mgr.var(cur))
                )
            assert mgr.apply("and", rel, mgr.neg(ident)) == FALSE


def test_goal_and_fairness_shapes(jukebox_game):
    game = jukebox_game
    assert game.goal_names == ["ctl.play_selection"]
    assert len(game.fairness) == 1  # one condition per process
    mgr = game.mgr
    # goal excludes error states
    assert mgr.apply("and", game.goals[0], game.error_states) == FALSE


def test_zero_goal_spec_gets_safety_goal():
    m = compile_text(
        "template main bool b; process p { forever { pause; }; }; endtemplate"
    )
    game = encode_game(m, build_cfa(m))
    assert game.goal_names == ["<safety>"]
    assert game.goals[0] == game.mgr.neg(game.error_states)


def test_stats_shape(jukebox_game):
    stats = game_stats(jukebox_game)
    assert stats["state_bits"] == 21 and stats["processes"] == 1
