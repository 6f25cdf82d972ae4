"""Replay the counterexample debugging session on the defective jukebox.

The engine plays the environment according to the spoiling strategy: it
requests record zero, swallows the user's put command (the defect), and
then loops forever without invoking a single callback. Single-stepping
the command shows it never writes the mechanism state.
"""

import os

from reactsyn import debugger
from reactsyn.cfa import build_cfa
from reactsyn.encode import encode_game
from reactsyn.frontend import compile_file
from reactsyn.solver import solve

SPEC = os.path.join(os.path.dirname(__file__), "..", "specs", "jukebox_bug.tsl")

model = compile_file(SPEC)
game = encode_game(model, build_cfa(model))
cert = solve(game)
session = debugger.start(game, cert)


def show(state, label=""):
    vals = {v.name.split(".")[1]: session.render_value(v, state.values[v.name])
            for v in model.vars}
    print(f"  {label:<28} {vals}")


print("losing initial state:")
show(session.active_state, "root")

r = session.env_step()
print(f"\nengine move: {r.edge.move}")
show(r.node.state, "after selection")
proc, loc = session.at_magic()
print(f"stopped inside {model.magic_sites[loc.site].task}")

print("\nuser: jb.cmd_put()")
r2 = session.user_action("jb.cmd_put()")
show(r2.node.state, "after cmd_put")

print("\nsingle-stepping the command:")
session.replay_edge(r2.edge.id)
while True:
    ev = session.single_step()
    if ev is None:
        break
    print(f"  {ev.kind:<7} {ev.detail} {ev.pos or ''}")
print("note: no write to jb.state — the defect")

print("\nuser: exit  (resume the mechanism)")
session.user_action("exit")
for i in range(3):
    r = session.env_step()
    show(r.node.state, f"loop iteration {i + 1}")
print("the loop never calls a handler: the selection is starved\n")

print("backtracking to the magic block to try rotating instead:")
session.goto_node(1)
r = session.user_action("jb.cmd_rotate(0)")
show(r.node.state, "after cmd_rotate(0)")
print(f"trace now holds {len(session.nodes)} nodes / {len(session.edges)} edges "
      f"with a branch at node 1")
