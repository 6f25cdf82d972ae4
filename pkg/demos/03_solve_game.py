"""Encode the jukebox into a symbolic game and solve it.

The intact specification is realizable; deleting the one line that makes
the mechanism react to the put command renders it unrealizable, and the
solver hands back a spoiling strategy instead.
"""

import json
import os

from reactsyn.cfa import build_cfa
from reactsyn.encode import encode_game, game_stats
from reactsyn.frontend import SourceSpec, compile_file, compile_model
from reactsyn.solver import WinningCert, solve, verify_strategy

HERE = os.path.dirname(__file__)
SPEC = os.path.join(HERE, "..", "specs", "jukebox.tsl")

model = compile_file(SPEC)
game = encode_game(model, build_cfa(model))
print("game:", json.dumps(game_stats(game), indent=2))

cert = solve(game)
print("\nverdict:", "realizable" if isinstance(cert, WinningCert) else "unrealizable")
print("solver stats:", json.dumps(cert.stats.to_json()))
print("onion rings to the goal:", len(cert.rings[0]) - 1)
print("strategy model-check:", verify_strategy(game, cert))

# now the defective variant: the drum ignores the put command
with open(SPEC, encoding="utf-8") as fh:
    text = fh.read()
bug = text.replace("    state = put;\n", "")
bug_model = compile_model(SourceSpec((("jukebox_bug.tsl", bug),)))
bug_game = encode_game(bug_model, build_cfa(bug_model))
bug_cert = solve(bug_game)
print("\ndefective variant verdict:",
      "realizable" if isinstance(bug_cert, WinningCert) else "unrealizable")
mgr = bug_game.mgr
lost = mgr.apply("and", bug_game.init, bug_cert.w_env)
print("losing initial states exist:", lost != 0)
root = mgr.pick_cube(lost, bug_game.varmap.x_levels)
from reactsyn.encode import cube_to_state

print("deterministic losing root:", cube_to_state(bug_game, root).to_json())
