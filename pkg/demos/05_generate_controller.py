"""Guided code generation, ending in a compilable C module.

The generator fills the selection and rotation handlers automatically,
suggests leaving the playback handler empty (correct, but it would park
records on the turntable), accepts a manual fill instead, and then
generates the parked handler taking the manual code into account.
"""

import os

from reactsyn.c_backend import emit_c
from reactsyn.cfa import build_cfa
from reactsyn.codegen import Generator, PartialImpl, apply_fill
from reactsyn.encode import encode_game
from reactsyn.frontend import compile_file
from reactsyn.solver import solve

SPEC = os.path.join(os.path.dirname(__file__), "..", "specs", "jukebox.tsl")

model = compile_file(SPEC)
game = encode_game(model, build_cfa(model))
cert = solve(game)
impl = PartialImpl(model)
gen = Generator(game, cert, impl)


def banner(site):
    print(f"\n=== {model.magic_sites[site].task} ===")


for site in (0, 1):
    banner(site)
    patch, reach = gen.generate(site)
    print(patch.text)
    print("evidence:", patch.partitions)
    gen.apply_patch(patch)

banner(3)
suggestion, _ = gen.generate(3)
print(f"suggested: {suggestion.text!r}  (do nothing)")
print("overriding manually: return the record to the drum")
apply_fill(impl, 3, "jb.cmd_lift();", origin="user")

banner(2)
patch, _ = gen.generate(2)
print(patch.text)
print("note the first branch handles completion of the manual cmd_lift")
gen.apply_patch(patch)

print("\nre-validating the completed implementation:")
reach = gen.simulate_reachable(0)
print("  all reachable states winning:", gen.check_winning(reach) is None)

mod = emit_c(impl, "jukebox_ctl")
print(f"\n=== {mod.name}.h ===\n{mod.header}")
print(f"=== {mod.name}.c ===\n{mod.source}")
