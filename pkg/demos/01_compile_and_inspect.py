"""Compile the jukebox specification and look around.

The frontend lexes, parses, type-checks and flattens the templates into
one qualified model; the segment builder then cuts every process into
atomic transitions between pause points and magic blocks.
"""

import os

from reactsyn.cfa import build_cfa, cfa_to_dot
from reactsyn.frontend import compile_file

SPEC = os.path.join(os.path.dirname(__file__), "..", "specs", "jukebox.tsl")

model = compile_file(SPEC)

print("instances: ", ", ".join(i.name for i in model.instances))
print("variables:")
for v in model.vars:
    init = f" = {v.init}" if v.init is not None else ""
    print(f"  {v.name}: {v.ty}{init}   ({v.ty.width} bits)")
print("processes: ", ", ".join(p.name for p in model.processes))
print("controllable tasks:")
for t in model.controllable_tasks():
    params = ", ".join(f"{n}: {ty}" for n, ty in t.params)
    print(f"  {t.name}({params})")
print("magic sites:")
for s in model.magic_sites:
    print(f"  #{s.site} in {s.task}  at {s.pos}")
print("goals:", ", ".join(g.name for g in model.goals))

cfas = build_cfa(model)
cfa = cfas.cfas[0]
print(f"\nautomaton of {cfa.owner}: {len(cfa.locations)} locations, "
      f"{len(cfa.segments)} segment views, "
      f"{cfa.max_choice_slots} nondeterministic choice bits")
for loc in cfa.locations:
    print(f"  {loc.label()}")

print("\nGraphviz dump (render with `dot -Tsvg`):\n")
print(cfa_to_dot(cfa))
