"""The decision-diagram engine underneath everything.

Canonical handles mean semantic equality is pointer equality; covers
from the same engine later become the branch conditions of generated
code.
"""

from reactsyn.bdd import Bdd, FALSE, TRUE

mgr = Bdd()
x, y, z = (mgr.var(mgr.add_var(n)) for n in "xyz")

f = mgr.apply("or", mgr.apply("and", x, y), mgr.apply("and", x, mgr.neg(y)))
print("x&y | x&~y simplifies to the handle of x:", f == x)

g = mgr.ite(x, y, z)
print("ite(x,y,z) node count:", mgr.node_count(g))
print("exists y. ite(x,y,z) == x | z:",
      mgr.exists([1], g) == mgr.apply("or", x, z))

# prime pairs power the transition-relation machinery
m2 = Bdd()
a, ap = m2.add_var_pair("a")
b, bp = m2.add_var_pair("b")
rel = m2.apply("and", m2.var(a), m2.var(bp))  # a & b'
print("swap_prime(a & b') == a' & b:",
      m2.swap_prime(rel) == m2.apply("and", m2.var(ap), m2.var(b)))

# deterministic cube selection: the same witness every run
cube = mgr.pick_cube(mgr.apply("or", y, z), [0, 1, 2])
print("lowest witness of y|z:", {mgr.var_name(l): v for l, v in sorted(cube.items())})

# irredundant covers with don't-cares: the care set is y, so x&y
# collapses to the single cube {x}
cover = mgr.extract_cover(mgr.apply("and", x, y), y)
print("cover of x&y under care y:",
      [{mgr.var_name(l): v for l, v in c.items()} for c in cover])

print("satisfying assignments of x|y over 3 vars:",
      mgr.sat_count(mgr.apply("or", x, y), [0, 1, 2]))
