"""Reduced ordered binary decision diagrams.

Hash-consed node store with memoized Boolean operations, quantification,
a relational product, prime/unprime variable exchange, deterministic cube
selection and irredundant sum-of-products extraction.

The variable order is fixed for the lifetime of a manager; there is no
dynamic reordering and no garbage collection (the arena is freed as a
whole with the manager).  Negation materialises nodes; complement edges
are not used.

References
==========

Randal E. Bryant
    "Graph-based algorithms for Boolean function manipulation"
    IEEE Transactions on Computers C-35(8), 1986

Karl S. Brace, Richard L. Rudell, Randal E. Bryant
    "Efficient implementation of a BDD package", DAC 1990

Shin-ichi Minato
    "Fast generation of prime-irredundant covers from binary
    decision diagrams", IEICE Transactions E76-A(6), 1993
"""

from __future__ import annotations

import sys

FALSE = 0
TRUE = 1

_LEVEL_INF = 1 << 30

_AND = "and"
_OR = "or"
_XOR = "xor"

sys.setrecursionlimit(200_000)


class CapacityError(Exception):
    """Node store exceeded the configured limit."""


class Bdd:
    """A BDD manager: one variable order, one node store, one owner thread.

    Nodes are plain ``int`` handles; ``FALSE`` is ``0`` and ``TRUE`` is
    ``1``.  Handles from different managers must never be mixed.
    """

    def __init__(self, max_nodes: int = 10_000_000):
        self.max_nodes = max_nodes
        # node 0 = FALSE, node 1 = TRUE (levels past any variable)
        self._level = [_LEVEL_INF, _LEVEL_INF]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._var_names: list[str] = []
        # caches, cleared explicitly between solver phases
        self._apply_cache: dict[tuple, int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self._quant_cache: dict[tuple, int] = {}
        self._swap_cache: dict[int, int] = {}
        self._misc_cache: dict[tuple, object] = {}
        self._varsets: dict[frozenset[int], int] = {}
        # level -> partner level for swap_prime; symmetric, adjacent pairs
        self._prime_partner: dict[int, int] = {}

    # ------------------------------------------------------------------
    # variables

    def add_var(self, name: str) -> int:
        """Register the next variable in the order; returns its level."""
        level = len(self._var_names)
        self._var_names.append(name)
        return level

    def add_var_pair(self, name: str) -> tuple[int, int]:
        """Register a current/next-state pair at adjacent levels."""
        cur = self.add_var(name)
        nxt = self.add_var(name + "'")
        self._prime_partner[cur] = nxt
        self._prime_partner[nxt] = cur
        return cur, nxt

    @property
    def nvars(self) -> int:
        return len(self._var_names)

    def var_name(self, level: int) -> str:
        return self._var_names[level]

    def var(self, level: int) -> int:
        """The function of a single variable."""
        if not 0 <= level < len(self._var_names):
            raise ValueError(f"unregistered variable level {level}")
        return self._mk(level, FALSE, TRUE)

    def nvar(self, level: int) -> int:
        """The function of a single negated variable."""
        return self._mk(level, TRUE, FALSE)

    # ------------------------------------------------------------------
    # node store

    def _mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        node = self._unique.get(key)
        if node is not None:
            return node
        node = len(self._level)
        if node > self.max_nodes:
            raise CapacityError(f"node store exceeded {self.max_nodes} nodes")
        self._level.append(level)
        self._lo.append(lo)
        self._hi.append(hi)
        self._unique[key] = node
        return node

    def __len__(self) -> int:
        return len(self._level)

    def level_of(self, u: int) -> int:
        return self._level[u]

    def clear_caches(self) -> None:
        self._apply_cache.clear()
        self._ite_cache.clear()
        self._quant_cache.clear()
        self._swap_cache.clear()
        self._misc_cache.clear()

    def check_integrity(self) -> None:
        """Verify the node store is reduced and hash-consed (debug aid)."""
        seen: dict[tuple[int, int, int], int] = {}
        for u in range(2, len(self._level)):
            key = (self._level[u], self._lo[u], self._hi[u])
            if self._lo[u] == self._hi[u]:
                raise AssertionError(f"redundant node {u}")
            if key in seen:
                raise AssertionError(f"duplicate triple {key}: {seen[key]} and {u}")
            if self._unique.get(key) != u:
                raise AssertionError(f"unique table out of sync at {u}")
            for child in (self._lo[u], self._hi[u]):
                if child >= 2 and self._level[child] <= self._level[u]:
                    raise AssertionError(f"order violation at node {u}")
            seen[key] = u

    # ------------------------------------------------------------------
    # boolean connectives

    def apply(self, op: str, a: int, b: int) -> int:
        """Binary connective; ``op`` is one of ``and``, ``or``, ``xor``."""
        if op == _AND:
            if a == FALSE or b == FALSE:
                return FALSE
            if a == TRUE:
                return b
            if b == TRUE:
                return a
            if a == b:
                return a
        elif op == _OR:
            if a == TRUE or b == TRUE:
                return TRUE
            if a == FALSE:
                return b
            if b == FALSE:
                return a
            if a == b:
                return a
        elif op == _XOR:
            if a == b:
                return FALSE
            if a == FALSE:
                return b
            if b == FALSE:
                return a
            if a == TRUE:
                return self.neg(b)
            if b == TRUE:
                return self.neg(a)
        else:
            raise ValueError(f"unknown op {op!r}")
        if a > b:
            a, b = b, a
        key = (op, a, b)
        r = self._apply_cache.get(key)
        if r is not None:
            return r
        la, lb = self._level[a], self._level[b]
        top = la if la < lb else lb
        a0, a1 = (self._lo[a], self._hi[a]) if la == top else (a, a)
        b0, b1 = (self._lo[b], self._hi[b]) if lb == top else (b, b)
        r = self._mk(top, self.apply(op, a0, b0), self.apply(op, a1, b1))
        self._apply_cache[key] = r
        return r

    def neg(self, a: int) -> int:
        if a == FALSE:
            return TRUE
        if a == TRUE:
            return FALSE
        key = (_XOR, a)
        r = self._apply_cache.get(key)
        if r is not None:
            return r
        r = self._mk(self._level[a], self.neg(self._lo[a]), self.neg(self._hi[a]))
        self._apply_cache[key] = r
        return r

    def conj(self, *fs: int) -> int:
        r = TRUE
        for f in fs:
            r = self.apply(_AND, r, f)
        return r

    def disj(self, *fs: int) -> int:
        r = FALSE
        for f in fs:
            r = self.apply(_OR, r, f)
        return r

    def implies(self, a: int, b: int) -> int:
        return self.apply(_OR, self.neg(a), b)

    def equiv(self, a: int, b: int) -> int:
        return self.neg(self.apply(_XOR, a, b))

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        if g == FALSE and h == TRUE:
            return self.neg(f)
        key = (f, g, h)
        r = self._ite_cache.get(key)
        if r is not None:
            return r
        top = min(self._level[f], self._level[g], self._level[h])
        f0, f1 = self._cof(f, top)
        g0, g1 = self._cof(g, top)
        h0, h1 = self._cof(h, top)
        r = self._mk(top, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_cache[key] = r
        return r

    def _cof(self, u: int, level: int) -> tuple[int, int]:
        if self._level[u] == level:
            return self._lo[u], self._hi[u]
        return u, u

    # ------------------------------------------------------------------
    # quantification

    def varset(self, levels) -> int:
        """Intern a set of levels for use with the quantifiers."""
        fs = frozenset(levels)
        vsid = self._varsets.get(fs)
        if vsid is None:
            vsid = len(self._varsets)
            self._varsets[fs] = vsid
            self._misc_cache[("vs", vsid)] = fs
        return vsid

    def _varset_levels(self, vsid: int) -> frozenset[int]:
        return self._misc_cache[("vs", vsid)]  # type: ignore[return-value]

    def exists(self, levels, f: int) -> int:
        return self._quantify(self.varset(levels), f, _OR)

    def forall(self, levels, f: int) -> int:
        return self._quantify(self.varset(levels), f, _AND)

    def _quantify(self, vsid: int, f: int, op: str) -> int:
        if f <= TRUE:
            return f
        fs = self._varset_levels(vsid)
        if not fs:
            return f
        key = ("q", op, vsid, f)
        r = self._quant_cache.get(key)
        if r is not None:
            return r
        level = self._level[f]
        lo = self._quantify(vsid, self._lo[f], op)
        hi = self._quantify(vsid, self._hi[f], op)
        if level in fs:
            r = self.apply(op, lo, hi)
        else:
            r = self._mk(level, lo, hi)
        self._quant_cache[key] = r
        return r

    def and_exists(self, levels, f: int, g: int) -> int:
        """Relational product: ``exists(levels, f & g)`` without the
        intermediate conjunction."""
        return self._and_exists(self.varset(levels), f, g)

    def _and_exists(self, vsid: int, f: int, g: int) -> int:
        if f == FALSE or g == FALSE:
            return FALSE
        if f == TRUE:
            return self._quantify(vsid, g, _OR)
        if g == TRUE or f == g:
            return self._quantify(vsid, f, _OR)
        if f > g:
            f, g = g, f
        key = ("ae", vsid, f, g)
        r = self._quant_cache.get(key)
        if r is not None:
            return r
        top = min(self._level[f], self._level[g])
        f0, f1 = self._cof(f, top)
        g0, g1 = self._cof(g, top)
        r0 = self._and_exists(vsid, f0, g0)
        if top in self._varset_levels(vsid):
            if r0 == TRUE:
                r = TRUE
            else:
                r = self.apply(_OR, r0, self._and_exists(vsid, f1, g1))
        else:
            r = self._mk(top, r0, self._and_exists(vsid, f1, g1))
        self._quant_cache[key] = r
        return r

    # ------------------------------------------------------------------
    # prime exchange

    def swap_prime(self, f: int) -> int:
        """Exchange every current-state variable with its primed partner.

        Relies on pairs occupying adjacent levels, which `add_var_pair`
        guarantees; an involution by construction.
        """
        return self._swap(f)

    def _swap(self, f: int) -> int:
        if f <= TRUE:
            return f
        r = self._swap_cache.get(f)
        if r is not None:
            return r
        level = self._level[f]
        partner = self._prime_partner.get(level)
        if partner is None:
            r = self._mk(level, self._swap(self._lo[f]), self._swap(self._hi[f]))
        else:
            a, b = (level, partner) if level < partner else (partner, level)
            g0, g1 = self._cof(f, a)
            f00, f01 = self._cof(g0, b)
            f10, f11 = self._cof(g1, b)
            s00 = self._swap(f00)
            s01 = self._swap(f01)
            s10 = self._swap(f10)
            s11 = self._swap(f11)
            # roles of a and b exchange: h(a=x, b=y) = f(a=y, b=x)
            r = self._mk(a, self._mk(b, s00, s10), self._mk(b, s01, s11))
        self._swap_cache[f] = r
        return r

    # ------------------------------------------------------------------
    # inspection

    def eval(self, f: int, assignment: dict[int, bool]) -> bool:
        """Evaluate under a total assignment ``level -> bool``."""
        u = f
        while u > TRUE:
            u = self._hi[u] if assignment[self._level[u]] else self._lo[u]
        return u == TRUE

    def support(self, f: int) -> frozenset[int]:
        seen: set[int] = set()
        out: set[int] = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u <= TRUE or u in seen:
                continue
            seen.add(u)
            out.add(self._level[u])
            stack.append(self._lo[u])
            stack.append(self._hi[u])
        return frozenset(out)

    def node_count(self, f: int) -> int:
        """Number of nodes in the subgraph rooted at ``f``."""
        seen: set[int] = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u <= TRUE or u in seen:
                continue
            seen.add(u)
            stack.append(self._lo[u])
            stack.append(self._hi[u])
        return len(seen)

    def sat_count(self, f: int, levels) -> int:
        """Number of satisfying assignments over the given scope.

        The support of ``f`` must be contained in ``levels``.
        """
        scope = sorted(levels)
        index = {lvl: i for i, lvl in enumerate(scope)}
        vsid = self.varset(scope)
        n = len(scope)

        def pos(u: int) -> int:
            return n if u <= TRUE else index[self._level[u]]

        def count(u: int) -> int:
            # satisfying assignments over scope indices >= pos(u)
            if u == FALSE:
                return 0
            if u == TRUE:
                return 1
            key = ("sc", vsid, u)
            c = self._misc_cache.get(key)
            if c is None:
                i = pos(u)
                lo, hi = self._lo[u], self._hi[u]
                c = count(lo) * (1 << (pos(lo) - i - 1)) + count(hi) * (
                    1 << (pos(hi) - i - 1)
                )
                self._misc_cache[key] = c
            return c  # type: ignore[return-value]

        return count(f) * (1 << pos(f))

    # ------------------------------------------------------------------
    # cube selection and covers

    def pick_cube(self, f: int, care_levels, policy: str = "low") -> dict[int, bool] | None:
        """A deterministic satisfying assignment, total over ``care_levels``.

        ``low`` prefers the 0-branch at every decision (and 0 for
        don't-cares); ``high`` prefers 1.  Returns ``None`` iff ``f`` is
        FALSE.
        """
        if f == FALSE:
            return None
        prefer_high = policy == "high"
        out: dict[int, bool] = {}
        u = f
        while u > TRUE:
            lvl = self._level[u]
            lo, hi = self._lo[u], self._hi[u]
            first, second = (hi, lo) if prefer_high else (lo, hi)
            if first != FALSE:
                out[lvl] = prefer_high
                u = first
            else:
                out[lvl] = not prefer_high
                u = second
        for lvl in care_levels:
            if lvl not in out:
                out[lvl] = prefer_high
        return out

    def extract_cover(self, f: int, care: int) -> list[dict[int, bool]]:
        """Irredundant sum-of-products of some g with f&care <= g <= f|~care.

        Cubes are partial assignments ``level -> bool``; their disjunction
        agrees with ``f`` everywhere on ``care`` (Minato's prime-irredundant
        cover generation, run on the interval induced by the care set).
        """
        lower = self.apply(_AND, f, care)
        upper = self.apply(_OR, f, self.neg(care))
        cover, _ = self._isop(lower, upper)
        return [dict(cube) for cube in cover]

    def _isop(self, lower: int, upper: int) -> tuple[tuple, int]:
        if lower == FALSE:
            return (), FALSE
        if upper == TRUE:
            return ((),), TRUE
        key = ("isop", lower, upper)
        r = self._misc_cache.get(key)
        if r is not None:
            return r  # type: ignore[return-value]
        top = min(self._level[lower], self._level[upper])
        l0, l1 = self._cof(lower, top)
        u0, u1 = self._cof(upper, top)
        # cubes forced to carry the negative / positive literal of top
        c0, g0 = self._isop(self.apply(_AND, l0, self.neg(u1)), u0)
        c1, g1 = self._isop(self.apply(_AND, l1, self.neg(u0)), u1)
        rest_lower = self.apply(
            _OR,
            self.apply(_AND, l0, self.neg(g0)),
            self.apply(_AND, l1, self.neg(g1)),
        )
        cr, gr = self._isop(rest_lower, self.apply(_AND, u0, u1))
        cover = (
            tuple(cube + ((top, False),) for cube in c0)
            + tuple(cube + ((top, True),) for cube in c1)
            + cr
        )
        g = self.apply(_OR, self.ite(self.var(top), g1, g0), gr)
        result = (cover, g)
        self._misc_cache[key] = result
        return result

    def cube(self, assignment: dict[int, bool]) -> int:
        """Conjunction of literals from a (partial) assignment."""
        r = TRUE
        for lvl in sorted(assignment, reverse=True):
            r = self._mk(lvl, FALSE, r) if assignment[lvl] else self._mk(lvl, r, FALSE)
        return r

    # ------------------------------------------------------------------
    # export

    def to_dot(self, f: int, title: str = "bdd") -> str:
        """Graphviz text for the subgraph rooted at ``f``."""
        lines = [f"digraph {title} {{", '  rankdir=TB;']
        lines.append('  n0 [shape=box,label="0"]; n1 [shape=box,label="1"];')
        seen: set[int] = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u <= TRUE or u in seen:
                continue
            seen.add(u)
            lines.append(f'  n{u} [label="{self._var_names[self._level[u]]}"];')
            lines.append(f"  n{u} -> n{self._lo[u]} [style=dashed];")
            lines.append(f"  n{u} -> n{self._hi[u]};")
            stack.append(self._lo[u])
            stack.append(self._hi[u])
        lines.append("}")
        return "\n".join(lines)

    def dump_nodes(self, roots: list[int]) -> dict:
        """Serialise the subgraphs rooted at ``roots`` (for disk caches)."""
        order: list[int] = []
        seen: set[int] = set()

        def visit(u: int) -> None:
            if u <= TRUE or u in seen:
                return
            seen.add(u)
            visit(self._lo[u])
            visit(self._hi[u])
            order.append(u)

        for root in roots:
            visit(root)
        remap = {FALSE: 0, TRUE: 1}
        nodes = []
        for u in order:
            remap[u] = len(nodes) + 2
            nodes.append([self._level[u], remap[self._lo[u]], remap[self._hi[u]]])
        return {"nodes": nodes, "roots": [remap[r] for r in roots]}

    def load_nodes(self, payload: dict) -> list[int]:
        """Rebuild functions serialised by `dump_nodes` into this manager."""
        remap = {0: FALSE, 1: TRUE}
        for i, (level, lo, hi) in enumerate(payload["nodes"]):
            remap[i + 2] = self._mk(level, remap[lo], remap[hi])
        return [remap[r] for r in payload["roots"]]
