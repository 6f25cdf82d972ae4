"""BDD engine: truth-table oracles, canonicity, algebraic identities."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from reactsyn.bdd import FALSE, TRUE, Bdd, CapacityError

N_VARS = 5


@pytest.fixture()
def mgr():
    m = Bdd()
    for i in range(N_VARS):
        m.add_var(f"x{i}")
    return m


# ----------------------------------------------------------------------
# a tiny formula language with a truth-table evaluator as the oracle

OPS = ("and", "or", "xor", "not")


def rand_formula(rng: random.Random, depth: int, nvars: int):
    if depth == 0 or rng.random() < 0.2:
        return ("v", rng.randrange(nvars))
    op = rng.choice(OPS)
    if op == "not":
        return ("not", rand_formula(rng, depth - 1, nvars))
    return (op, rand_formula(rng, depth - 1, nvars), rand_formula(rng, depth - 1, nvars))


def build(m: Bdd, f):
    if f[0] == "v":
        return m.var(f[1])
    if f[0] == "not":
        return m.neg(build(m, f[1]))
    return m.apply(f[0], build(m, f[1]), build(m, f[2]))


def truth(f, env):
    if f[0] == "v":
        return env[f[1]]
    if f[0] == "not":
        return not truth(f[1], env)
    a, b = truth(f[1], env), truth(f[2], env)
    return {"and": a and b, "or": a or b, "xor": a != b}[f[0]]


def all_envs(n):
    return itertools.product([False, True], repeat=n)


# ----------------------------------------------------------------------
# basic connectives


def test_terminal_identities(mgr):
    x = mgr.var(0)
    assert mgr.apply("and", x, mgr.neg(x)) == FALSE
    assert mgr.apply("or", x, mgr.neg(x)) == TRUE
    assert mgr.ite(x, TRUE, FALSE) == x
    assert mgr.ite(x, FALSE, TRUE) == mgr.neg(x)
    assert mgr.neg(mgr.neg(x)) == x


def test_apply_matches_truth_tables(mgr):
    rng = random.Random(7)
    for _ in range(300):
        f = rand_formula(rng, 4, N_VARS)
        u = build(mgr, f)
        for env in all_envs(N_VARS):
            assert mgr.eval(u, dict(enumerate(env))) == truth(f, list(env))


def test_canonicity_exhaustive_to_five_vars(mgr):
    """Handle equality iff truth-table equality (canonical forms)."""
    rng = random.Random(11)
    formulas = [rand_formula(rng, 4, N_VARS) for _ in range(120)]
    nodes = [build(mgr, f) for f in formulas]
    tables = [
        tuple(truth(f, list(env)) for env in all_envs(N_VARS)) for f in formulas
    ]
    for i in range(len(formulas)):
        for j in range(i + 1, len(formulas)):
            assert (nodes[i] == nodes[j]) == (tables[i] == tables[j])
    mgr.check_integrity()


def test_ite_general(mgr):
    rng = random.Random(3)
    for _ in range(100):
        f, g, h = (build(mgr, rand_formula(rng, 3, N_VARS)) for _ in range(3))
        r = mgr.ite(f, g, h)
        for env in all_envs(N_VARS):
            asg = dict(enumerate(env))
            want = mgr.eval(g, asg) if mgr.eval(f, asg) else mgr.eval(h, asg)
            assert mgr.eval(r, asg) == want


# ----------------------------------------------------------------------
# quantification


def test_quantifier_basics(mgr):
    x, y = mgr.var(0), mgr.var(1)
    assert mgr.exists([0], mgr.apply("and", x, y)) == y
    assert mgr.forall([0], mgr.apply("or", x, y)) == y
    assert mgr.exists([0, 1], mgr.apply("and", x, y)) == TRUE
    assert mgr.forall([0, 1], mgr.apply("and", x, y)) == FALSE


def test_and_exists_equals_composition(mgr):
    rng = random.Random(23)
    for _ in range(100):
        f = build(mgr, rand_formula(rng, 3, N_VARS))
        g = build(mgr, rand_formula(rng, 3, N_VARS))
        vs = rng.sample(range(N_VARS), rng.randint(1, 3))
        assert mgr.and_exists(vs, f, g) == mgr.exists(vs, mgr.apply("and", f, g))


def test_quantifier_duality(mgr):
    rng = random.Random(29)
    for _ in range(100):
        f = build(mgr, rand_formula(rng, 3, N_VARS))
        vs = rng.sample(range(N_VARS), 2)
        assert mgr.forall(vs, f) == mgr.neg(mgr.exists(vs, mgr.neg(f)))


# ----------------------------------------------------------------------
# prime exchange


def test_swap_prime_basics():
    m = Bdd()
    a, ap = m.add_var_pair("a")
    b, bp = m.add_var_pair("b")
    assert m.swap_prime(m.var(a)) == m.var(ap)
    f = m.apply("and", m.var(a), m.var(bp))
    assert m.swap_prime(f) == m.apply("and", m.var(ap), m.var(b))


def test_swap_prime_involution():
    m = Bdd()
    pairs = [m.add_var_pair(f"v{i}") for i in range(4)]
    extra = m.add_var("w")
    rng = random.Random(5)
    levels = [l for p in pairs for l in p] + [extra]
    for _ in range(100):
        f = rand_formula(rng, 4, len(levels))

        def conv(t):
            if t[0] == "v":
                return m.var(levels[t[1]])
            if t[0] == "not":
                return m.neg(conv(t[1]))
            return m.apply(t[0], conv(t[1]), conv(t[2]))

        u = conv(f)
        assert m.swap_prime(m.swap_prime(u)) == u


# ----------------------------------------------------------------------
# cube selection


def test_pick_cube_policy(mgr):
    assert mgr.pick_cube(TRUE, [0]) == {0: False}
    assert mgr.pick_cube(FALSE, [0]) is None
    assert mgr.pick_cube(TRUE, [0], policy="high") == {0: True}


def test_pick_cube_satisfies(mgr):
    rng = random.Random(13)
    checked = 0
    for _ in range(1000):
        f = build(mgr, rand_formula(rng, 4, N_VARS))
        cube = mgr.pick_cube(f, range(N_VARS))
        if f == FALSE:
            assert cube is None
            continue
        assert set(cube) == set(range(N_VARS))
        assert mgr.eval(f, cube)
        checked += 1
    assert checked > 500


# ----------------------------------------------------------------------
# covers


def cover_eval(cover, env):
    return any(all(env[l] == v for l, v in cube.items()) for cube in cover)


def test_cover_single_literal(mgr):
    assert mgr.extract_cover(mgr.var(0), TRUE) == [{0: True}]


def test_cover_merges_adjacent_cubes(mgr):
    x, y = mgr.var(0), mgr.var(1)
    f = mgr.apply(
        "or", mgr.apply("and", x, y), mgr.apply("and", x, mgr.neg(y))
    )
    assert mgr.extract_cover(f, TRUE) == [{0: True}]


def test_cover_exploits_dont_cares(mgr):
    x, y = mgr.var(0), mgr.var(1)
    f = mgr.apply("and", x, y)
    cover = mgr.extract_cover(f, y)
    assert cover == [{0: True}]
    # agreement on the care set, checked by truth table
    for env in all_envs(N_VARS):
        asg = dict(enumerate(env))
        if mgr.eval(y, asg):
            assert cover_eval(cover, asg) == mgr.eval(f, asg)


def _min_cover_size(mgr, f, care, nvars, upto):
    """Exhaustive minimum-cover search (tiny instances only)."""
    cubes = []
    for pattern in itertools.product([None, False, True], repeat=nvars):
        cube = {i: v for i, v in enumerate(pattern) if v is not None}
        ok = True
        for env in all_envs(nvars):
            asg = dict(enumerate(env))
            if mgr.eval(care, asg) and cover_eval([cube], asg) and not mgr.eval(f, asg):
                ok = False
                break
        if ok:
            cubes.append(cube)
    for k in range(0, upto + 1):
        for combo in itertools.combinations(cubes, k):
            good = True
            for env in all_envs(nvars):
                asg = dict(enumerate(env))
                if mgr.eval(care, asg) and mgr.eval(f, asg) != cover_eval(combo, asg):
                    good = False
                    break
            if good:
                return k
    return None


def test_cover_minimal_on_spec_cases():
    m = Bdd()
    for i in range(4):
        m.add_var(f"x{i}")
    x, y = m.var(0), m.var(1)
    f = m.apply("or", m.apply("and", x, y), m.apply("and", x, m.neg(y)))
    cover = m.extract_cover(f, TRUE)
    assert len(cover) == _min_cover_size(m, f, TRUE, 4, len(cover))
    g = m.apply("and", x, y)
    cover = m.extract_cover(g, y)
    assert len(cover) == _min_cover_size(m, g, y, 4, len(cover))


def test_cover_correct_and_irredundant(mgr):
    rng = random.Random(37)
    for _ in range(150):
        f = build(mgr, rand_formula(rng, 3, 4))
        care = build(mgr, rand_formula(rng, 2, 4))
        if care == FALSE:
            continue
        cover = mgr.extract_cover(f, care)
        for env in all_envs(N_VARS):
            asg = dict(enumerate(env))
            if mgr.eval(care, asg):
                assert cover_eval(cover, asg) == mgr.eval(f, asg)
        # no cube can be dropped without losing a care-set point
        for i in range(len(cover)):
            rest = cover[:i] + cover[i + 1 :]
            lost = False
            for env in all_envs(N_VARS):
                asg = dict(enumerate(env))
                if (
                    mgr.eval(care, asg)
                    and mgr.eval(f, asg)
                    and not cover_eval(rest, asg)
                ):
                    lost = True
                    break
            assert lost, "redundant cube in cover"


# ----------------------------------------------------------------------
# counting


def test_sat_count(mgr):
    x, y = mgr.var(0), mgr.var(1)
    assert mgr.sat_count(TRUE, range(5)) == 32
    assert mgr.sat_count(FALSE, range(5)) == 0
    assert mgr.sat_count(x, range(5)) == 16
    assert mgr.sat_count(mgr.apply("and", x, y), range(5)) == 8
    rng = random.Random(41)
    for _ in range(100):
        f = build(mgr, rand_formula(rng, 4, N_VARS))
        want = sum(
            1 for env in all_envs(N_VARS) if mgr.eval(f, dict(enumerate(env)))
        )
        assert mgr.sat_count(f, range(N_VARS)) == want


# ----------------------------------------------------------------------
# capacity and serialisation


def test_capacity_error():
    m = Bdd(max_nodes=16)
    for i in range(8):
        m.add_var(f"x{i}")
    with pytest.raises(CapacityError):
        f = TRUE
        for i in range(8):
            f = m.apply("and", f, m.var(i) if i % 2 else m.neg(m.var(i)))
            g = m.apply("xor", f, m.var((i + 3) % 8))
            f = m.apply("or", f, g)


def test_dump_load_roundtrip(mgr):
    rng = random.Random(43)
    f = build(mgr, rand_formula(rng, 5, N_VARS))
    g = mgr.neg(f)
    other = Bdd()
    for i in range(N_VARS):
        other.add_var(f"x{i}")
    rf, rg = other.load_nodes(mgr.dump_nodes([f, g]))
    for env in all_envs(N_VARS):
        asg = dict(enumerate(env))
        assert other.eval(rf, asg) == mgr.eval(f, asg)
        assert other.eval(rg, asg) != other.eval(rf, asg)


# ----------------------------------------------------------------------
# hypothesis property tests: boolean algebra

formula_st = st.deferred(
    lambda: st.one_of(
        st.integers(min_value=0, max_value=N_VARS - 1).map(lambda i: ("v", i)),
        st.tuples(st.just("not"), formula_st).map(tuple),
        st.tuples(st.sampled_from(["and", "or", "xor"]), formula_st, formula_st).map(
            tuple
        ),
    )
)


@settings(max_examples=200, deadline=None)
@given(formula_st, formula_st)
def test_de_morgan(fa, fb):
    m = Bdd()
    for i in range(N_VARS):
        m.add_var(f"x{i}")
    a, b = build(m, fa), build(m, fb)
    assert m.neg(m.apply("and", a, b)) == m.apply("or", m.neg(a), m.neg(b))
    assert m.neg(m.apply("or", a, b)) == m.apply("and", m.neg(a), m.neg(b))


@settings(max_examples=200, deadline=None)
@given(formula_st, formula_st, formula_st)
def test_distributivity(fa, fb, fc):
    m = Bdd()
    for i in range(N_VARS):
        m.add_var(f"x{i}")
    a, b, c = build(m, fa), build(m, fb), build(m, fc)
    assert m.apply("and", a, m.apply("or", b, c)) == m.apply(
        "or", m.apply("and", a, b), m.apply("and", a, c)
    )
