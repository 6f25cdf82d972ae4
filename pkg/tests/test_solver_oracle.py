"""Symbolic solver vs explicit brute-force oracle on random games.

A fast sample runs here; the acceptance suite repeats the comparison on
the full population the criteria demand.
"""

import random

from oracles.explicit_gr1 import winning_region
from oracles.game_gen import random_game, symbolic_region_to_set, to_symbolic

from reactsyn.solver import Solver


def run_batch(seed0: int, count: int, sizes) -> int:
    checked = 0
    rng_master = random.Random(seed0)
    for k in range(count):
        state_bits, yu_bits, yc_bits = sizes(k, rng_master)
        rng = random.Random(rng_master.randrange(1 << 30))
        g = random_game(
            rng,
            state_bits=state_bits,
            yu_bits=yu_bits,
            yc_bits=yc_bits,
            n_goals=rng.randint(1, 3),
            n_fairness=rng.randint(0, 2),
        )
        want = winning_region(g)
        sym = to_symbolic(g)
        w = Solver(sym).winning_region(collect=False)[0]
        got = symbolic_region_to_set(sym, w)
        assert got == want, (
            f"divergence on game {k}: bits={state_bits}, "
            f"only_oracle={sorted(want - got)[:5]}, only_symbolic={sorted(got - want)[:5]}"
        )
        checked += 1
    return checked


def test_oracle_equivalence_smoke():
    def sizes(k, rng):
        return rng.randint(2, 5), rng.randint(1, 2), rng.randint(1, 2)

    assert run_batch(101, 40, sizes) == 40


def test_oracle_equivalence_medium():
    def sizes(k, rng):
        return rng.randint(5, 7), rng.randint(1, 3), rng.randint(1, 2)

    assert run_batch(202, 12, sizes) == 12
