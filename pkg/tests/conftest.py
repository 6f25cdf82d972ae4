import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from reactsyn.cfa import build_cfa
from reactsyn.encode import encode_game
from reactsyn.frontend import SourceSpec, compile_file, compile_model
from reactsyn.solver import solve

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SPECS = os.path.join(REPO, "specs")


def spec_path(name: str) -> str:
    return os.path.join(SPECS, name)


def compile_spec(name: str):
    return compile_file(spec_path(name))


def compile_text(text: str, filename: str = "inline.tsl"):
    return compile_model(SourceSpec(((filename, text),)))


@pytest.fixture(scope="session")
def jukebox_model():
    return compile_spec("jukebox.tsl")


@pytest.fixture(scope="session")
def jukebox_cfas(jukebox_model):
    return build_cfa(jukebox_model)


@pytest.fixture(scope="session")
def jukebox_game(jukebox_model, jukebox_cfas):
    return encode_game(jukebox_model, jukebox_cfas)


@pytest.fixture(scope="session")
def jukebox_cert(jukebox_game):
    return solve(jukebox_game)


@pytest.fixture(scope="session")
def bug_setup():
    model = compile_spec("jukebox_bug.tsl")
    cfas = build_cfa(model)
    game = encode_game(model, cfas)
    return model, cfas, game, solve(game)


@pytest.fixture(scope="session")
def small_setup():
    model = compile_spec("jukebox_small.tsl")
    cfas = build_cfa(model)
    game = encode_game(model, cfas)
    return model, cfas, game
