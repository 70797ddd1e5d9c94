import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from decstruct import load_actions, load_structure, load_world, parse_ltl

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "corpus")


def corpus_path(name):
    return os.path.join(CORPUS, name)


def structure(name):
    return load_structure(corpus_path(name + ".ds"))


@pytest.fixture(scope="session")
def world():
    return load_world(corpus_path("drone.wld"))


@pytest.fixture(scope="session")
def specs():
    return load_actions(corpus_path("drone.act"))


@pytest.fixture(scope="session")
def spec_formula():
    with open(corpus_path("spec.ltl")) as fh:
        text = " ".join(line.split("#")[0] for line in fh)
    return parse_ltl(text)
