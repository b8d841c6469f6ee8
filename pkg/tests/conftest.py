import os

import pytest

from convexqe.cli import fixtures_dir
from convexqe.models import load_model

FIXTURE_NAMES = ["q1_pi", "q3_11pi", "lex2_val_1inf", "lex3_val_1pi0",
                 "lex2_rat_11", "lex2_sub1", "lex3_sub2"]
VALUATIONAL_NAMES = ["lex2_sub1", "lex3_sub2", "lex2_val_1inf", "lex3_val_1pi0"]
NONVALUATIONAL_NAMES = ["q1_pi", "q3_11pi"]


def fixture_path(name: str) -> str:
    return os.path.join(fixtures_dir(), name + ".json")


def get_model(name: str):
    return load_model(fixture_path(name))


@pytest.fixture(scope="session")
def models():
    return {name: get_model(name) for name in FIXTURE_NAMES}


@pytest.fixture(scope="session")
def m_sub2():
    return get_model("lex2_sub1")


@pytest.fixture(scope="session")
def m_sub3():
    return get_model("lex3_sub2")


@pytest.fixture(scope="session")
def m_pi():
    return get_model("q1_pi")


@pytest.fixture(scope="session")
def m_11pi():
    return get_model("q3_11pi")


@pytest.fixture(scope="session")
def m_1inf():
    return get_model("lex2_val_1inf")


@pytest.fixture(scope="session")
def m_1pi0():
    return get_model("lex3_val_1pi0")


@pytest.fixture(scope="session")
def m_rat():
    return get_model("lex2_rat_11")
