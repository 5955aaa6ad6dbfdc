from __future__ import annotations

import pathlib

import pytest

from ciot import load_file

REPO = pathlib.Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> pathlib.Path:
    return CORPUS


@pytest.fixture(scope="session")
def parking_path() -> str:
    return str(CORPUS / "parking_node.ciot")


@pytest.fixture()
def parking_model(parking_path):
    # Function-scoped: a few tests mutate runtime state derived from it,
    # and model loading is cheap enough not to matter.
    return load_file(parking_path)


@pytest.fixture(scope="session")
def arrive_depart_path() -> str:
    return str(CORPUS / "scenario_arrive_depart.scn")


@pytest.fixture(scope="session")
def physical_path() -> str:
    return str(CORPUS / "scenario_physical.scn")
