from importlib.resources import files

import pytest

FIXTURES = files("cutlab") / "fixtures"
DATA = files("cutlab") / "data"


@pytest.fixture
def fixture_path():
    return lambda name: str(FIXTURES / name)


@pytest.fixture
def data_path():
    return lambda name: str(DATA / name)
