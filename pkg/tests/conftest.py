import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import helpers  # noqa: E402


@pytest.fixture
def e3():
    return helpers.e3_classifier()


@pytest.fixture
def bankloan():
    return helpers.bankloan_classifier()


@pytest.fixture
def constant():
    return helpers.constant_classifier()
