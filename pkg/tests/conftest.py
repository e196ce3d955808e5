import random

import pytest

from wbteleop.robot.embodiment import load_embodiment

VECTOR_DIR_NAME = "vectors"


@pytest.fixture(scope="session")
def tiago():
    return load_embodiment("tiago_like")


@pytest.fixture(scope="session")
def fetch():
    return load_embodiment("fetch_like")


@pytest.fixture()
def rng():
    return random.Random(20240817)


@pytest.fixture(scope="session")
def vector_dir(request):
    path = request.config.rootpath / "tests" / VECTOR_DIR_NAME
    if not path.is_dir():
        pytest.skip("shared test vectors not generated")
    return path
