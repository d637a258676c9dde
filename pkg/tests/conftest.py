import numpy as np
import pytest

from factories import three_mode_toy
from fopa_noise.core.models import dump_custom


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def toy_matrix():
    return three_mode_toy()


@pytest.fixture
def toy_file(tmp_path):
    return dump_custom(three_mode_toy(), tmp_path / "toy.json")
