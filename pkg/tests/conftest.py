import numpy as np
import pytest

from gselect.stats.regression import Dataset
from tests.oracles import make_dataset


@pytest.fixture
def toy_dataset() -> Dataset:
    return make_dataset()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
