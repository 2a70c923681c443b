import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("metriclab", deadline=None, max_examples=60)
settings.load_profile("metriclab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
