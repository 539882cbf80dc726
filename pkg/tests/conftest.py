import numpy as np
import pytest

from repvar import liegroup as lg


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["gl2", "sl2", "gl3", "sl3"])
def spec(request):
    return lg.GroupSpec.from_label(request.param)
