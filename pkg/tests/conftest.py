import numpy as np
import pytest

# Seed for the `rng` and `set_seed` fixtures. Change to change random state of all
# seeded tests.
seed = 1


@pytest.fixture(scope="function")
def set_seed():
    np.random.seed(seed)


@pytest.fixture(scope="function")
def rng():
    return np.random.default_rng(seed)


@pytest.fixture(autouse=True)
def single_process(monkeypatch):
    monkeypatch.delenv("HHX_THREADS", raising=False)
