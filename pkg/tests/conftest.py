import os
import tempfile

# the API module creates its tables at import time
_DB_DIR = tempfile.mkdtemp(prefix="planner-tests-")
os.environ.setdefault("DATABASE_URL", f"sqlite:///{_DB_DIR}/runs.db")
os.environ.setdefault("LOG_LEVEL", "WARNING")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from app.environments import NoiseModel, ToyMDP, build_synthetic_tree  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(np.random.SeedSequence(1234))


@pytest.fixture
def toy():
    """Toy MDP without the reward shift and without noise."""
    return ToyMDP(gamma=0.95, shift=0.0)


@pytest.fixture
def noisy_toy():
    return ToyMDP(gamma=0.95, noise=NoiseModel("uniform", 10.0))


@pytest.fixture
def kappa_one_tree():
    """K=2, depth 10, rho=0.5 <= gamma=0.8, on-path reward nu (1 - rho) = 1."""
    return build_synthetic_tree(2, 10, nu=2.0, rho=0.5, gamma=0.8, kappa_target=1, seed=7)


@pytest.fixture
def dense_tree():
    """K=2, depth 6, gamma = rho = 0.5, nu = R_max / (1 - gamma)."""
    return build_synthetic_tree(2, 6, nu=2.0, rho=0.5, gamma=0.5, kappa_target=2, seed=3)
