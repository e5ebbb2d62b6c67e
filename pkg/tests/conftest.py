import numpy as np
import pytest

from nanorotor import default_setup


@pytest.fixture(scope="session")
def setup_linear():
    """Default particle + calibrated trap at theta = 0."""
    return default_setup(0.0)


@pytest.fixture(scope="session")
def setup_elliptical():
    return default_setup(4.0 * np.pi / 32.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260826)
