from pathlib import Path

import numpy as np
import pytest

import wilsonnev
from wilsonnev.config import Configuration, log_grid

PACKAGE_CFG = Path(wilsonnev.__file__).parent / "cfg.yaml"


@pytest.fixture
def cfg():
    return Configuration(file=PACKAGE_CFG)


@pytest.fixture
def quadrature(cfg):
    return dict(cfg.quadrature)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def three_decades():
    return log_grid(1.0, 1e3, 10)
