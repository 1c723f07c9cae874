import numpy as np
import pytest

from tankfdi import fuzzy, plant

OPERATING_INPUTS = (1.0, 0.8)


@pytest.fixture
def params():
    return plant.PlantParams()


@pytest.fixture
def unit_params():
    return plant.PlantParams(C1=1, C2=1, C3=1, R1=1, R2=1, R3=1, R12=1, R23=1)


@pytest.fixture
def tuned_cfg():
    return fuzzy.example_tuned_config("swarm")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
