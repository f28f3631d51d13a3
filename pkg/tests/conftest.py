import numpy as np
import pytest

from multitime import Partition, Schedule, StateVector
from multitime.protocols import TWO_WAY_TOTAL


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(partition: Partition, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=partition.total_dim) + 1j * rng.normal(size=partition.total_dim)
    amps /= np.linalg.norm(amps)
    return StateVector(partition, amps)


def random_two_way_schedule(rng: np.random.Generator, n: int) -> Schedule:
    x = rng.random(n) + 0.01
    return Schedule(x / (2.0 * x.sum()), TWO_WAY_TOTAL)
