import numpy as np
import pytest

from kicktops.spin import SpinMagnitude
from kicktops.states import QuantumState


def random_state(s, l, rng) -> QuantumState:
    s, l = SpinMagnitude.from_value(s), SpinMagnitude.from_value(l)
    a = rng.normal(size=(s.dim, l.dim)) + 1j * rng.normal(size=(s.dim, l.dim))
    return QuantumState(s, l, a / np.linalg.norm(a))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
