import numpy as np
import pytest

from bellcert import ScenarioShape


TWO_TWO = ScenarioShape(1, (2,), (2,), 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def two_two_shape():
    return TWO_TWO


def assert_operators_close(actual, expected, atol=1e-12):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    assert actual.shape == expected.shape
    assert np.abs(actual - expected).max() <= atol, (
        f"operators differ by {np.abs(actual - expected).max():.3e}"
    )
