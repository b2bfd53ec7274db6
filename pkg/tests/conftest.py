import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_subspace(rng: np.random.Generator, n: int, d: int):
    """Random d-dimensional subspace of R^n."""
    from deadbeat import subspace as sub

    if d == 0:
        return sub.zero_subspace(n)
    return sub.column_space(rng.standard_normal((n, d)))
