import numpy as np
import pytest

from groupsense import Group, default_model, feature_matrix, generate_random_chart


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # One throwaway call so JIT compilation never lands inside a timed test.
    chart = generate_random_chart(6, seed=0)
    feature_matrix(chart, [Group(["A", "B"])])


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture()
def chart6():
    return generate_random_chart(6, seed=42)
