import numpy as np
import pytest

from distanova.core import GroupAssignment, gower_center, group_projector
from distanova.distances import pairwise_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def line4():
    """Scalar data (0, 1, 2, 3) in groups {1, 2} and {3, 4}."""
    y = np.array([0.0, 1.0, 2.0, 3.0])
    labels = np.array([0, 0, 1, 1])
    return y, labels


@pytest.fixture
def line4_parts(line4):
    y, labels = line4
    gower = gower_center(pairwise_matrix(y, "euclidean"))
    return gower, group_projector(labels), GroupAssignment.from_labels(labels)


def random_scalar_problem(rng, n, g):
    labels = np.concatenate([np.arange(g), rng.integers(0, g, size=n - g)])
    labels = rng.permutation(labels)
    y = rng.normal(size=n)
    return y, labels
