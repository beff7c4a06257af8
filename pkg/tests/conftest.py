import numpy as np
import pytest

from qgatsp.tsplib import distance_matrix, load_instance, parse_instance

TRIANGLE = """NAME: triangle
TYPE: TSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 0
3 0 4
EOF
"""

SQUARE = """NAME: square
DIMENSION: 4
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 1 0
3 1 1
4 0 1
"""


@pytest.fixture
def triangle():
    return parse_instance(TRIANGLE)


@pytest.fixture
def square():
    return parse_instance(SQUARE)


@pytest.fixture(scope="session")
def burma14():
    return load_instance("burma14")


@pytest.fixture(scope="session")
def burma14_dmat(burma14):
    return distance_matrix(burma14)


def random_dmat(n, seed):
    """Euclidean matrix of ``n`` uniform points in the unit square."""
    pts = np.random.default_rng(seed).random((n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def coords_text(points, name="rand"):
    rows = "\n".join(f"{k} {x!r} {y!r}" for k, (x, y) in enumerate(points, start=1))
    return (f"NAME: {name}\nTYPE: TSP\nDIMENSION: {len(points)}\n"
            f"EDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n{rows}\nEOF\n")
