from pathlib import Path

import numpy as np
import pytest

from schemas.instance_schema import CostMatrix, Geometry, Instance
from services.instance import generate_random, parse_tsplib

DATA_DIR = Path(__file__).parent / "data"


def load_tsplib(name: str) -> Instance:
    return parse_tsplib((DATA_DIR / f"{name}.tsp").read_text(encoding="utf-8"))


def explicit_instance(values, name: str = "explicit") -> Instance:
    matrix = np.asarray(values, dtype=np.float64)
    n = matrix.shape[0]
    return Instance(name=name, n=n, geometry=Geometry.EXPLICIT, costs=CostMatrix(n=n, values=matrix))


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def burma14() -> Instance:
    return load_tsplib("burma14")


@pytest.fixture
def ulysses16() -> Instance:
    return load_tsplib("ulysses16")


@pytest.fixture
def ulysses22() -> Instance:
    return load_tsplib("ulysses22")


@pytest.fixture
def random8() -> Instance:
    return generate_random(8, seed=7)


@pytest.fixture
def random30() -> Instance:
    return generate_random(30, seed=11)


@pytest.fixture
def unit_square() -> Instance:
    """Corners of the unit square with exact diagonals (no rounding)."""
    return Instance(
        name="square",
        n=4,
        geometry=Geometry.EUCLIDEAN_2D,
        rounded=False,
        coords=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
    )


@pytest.fixture
def uniform_costs() -> Instance:
    """Six nodes, every edge of cost 1."""
    values = np.ones((6, 6)) - np.eye(6)
    return explicit_instance(values, name="uniform6")


@pytest.fixture
def uniform5() -> Instance:
    values = np.ones((5, 5)) - np.eye(5)
    return explicit_instance(values, name="uniform5")


@pytest.fixture
def two_cheap_edges() -> Instance:
    """
    Five nodes at cost 20 with edges (0,1) and (2,3) at 19.

    A tour uses 0, 1 or 2 cheap edges, four tours each, so lengths are
    uniform on {98, 99, 100} and the bounded fit is alpha = beta = 1/4 on [98, 100].
    """
    values = np.full((5, 5), 20.0) - 20.0 * np.eye(5)
    for i, j in ((0, 1), (2, 3)):
        values[i, j] = values[j, i] = 19.0
    return explicit_instance(values, name="cheap5")
