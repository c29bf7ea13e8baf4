import numpy as np
import pytest

from pegsol.boards import make_geometry
from pegsol.layers import PartitionConfig
from pegsol.posclass import enumerate_types
from pegsol.windb import build_type_database


@pytest.fixture(scope="session")
def t5():
    return make_geometry("triangle5")


@pytest.fixture(scope="session")
def t4():
    return make_geometry("triangle4")


@pytest.fixture(scope="session")
def e33():
    return make_geometry("english33")


@pytest.fixture(scope="session")
def t5_type(t5):
    """Full triangle5 type build: (TypeDatabase, complement DBs, superset)."""
    ptype = enumerate_types("triangle5")[0]
    return build_type_database(ptype, t5, PartitionConfig())


@pytest.fixture(scope="session")
def t4_type(t4):
    ptype = enumerate_types("triangle4")[0]
    return build_type_database(ptype, t4, PartitionConfig())


def assert_sorted_unique(codes: np.ndarray) -> None:
    assert codes.dtype == np.uint64
    if codes.size:
        assert np.all(np.diff(codes.view(np.int64)) > 0)
