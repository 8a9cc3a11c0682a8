import pytest

from pa_multigraph.growth import ConstantGrowth, GrowthTable, LinearFloorGrowth, PowerOfTwoSpikeGrowth
from pa_multigraph.multigraph import Multigraph


@pytest.fixture
def linear():
    """f(t) = t with the single-edge seed on two nodes."""
    return LinearFloorGrowth(c="1", e_prime=1, v_prime=2)


@pytest.fixture
def constant2():
    return ConstantGrowth(C=2, e_prime=1, v_prime=2)


@pytest.fixture
def spike():
    return PowerOfTwoSpikeGrowth(e_prime=1, v_prime=2)


@pytest.fixture
def single_edge():
    return Multigraph.new_seed([(1, 2)], 2)


@pytest.fixture
def linear_table(linear):
    return GrowthTable.build(linear, 100)
