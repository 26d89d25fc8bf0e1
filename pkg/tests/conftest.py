import numpy as np
import pytest

from fracreg.grids import Grid, GridFunction, build_ball_domain


@pytest.fixture
def grid1d():
    return Grid.box(1, 1 / 16, 4.0)


@pytest.fixture
def grid2d():
    return Grid.box(2, 1 / 8, 2.0)


@pytest.fixture
def ball1(grid1d):
    return build_ball_domain(grid1d, [0.0], 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_function(grid, rng, exterior=0.0):
    return GridFunction(grid, rng.normal(size=grid.shape), exterior=exterior)
