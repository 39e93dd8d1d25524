"""
Общие фикстуры тестов.
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.geometry import ramp
from src.mesh import Field, build_ebgrid
from src.models import Boundary, GridSpec

OUTFLOW = (Boundary('outflow'), Boundary('outflow'))
PERIODIC = (Boundary('periodic'), Boundary('periodic'))


def ramp_spec(cells=(16, 8), boundaries=None) -> GridSpec:
    h = 1.0 / cells[0]
    return GridSpec(cells=cells, spacing=(h,) * len(cells),
                    boundaries=boundaries or tuple(OUTFLOW for _ in cells))


def ramp_grid(angle=40.0, cells=(16, 8), ghost=5, wall_y=0.1, offset=0.0, boundaries=None):
    """Сетка с наклонной стенкой через точку (0, wall_y + offset * h)"""
    spec = ramp_spec(cells, boundaries)
    point = np.zeros(len(cells))
    point[1] = wall_y + offset * spec.spacing[1]
    return build_ebgrid(ramp(angle, point), spec, ghost)


def random_field(grid, seed=0, ncomp=1) -> Field:
    rng = np.random.default_rng(seed)
    values = rng.uniform(-1.0, 1.0, size=(ncomp,) + tuple(grid.shape))
    return Field(grid, np.where(grid.covered, 0.0, values))


def linear_field(grid, coefficients=(0.3, 1.0, -2.0, 0.5)) -> Field:
    def function(x):
        value = coefficients[0]
        for d in range(grid.ndim):
            value = value + coefficients[d + 1] * x[d]
        return value
    return Field.from_function(grid, function)


@pytest.fixture
def ramp40():
    return ramp_grid(40.0)


@pytest.fixture
def ramp40_small():
    """Та же стенка, с малыми ячейками до kappa_min"""
    return ramp_grid(40.0, wall_y=0.1 + 0.0001)
