"""
Модели данных инструментария.
"""
from .grid_spec import Boundary, GridSpec
from .cut_cell import CutCellGeometry, COVERED, CUT, REGULAR
from .scheme import SchemeConfig, SrdSettings, STABILIZERS
from .experiment import ExperimentConfig, GeometrySpec, RunSpec, OutputSpec

__all__ = [
    'Boundary',
    'GridSpec',
    'CutCellGeometry',
    'COVERED',
    'CUT',
    'REGULAR',
    'SchemeConfig',
    'SrdSettings',
    'STABILIZERS',
    'ExperimentConfig',
    'GeometrySpec',
    'RunSpec',
    'OutputSpec',
]
