"""
Геометрия тела: неявные функции и моменты ячеек.
"""
from src.geometry.implicit import (
    Box, Constant, Cylinder, Difference, HalfSpace, ImplicitFn, Intersection,
    LocalForm, Rotate, Sphere, Translate, Union, evaluate_csg, ramp,
)
from src.geometry.cut_cell import cell_box, close_cell, compute_cut_geometry, cut_cell_moments
from src.geometry.parser import parse_csg
