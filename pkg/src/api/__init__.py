"""
Программный интерфейс экспериментов.
"""
from .experiments import (
    RunResult, build_geometry, build_grid, compare, compare_line, dump_plan,
    initial_field, profile_rows, run_experiment, sweep,
)

__all__ = [
    'RunResult',
    'build_geometry',
    'build_grid',
    'compare',
    'compare_line',
    'dump_plan',
    'initial_field',
    'profile_rows',
    'run_experiment',
    'sweep',
]
