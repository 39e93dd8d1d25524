"""
Поле консервативных величин на расширенной области сетки.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from config.settings import SOLVER_CONFIG
from src.errors import NonFiniteState
from src.mesh.ebgrid import EBGrid


@dataclass
class Field:
    """Значения формы (ncomp, *grid.shape) и момент времени"""
    grid: EBGrid
    values: np.ndarray
    time: float = 0.0

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zeros(cls, grid: EBGrid, ncomp: int = 1) -> 'Field':
        return cls(grid, np.zeros((ncomp,) + tuple(grid.shape)))

    @classmethod
    def from_function(cls, grid: EBGrid, function: Callable[[np.ndarray], np.ndarray]) -> 'Field':
        """Значения функции в центроидах ячеек; покрытые ячейки обнуляются"""
        values = np.asarray(function(grid.positions()), dtype=float)
        values = values.reshape((-1,) + tuple(grid.shape))
        values = np.where(grid.covered, 0.0, values)
        return cls(grid, values)

    def copy(self) -> 'Field':
        return Field(self.grid, self.values.copy(), self.time)

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> 'Field':
        return Field(self.grid, values, self.time if time is None else time)

    def valid_values(self) -> np.ndarray:
        return self.values[(slice(None),) + self.grid.valid]

    def total(self) -> np.ndarray:
        """Сумма V*U по рабочим ячейкам для каждой компоненты"""
        volume = self.grid.volume[self.grid.valid]
        return np.array([np.sum(volume * u) for u in self.valid_values()])

    def check_finite(self, limit: Optional[float] = None):
        """Проверяет, что решение в рабочих ячейках конечно и ограничено"""
        limit = SOLVER_CONFIG['blowup_limit'] if limit is None else limit
        values = self.valid_values()
        bad = ~np.isfinite(values) | (np.abs(values) > limit)
        bad &= ~self.grid.covered[self.grid.valid]
        if np.any(bad):
            where = np.argwhere(bad)[0]
            cell = tuple(int(i) + v for i, v in zip(where[1:], self.grid.valid_lo))
            raise NonFiniteState(f"Решение стало неконечным на t={self.time:.6g}", cell)
