"""
Контроль чтения за пределами фиктивного слоя.

Трассировка структурная: по плану определяется, какие ячейки читает
постобработка для рабочих ячеек патча, и их удаление от рабочей
области сравнивается с заявленной шириной слоя.
"""
import itertools
import logging
from typing import Dict, Iterable, Optional

import numpy as np

from config.settings import SOLVER_CONFIG
from src.errors import GhostWidthTooSmall

logger = logging.getLogger(__name__)


class ReadTracker:
    """Учет прочитанных ячеек по видам данных: 'state' и 'geometry'"""

    def __init__(self, limits: Optional[Dict[str, int]] = None):
        self.limits = limits or {
            'state': SOLVER_CONFIG['ghost_postprocess'],
            'geometry': SOLVER_CONFIG['ghost_preprocess'],
        }
        self.touched: Dict[str, set] = {kind: set() for kind in self.limits}

    def touch(self, kind: str, cells: Iterable[int]):
        """Отмечает чтение ячеек (глобальные плоские номера)"""
        self.touched.setdefault(kind, set()).update(int(c) for c in cells)

    def reach(self, grid, kind: str) -> int:
        cells = self.touched.get(kind)
        if not cells:
            return 0
        offsets = self._offsets(grid, np.fromiter(cells, dtype=np.int64))
        return int(np.abs(offsets).max())

    @staticmethod
    def _offsets(grid, cells: np.ndarray) -> np.ndarray:
        index = np.array(grid.unflat(cells))
        lo = np.array(grid.valid_lo)[:, None]
        hi = np.array(grid.valid_hi)[:, None] - 1
        return np.where(index < lo, index - lo, np.where(index > hi, index - hi, 0))

    def check(self, grid):
        """Поднимает GhostWidthTooSmall при чтении дальше заявленной ширины"""
        for kind, cells in self.touched.items():
            if not cells or kind not in self.limits:
                continue
            flat = np.fromiter(sorted(cells), dtype=np.int64)
            offsets = self._offsets(grid, flat)
            distance = np.abs(offsets).max(axis=0)
            worst = int(np.argmax(distance))
            if distance[worst] > self.limits[kind]:
                cell = tuple(int(i) for i in np.array(grid.unflat(flat[worst])))
                raise GhostWidthTooSmall(
                    f"Чтение за пределами слоя ширины {self.limits[kind]}",
                    cell, tuple(int(o) for o in offsets[:, worst]), kind)
        logger.debug(f"Чтения в пределах слоя: {self.limits}")

    def trace(self, plan):
        """Собирает чтения постобработки для рабочих ячеек и проверяет их"""
        self.touched = {kind: set() for kind in self.limits}
        grid = plan.grid
        valid = np.zeros(grid.shape, dtype=bool)
        valid[grid.valid] = True
        outputs = grid.global_flat(np.flatnonzero(valid & ~grid.blocked))

        rows = set()
        for cell in outputs:
            rows.update(plan.W(int(cell)))
        averaged = set(rows)
        candidates = set()
        for row in rows:
            stencil = plan.stencils.get(int(grid.local_flat(row)))
            if stencil is None:
                continue
            averaged.update(int(c) for c in grid.global_flat(stencil.cells))
            candidates.update(int(c) for c in grid.global_flat(stencil.considered))

        members = set()
        for cell in averaged:
            members.update(plan.M(cell))
        self.touch('state', members)

        geometry = set()
        for cell in members:
            geometry.update(_block(grid, cell, 2))
        for cell in candidates:
            geometry.update(_block(grid, cell, 1))
        self.touch('geometry', geometry)
        self.check(grid)


def _block(grid, cell: int, radius: int):
    center = np.array(grid.unflat(cell))
    offsets = itertools.product(range(-radius, radius + 1), repeat=grid.ndim)
    lo = np.array(grid.whole_lo)
    hi = lo + np.array(grid.whole_shape)
    for offset in offsets:
        index = center + np.array(offset)
        if np.all((index >= lo) & (index < hi)):
            yield int(grid.flat(tuple(index)))
