"""
Построение окрестностей слияния и счетчиков перекрытий.

Малая ячейка сливается с соседом в направлении, ближайшем к нормали
границы; при необходимости окрестность дополняется до блока 2x2
(2x2x2 в 3D), чтобы не получить L-образную форму. Если и этого мало,
берется центральный блок 3^d.
"""
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import NeighborhoodTooSmall
from src.mesh.ebgrid import EBGrid
from src.models import SrdSettings

logger = logging.getLogger(__name__)

Members = Dict[int, Tuple[int, ...]]


class _Builder:
    """Построитель окрестностей для одной сетки"""

    def __init__(self, grid: EBGrid, settings: SrdSettings):
        self.grid = grid
        self.settings = settings
        self.volume = grid.volume
        self.blocked = grid.blocked
        self.ring = grid.ring()
        full = grid.spec.cell_volume
        self.threshold = settings.v_target * full - settings.merge_tol * full

    def is_open(self, cell: Tuple[int, ...]) -> bool:
        if any(i < 0 or i >= s for i, s in zip(cell, self.grid.shape)):
            return False
        return not self.blocked[cell]

    def enough(self, cells: Sequence[Tuple[int, ...]]) -> bool:
        return sum(self.volume[c] for c in cells) >= self.threshold

    def step(self, cell, axis: int, direction: int) -> Tuple[int, ...]:
        out = list(cell)
        out[axis] += direction
        return tuple(out)

    def direction(self, cell, normal: np.ndarray, axis: int) -> int:
        # Сосед со стороны жидкости: против нормали
        if normal[axis] > 0.0:
            return -1
        if normal[axis] < 0.0:
            return 1
        lower, upper = self.step(cell, axis, -1), self.step(cell, axis, 1)
        v_lower = self.volume[lower] if self.is_open(lower) else -1.0
        v_upper = self.volume[upper] if self.is_open(upper) else -1.0
        return 1 if v_upper >= v_lower else -1

    def axis_order(self, magnitude: np.ndarray) -> List[int]:
        ndim = len(magnitude)
        by_normal = sorted(range(ndim), key=lambda d: -magnitude[d])
        mode = self.settings.merge_mode
        if mode == 'vertical':
            return [ndim - 1] + [d for d in by_normal if d != ndim - 1]
        if mode == 'horizontal':
            return [0] + [d for d in by_normal if d != 0]
        return by_normal

    def block(self, cell, axes: Sequence[int], directions: Dict[int, int]) -> List[Tuple[int, ...]]:
        """Открытые ячейки блока 2x..x2 по осям axes, владелец первым"""
        out = []
        for bits in itertools.product((0, 1), repeat=len(axes)):
            other = list(cell)
            for axis, bit in zip(axes, bits):
                other[axis] += bit * directions[axis]
            other = tuple(other)
            if self.is_open(other):
                out.append(other)
        return out

    def central(self, cell) -> List[Tuple[int, ...]]:
        out = [cell]
        for offset in itertools.product((-1, 0, 1), repeat=self.grid.ndim):
            other = tuple(c + o for c, o in zip(cell, offset))
            if other != cell and self.is_open(other):
                out.append(other)
        if self.enough(out):
            return out
        if self.ring[cell] == 0:
            raise NeighborhoodTooSmall(
                "Окрестность не набирает целевой объем даже в блоке 3^d",
                tuple(int(c) + l for c, l in zip(cell, self.grid.lo)))
        logger.debug(f"Фиктивная ячейка {cell} оставлена без слияния")
        return [cell]

    def neighborhood(self, cell) -> List[Tuple[int, ...]]:
        if self.settings.merge_mode == 'central':
            return self.central(cell)
        normal = self.grid.eb_normal[(slice(None),) + cell]
        magnitude = np.abs(normal)
        order = self.axis_order(magnitude)
        directions = {d: self.direction(cell, normal, d) for d in order}

        if self.settings.merge_mode == 'normal' and self.grid.ndim > 1:
            lead = magnitude[order]
            tol = self.settings.tol_sym * lead[0]
            if lead[0] > 0.0 and lead[0] - lead[1] <= tol:
                axes = order[:2]
                if self.grid.ndim == 3 and lead[1] - lead[2] <= tol:
                    axes = order[:3]
                cells = self.block(cell, axes, directions)
                return cells if self.enough(cells) else self.central(cell)

        open_axes = [d for d in order if self.is_open(self.step(cell, d, directions[d]))]
        if not open_axes:
            return self.central(cell)
        first = open_axes[0]
        cells = [cell, self.step(cell, first, directions[first])]
        if self.enough(cells):
            return cells
        if len(open_axes) >= 2:
            cells = self.block(cell, open_axes[:2], directions)
            if self.enough(cells):
                return cells
        if len(open_axes) >= 3:
            cells = self.block(cell, open_axes[:3], directions)
            if self.enough(cells):
                return cells
        return self.central(cell)


def build_neighborhoods(grid: EBGrid, settings: Optional[SrdSettings] = None) -> Members:
    """
    Окрестности слияния малых ячеек.

    Возвращает словарь только для сливающихся ячеек: глобальный номер
    владельца -> глобальные номера членов (владелец первым). Для
    остальных открытых ячеек окрестность состоит из них самих.
    """
    settings = settings or SrdSettings()
    builder = _Builder(grid, settings)
    small = (~builder.blocked) & (builder.volume < builder.threshold) & (builder.ring <= grid.ghost - 1)
    members: Members = {}
    for cell in np.argwhere(small):
        cell = tuple(int(i) for i in cell)
        local = builder.neighborhood(cell)
        if len(local) < 2:
            continue
        index = tuple(np.array(local).T)
        flats = grid.global_flat(np.ravel_multi_index(index, grid.shape))
        members[int(flats[0])] = tuple(int(f) for f in flats)
    return members


def compute_overlaps(grid: EBGrid, members: Members) -> Tuple[np.ndarray, Dict[int, Tuple[int, ...]]]:
    """
    Счетчики перекрытий N и обратные списки W.

    N_i считает все окрестности, содержащие i, включая собственную;
    покрытые ячейки имеют N = 0. W хранится для ячеек, входящих
    в чужие окрестности; для остальных W_i = {i}.
    """
    overlap = (~grid.blocked).astype(int)
    containing: Dict[int, List[int]] = {}
    for owner, cells in members.items():
        for cell in cells[1:]:
            containing.setdefault(cell, []).append(owner)
    overlap_sets = {}
    for cell, owners in containing.items():
        local = np.unravel_index(grid.local_flat(cell), grid.shape)
        overlap[local] += len(owners)
        overlap_sets[cell] = (cell,) + tuple(sorted(owners))
    return overlap, overlap_sets
