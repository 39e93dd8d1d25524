"""
Разбиение области на патчи и обмен фиктивными ячейками.

Патчи обмениваются через таблицу сообщений внутри процесса: сначала
каждый владелец кладет свои значения в таблицу, затем каждый
получатель забирает их. Обмен служит точкой синхронизации.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import DecomposeError
from src.mesh.field import Field
from src.models import GridSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Patch:
    """Прямоугольник рабочих ячеек [lo, hi) с фиктивным слоем ghost"""
    rank: int
    lo: Tuple[int, ...]
    hi: Tuple[int, ...]
    ghost: int
    neighbors: Tuple[int, ...] = ()

    def __str__(self):
        return f"Патч {self.rank}: {self.lo}..{self.hi}"

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def padded_shape(self) -> Tuple[int, ...]:
        return tuple(s + 2 * self.ghost for s in self.shape)


def _smallest_factor(n: int) -> int:
    for p in range(2, int(n ** 0.5) + 1):
        if n % p == 0:
            return p
    return n


def _split(lo, hi, count: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    if count == 1:
        return [(tuple(lo), tuple(hi))]
    parts = _smallest_factor(count)
    widths = [h - l for l, h in zip(lo, hi)]
    axis = int(np.argmax(widths))
    base, extra = divmod(widths[axis], parts)
    boxes = []
    start = lo[axis]
    for k in range(parts):
        width = base + (1 if k < extra else 0)
        sub_lo, sub_hi = list(lo), list(hi)
        sub_lo[axis], sub_hi[axis] = start, start + width
        start += width
        boxes.extend(_split(sub_lo, sub_hi, count // parts))
    return boxes


def decompose(spec: GridSpec, n_patches: int, ghost: int) -> List[Patch]:
    """
    Разбивает область на n_patches прямоугольников.

    Самая длинная ось делится на p частей (p - наименьший простой
    делитель), большие части идут первыми; далее рекурсивно.
    """
    if n_patches < 1:
        raise DecomposeError(f"Неверное число патчей: {n_patches}")
    boxes = _split((0,) * spec.ndim, spec.cells, n_patches)
    for lo, hi in boxes:
        thinnest = min(h - l for l, h in zip(lo, hi))
        if thinnest < max(ghost, 1):
            raise DecomposeError(
                f"Патч {lo}..{hi} тоньше фиктивного слоя ({thinnest} < {ghost})")
    patches = [Patch(rank, lo, hi, ghost) for rank, (lo, hi) in enumerate(boxes)]
    schedule = GhostSchedule(spec, patches)
    patches = [Patch(p.rank, p.lo, p.hi, p.ghost, schedule.senders(p.rank)) for p in patches]
    logger.info(f"Область {spec.cells} разбита на {len(patches)} патчей")
    return patches


class GhostSchedule:
    """Расписание обмена: откуда каждый фиктивный элемент получает значение"""

    def __init__(self, spec: GridSpec, patches: Sequence[Patch]):
        self.spec = spec
        self.patches = list(patches)
        owner = np.full(spec.cells, -1, dtype=int)
        for p in self.patches:
            owner[tuple(slice(l, h) for l, h in zip(p.lo, p.hi))] = p.rank
        if np.any(owner < 0):
            raise DecomposeError("Патчи не покрывают область")
        self.owner = owner
        # (источник, получатель) -> (индексы у источника, индексы у получателя)
        self.routes: Dict[Tuple[int, int], Tuple[tuple, tuple]] = {}
        # получатель -> [(индексы, значение)] для втекания
        self.inflow: Dict[int, List[Tuple[tuple, float]]] = {}
        for p in self.patches:
            self._plan(p)

    def _plan(self, patch: Patch):
        ndim = self.spec.ndim
        g = patch.ghost
        local = np.indices(patch.padded_shape).reshape(ndim, -1)
        glob = local + (np.array(patch.lo) - g)[:, None]
        inside = np.all((local >= g) & (local < np.array(patch.padded_shape)[:, None] - g), axis=0)
        local, glob = local[:, ~inside], glob[:, ~inside]

        mapped = glob.copy()
        inflow_value = np.full(glob.shape[1], np.nan)
        for d, n in enumerate(self.spec.cells):
            lo_side, hi_side = self.spec.boundaries[d]
            if lo_side.kind == 'periodic':
                mapped[d] %= n
                continue
            below, above = glob[d] < 0, glob[d] >= n
            if lo_side.kind == 'inflow':
                inflow_value[below & np.isnan(inflow_value)] = lo_side.value
            if hi_side.kind == 'inflow':
                inflow_value[above & np.isnan(inflow_value)] = hi_side.value
            mapped[d] = np.clip(mapped[d], 0, n - 1)

        is_inflow = ~np.isnan(inflow_value)
        for value in np.unique(inflow_value[is_inflow]):
            pick = is_inflow & (inflow_value == value)
            self.inflow.setdefault(patch.rank, []).append((tuple(local[:, pick]), float(value)))

        local, mapped = local[:, ~is_inflow], mapped[:, ~is_inflow]
        owners = self.owner[tuple(mapped)]
        for src in np.unique(owners):
            pick = owners == src
            source = self.patches[src]
            src_local = mapped[:, pick] - (np.array(source.lo) - source.ghost)[:, None]
            self.routes[(int(src), patch.rank)] = (tuple(src_local), tuple(local[:, pick]))

    def senders(self, rank: int) -> Tuple[int, ...]:
        return tuple(sorted(src for src, dst in self.routes if dst == rank and src != rank))

    def fill(self, fields: Sequence[Field]):
        """Заполняет фиктивные ячейки всех патчей; рабочие не меняются"""
        table = {}
        for (src, dst), (src_index, _) in self.routes.items():
            table[(src, dst)] = fields[src].values[(slice(None),) + src_index].copy()
        for (src, dst), (_, dst_index) in self.routes.items():
            fields[dst].values[(slice(None),) + dst_index] = table[(src, dst)]
        for dst, entries in self.inflow.items():
            for index, value in entries:
                fields[dst].values[(slice(None),) + index] = value


def fill_ghost(fields: Sequence[Field], patches: Sequence[Patch],
               schedule: Optional[GhostSchedule] = None) -> Sequence[Field]:
    """
    Обмен фиктивными ячейками между патчами.

    fields[r] - поле патча с рангом r. Операция идемпотентна. Без готового
    расписания оно строится заново; решатель хранит свое расписание.
    """
    if schedule is None:
        for patch, field in zip(patches, fields):
            if field.grid.ghost != patch.ghost:
                raise ValueError(f"Фиктивный слой поля не совпадает с патчем {patch.rank}")
        schedule = GhostSchedule(fields[0].grid.spec, patches)
    schedule.fill(fields)
    return fields


def scatter_field(field: Field, patches: Sequence[Patch], grids) -> List[Field]:
    """Раскладывает поле всей области по патчам (рабочие и фиктивные ячейки)"""
    whole = field.grid
    fields = []
    for patch, grid in zip(patches, grids):
        start = [l - sl for l, sl in zip(grid.lo, whole.lo)]
        cells = tuple(slice(a, a + s) for a, s in zip(start, grid.shape))
        fields.append(Field(grid, field.values[(slice(None),) + cells].copy(), field.time))
    return fields


def gather_fields(fields: Sequence[Field], patches: Sequence[Patch], whole) -> Field:
    """Собирает рабочие ячейки патчей в поле всей области"""
    ncomp = fields[0].ncomp
    values = np.zeros((ncomp,) + tuple(whole.shape))
    for patch, field in zip(patches, fields):
        target = tuple(slice(l - sl, h - sl) for l, h, sl in zip(patch.lo, patch.hi, whole.lo))
        values[(slice(None),) + target] = field.valid_values()
    out = Field(whole, values, fields[0].time)
    fill_ghost([out], [Patch(0, (0,) * whole.ndim, whole.spec.cells, whole.ghost)])
    return out
