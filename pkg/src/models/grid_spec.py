"""
Модель равномерной фоновой сетки.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

BOUNDARY_KINDS = ('periodic', 'inflow', 'outflow')


@dataclass(frozen=True)
class Boundary:
    """Граничное условие на одной стороне области"""
    kind: str = 'periodic'
    value: float = 0.0

    def __str__(self):
        if self.kind == 'inflow':
            return f"inflow({self.value!r})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> 'Boundary':
        """Создает условие из строки вида 'inflow(1.0)'"""
        text = text.strip().lower()
        if text.startswith('inflow'):
            inner = text[len('inflow'):].strip()
            value = 0.0
            if inner:
                if not (inner.startswith('(') and inner.endswith(')')):
                    raise ValueError(f"Неверная запись условия: {text}")
                value = float(inner[1:-1])
            return cls('inflow', value)
        if text not in BOUNDARY_KINDS:
            raise ValueError(f"Неизвестное граничное условие: {text}")
        return cls(text)


@dataclass
class GridSpec:
    """Описание сетки: число ячеек, шаги, начало и граничные условия"""
    cells: Tuple[int, ...] = (8, 8)
    spacing: Tuple[float, ...] = (1.0, 1.0)
    origin: Tuple[float, ...] = ()
    boundaries: Tuple[Tuple[Boundary, Boundary], ...] = ()

    def __post_init__(self):
        self.cells = tuple(int(n) for n in self.cells)
        self.spacing = tuple(float(h) for h in self.spacing)
        if not self.origin:
            self.origin = (0.0,) * len(self.cells)
        self.origin = tuple(float(o) for o in self.origin)
        if not self.boundaries:
            self.boundaries = tuple((Boundary(), Boundary()) for _ in self.cells)
        self.boundaries = tuple(tuple(pair) for pair in self.boundaries)

    @property
    def ndim(self) -> int:
        return len(self.cells)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def periodic(self, axis: int) -> bool:
        return self.boundaries[axis][0].kind == 'periodic'

    def validate(self):
        """Проверяет инварианты сетки, возвращает (ok, сообщение)"""
        if self.ndim not in (2, 3):
            return False, "Поддерживаются только размерности 2 и 3"
        if len(self.spacing) != self.ndim or len(self.origin) != self.ndim:
            return False, "Размерности шагов и начала не совпадают с числом ячеек"
        if len(self.boundaries) != self.ndim:
            return False, "Граничные условия должны быть заданы для каждой оси"
        if any(n <= 0 for n in self.cells):
            return False, "Число ячеек должно быть положительным"
        if any(h <= 0 for h in self.spacing):
            return False, "Шаг сетки должен быть положительным"
        for axis, (lo, hi) in enumerate(self.boundaries):
            if (lo.kind == 'periodic') != (hi.kind == 'periodic'):
                return False, f"Периодические стороны оси {axis} должны быть парными"
        return True, None

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'cells': list(self.cells),
            'spacing': list(self.spacing),
            'origin': list(self.origin),
            'boundaries': [[str(lo), str(hi)] for lo, hi in self.boundaries],
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        boundaries = data.get('boundaries') or ()
        return cls(
            cells=tuple(data.get('cells', (8, 8))),
            spacing=tuple(data.get('spacing', (1.0, 1.0))),
            origin=tuple(data.get('origin', ())),
            boundaries=tuple(
                (Boundary.parse(lo), Boundary.parse(hi)) for lo, hi in boundaries
            ),
        )
