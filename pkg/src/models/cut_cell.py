"""
Модель геометрии одной ячейки с вложенной границей.
"""
from dataclasses import dataclass
from typing import Tuple

REGULAR = 'regular'
CUT = 'cut'
COVERED = 'covered'

CELL_TYPES = (REGULAR, CUT, COVERED)


@dataclass
class CutCellGeometry:
    """
    Геометрические моменты ячейки.

    Центроиды хранятся относительно центра ячейки в долях шага
    (каждая координата в [-1/2, 1/2]). Грани перечисляются парами
    (нижняя, верхняя) по каждой оси. Нормаль границы направлена
    из жидкости в тело.
    """
    cell_type: str = REGULAR
    kappa: float = 1.0
    centroid: Tuple[float, ...] = ()
    apertures: Tuple[float, ...] = ()
    face_centroids: Tuple[Tuple[float, ...], ...] = ()
    eb_area: float = 0.0
    eb_normal: Tuple[float, ...] = ()
    eb_centroid: Tuple[float, ...] = ()

    def __str__(self):
        return f"{self.cell_type} (kappa={self.kappa:.6g})"

    @property
    def ndim(self) -> int:
        return len(self.centroid)

    @classmethod
    def regular(cls, ndim: int) -> 'CutCellGeometry':
        """Полная ячейка без границы"""
        zero = (0.0,) * ndim
        return cls(
            cell_type=REGULAR,
            kappa=1.0,
            centroid=zero,
            apertures=(1.0,) * (2 * ndim),
            face_centroids=tuple(_face_center(ndim, f) for f in range(2 * ndim)),
            eb_area=0.0,
            eb_normal=zero,
            eb_centroid=zero,
        )

    @classmethod
    def covered(cls, ndim: int) -> 'CutCellGeometry':
        """Ячейка целиком внутри тела"""
        zero = (0.0,) * ndim
        return cls(
            cell_type=COVERED,
            kappa=0.0,
            centroid=zero,
            apertures=(0.0,) * (2 * ndim),
            face_centroids=tuple(_face_center(ndim, f) for f in range(2 * ndim)),
            eb_area=0.0,
            eb_normal=zero,
            eb_centroid=zero,
        )

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'cell_type': self.cell_type,
            'kappa': self.kappa,
            'centroid': list(self.centroid),
            'apertures': list(self.apertures),
            'face_centroids': [list(c) for c in self.face_centroids],
            'eb_area': self.eb_area,
            'eb_normal': list(self.eb_normal),
            'eb_centroid': list(self.eb_centroid),
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        return cls(
            cell_type=data.get('cell_type', REGULAR),
            kappa=float(data.get('kappa', 1.0)),
            centroid=tuple(data.get('centroid', ())),
            apertures=tuple(data.get('apertures', ())),
            face_centroids=tuple(tuple(c) for c in data.get('face_centroids', ())),
            eb_area=float(data.get('eb_area', 0.0)),
            eb_normal=tuple(data.get('eb_normal', ())),
            eb_centroid=tuple(data.get('eb_centroid', ())),
        )


def _face_center(ndim: int, face: int) -> Tuple[float, ...]:
    axis, side = divmod(face, 2)
    center = [0.0] * ndim
    center[axis] = 0.5 if side else -0.5
    return tuple(center)
