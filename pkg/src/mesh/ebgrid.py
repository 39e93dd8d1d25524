"""
Фоновая сетка с базой геометрии ячеек.

Все массивы хранятся над расширенной областью (рабочие ячейки плюс
фиктивный слой), порядок осей (i, j[, k]). Апертуры по оси d хранятся
для нижней грани каждой ячейки и имеют на одну грань больше по оси d.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import SOLVER_CONFIG
from src.geometry.cut_cell import close_cell, cut_cell_moments
from src.geometry.implicit import ImplicitFn
from src.models import COVERED, CUT, REGULAR, Boundary, CutCellGeometry, GridSpec

logger = logging.getLogger(__name__)

COVERED_CODE, CUT_CODE, REGULAR_CODE = 0, 1, 2
TYPE_CODES = {COVERED: COVERED_CODE, CUT: CUT_CODE, REGULAR: REGULAR_CODE}
TYPE_NAMES = {code: name for name, code in TYPE_CODES.items()}


@dataclass
class EBGrid:
    """
    Геометрия над прямоугольником глобальных индексов [lo, lo + shape).

    whole_lo и whole_shape описывают всю расширенную сетку и задают
    глобальную плоскую нумерацию ячеек, общую для всех патчей.
    """
    spec: GridSpec
    ghost: int
    lo: Tuple[int, ...]
    shape: Tuple[int, ...]
    whole_lo: Tuple[int, ...]
    whole_shape: Tuple[int, ...]
    cell_type: np.ndarray
    kappa: np.ndarray
    centroid: np.ndarray
    apertures: List[np.ndarray]
    face_centroid: List[np.ndarray]
    eb_area: np.ndarray
    eb_normal: np.ndarray
    eb_centroid: np.ndarray
    physical_ghost: np.ndarray

    @property
    def ndim(self) -> int:
        return self.spec.ndim

    @property
    def spacing(self) -> np.ndarray:
        return np.asarray(self.spec.spacing)

    @property
    def valid_lo(self) -> Tuple[int, ...]:
        return tuple(l + self.ghost for l in self.lo)

    @property
    def valid_hi(self) -> Tuple[int, ...]:
        return tuple(l + s - self.ghost for l, s in zip(self.lo, self.shape))

    @property
    def valid(self) -> Tuple[slice, ...]:
        """Срез рабочих ячеек в расширенных массивах"""
        return tuple(slice(self.ghost, s - self.ghost) for s in self.shape)

    @property
    def volume(self) -> np.ndarray:
        return self.kappa * self.spec.cell_volume

    @property
    def covered(self) -> np.ndarray:
        return self.cell_type == COVERED_CODE

    @property
    def cut(self) -> np.ndarray:
        return self.cell_type == CUT_CODE

    @property
    def blocked(self) -> np.ndarray:
        """Ячейки, недоступные для окрестностей: покрытые и физические фиктивные"""
        return self.covered | self.physical_ghost

    def global_index(self) -> np.ndarray:
        """Глобальные индексы ячеек, форма (ndim, *shape)"""
        axes = [np.arange(l, l + s) for l, s in zip(self.lo, self.shape)]
        return np.array(np.meshgrid(*axes, indexing='ij'))

    def positions(self) -> np.ndarray:
        """Физические центроиды ячеек, форма (ndim, *shape)"""
        h = self.spacing.reshape((-1,) + (1,) * self.ndim)
        origin = np.asarray(self.spec.origin).reshape(h.shape)
        return origin + (self.global_index() + 0.5 + self.centroid) * h

    def flat(self, index: Sequence[np.ndarray]) -> np.ndarray:
        """Глобальный плоский номер по глобальным индексам"""
        shifted = [np.asarray(i) - wl for i, wl in zip(index, self.whole_lo)]
        return np.ravel_multi_index(shifted, self.whole_shape)

    def unflat(self, flat) -> Tuple[np.ndarray, ...]:
        """Глобальные индексы по плоскому номеру"""
        index = np.unravel_index(flat, self.whole_shape)
        return tuple(i + wl for i, wl in zip(index, self.whole_lo))

    def local(self, index: Sequence) -> Tuple:
        """Индексы в расширенных массивах по глобальным"""
        return tuple(np.asarray(i) - l for i, l in zip(index, self.lo))

    def local_flat(self, flat) -> np.ndarray:
        """Плоский номер в расширенных массивах по глобальному плоскому номеру"""
        return np.ravel_multi_index(self.local(self.unflat(flat)), self.shape)

    def global_flat(self, local_flat) -> np.ndarray:
        """Глобальный плоский номер по номеру в расширенных массивах"""
        index = np.unravel_index(local_flat, self.shape)
        return self.flat(tuple(i + l for i, l in zip(index, self.lo)))

    def ring(self) -> np.ndarray:
        """Чебышевское расстояние каждой ячейки до рабочей области"""
        dist = np.zeros(self.shape, dtype=int)
        for d in range(self.ndim):
            i = np.arange(self.shape[d])
            g = self.ghost
            along = np.maximum(np.maximum(g - i, i - (self.shape[d] - 1 - g)), 0)
            dist = np.maximum(dist, along.reshape([-1 if e == d else 1 for e in range(self.ndim)]))
        return dist

    def cell(self, index: Sequence[int]) -> CutCellGeometry:
        """Запись геометрии ячейки по глобальному индексу"""
        p = self.local(index)
        ndim = self.ndim
        apertures, face_centroids = [], []
        for d in range(ndim):
            upper = list(p)
            upper[d] += 1
            for side, at in ((-0.5, tuple(p)), (0.5, tuple(upper))):
                apertures.append(float(self.apertures[d][at]))
                center = [float(c) for c in self.face_centroid[d][(slice(None),) + at]]
                center[d] = side
                face_centroids.append(tuple(center))
        return CutCellGeometry(
            cell_type=TYPE_NAMES[int(self.cell_type[tuple(p)])],
            kappa=float(self.kappa[tuple(p)]),
            centroid=tuple(float(c) for c in self.centroid[(slice(None),) + tuple(p)]),
            apertures=tuple(apertures),
            face_centroids=tuple(face_centroids),
            eb_area=float(self.eb_area[tuple(p)]),
            eb_normal=tuple(float(c) for c in self.eb_normal[(slice(None),) + tuple(p)]),
            eb_centroid=tuple(float(c) for c in self.eb_centroid[(slice(None),) + tuple(p)]),
        )

    def counts(self) -> Dict[str, int]:
        """Число рабочих ячеек каждого типа"""
        types = self.cell_type[self.valid]
        return {name: int(np.count_nonzero(types == code)) for name, code in TYPE_CODES.items()}

    def restrict(self, lo: Sequence[int], hi: Sequence[int], ghost: int) -> 'EBGrid':
        """Представление патча [lo, hi) с фиктивным слоем ghost"""
        start = [l - ghost - sl for l, sl in zip(lo, self.lo)]
        stop = [h + ghost - sl for h, sl in zip(hi, self.lo)]
        if min(start) < 0 or any(e > s for e, s in zip(stop, self.shape)):
            raise ValueError("Патч выходит за пределы геометрии")
        cells = tuple(slice(a, b) for a, b in zip(start, stop))
        vec = (slice(None),) + cells
        faces = []
        for d in range(self.ndim):
            sl = list(cells)
            sl[d] = slice(start[d], stop[d] + 1)
            faces.append(tuple(sl))
        return EBGrid(
            spec=self.spec,
            ghost=ghost,
            lo=tuple(l - ghost for l in lo),
            shape=tuple(b - a for a, b in zip(start, stop)),
            whole_lo=self.whole_lo,
            whole_shape=self.whole_shape,
            cell_type=self.cell_type[cells],
            kappa=self.kappa[cells],
            centroid=self.centroid[vec],
            apertures=[a[f] for a, f in zip(self.apertures, faces)],
            face_centroid=[fc[(slice(None),) + f] for fc, f in zip(self.face_centroid, faces)],
            eb_area=self.eb_area[cells],
            eb_normal=self.eb_normal[vec],
            eb_centroid=self.eb_centroid[vec],
            physical_ghost=self.physical_ghost[cells],
        )

    @classmethod
    def synthetic(cls, kappa, eb_normal=None, centroid=None, spacing=None,
                  ghost: int = 3, boundaries=None) -> 'EBGrid':
        """
        Сетка с заданными долями объема, без неявной функции.

        Апертура грани равна 1 между открытыми ячейками и 0 рядом
        с покрытыми. Фиктивный слой заполняется по граничным условиям.
        """
        kappa = np.asarray(kappa, dtype=float)
        ndim = kappa.ndim
        if boundaries is None:
            boundaries = tuple((Boundary('outflow'), Boundary('outflow')) for _ in range(ndim))
        spec = GridSpec(cells=kappa.shape, spacing=spacing or (1.0,) * ndim, boundaries=boundaries)
        cell_type = np.where(kappa <= 0.0, COVERED_CODE,
                             np.where(kappa >= 1.0, REGULAR_CODE, CUT_CODE)).astype(np.int8)
        normal = np.zeros((ndim,) + kappa.shape) if eb_normal is None else np.asarray(eb_normal, float)
        if eb_normal is not None:
            length = np.linalg.norm(normal, axis=0)
            normal = np.where(length > 0, normal / np.where(length > 0, length, 1.0), 0.0)
        cen = np.zeros((ndim,) + kappa.shape) if centroid is None else np.asarray(centroid, float)
        open_cells = cell_type != COVERED_CODE
        apertures, face_centroid = [], []
        for d in range(ndim):
            shape = list(kappa.shape)
            shape[d] += 1
            faces = np.zeros(shape)
            lower = [slice(None)] * ndim
            upper = [slice(None)] * ndim
            lower[d] = slice(0, -1)
            upper[d] = slice(1, None)
            both = open_cells[tuple(lower)] & open_cells[tuple(upper)]
            inner = [slice(None)] * ndim
            inner[d] = slice(1, -1)
            faces[tuple(inner)] = both
            first = [slice(None)] * ndim
            first[d] = 0
            last = [slice(None)] * ndim
            last[d] = -1
            end = [slice(None)] * ndim
            end[d] = kappa.shape[d] - 1
            faces[tuple(first)] = open_cells[tuple(first)]
            faces[tuple(last)] = open_cells[tuple(end)]
            apertures.append(faces)
            face_centroid.append(np.zeros((ndim,) + tuple(shape)))
        eb_area = np.where(cell_type == CUT_CODE, float(np.prod(spec.spacing) / min(spec.spacing)), 0.0)
        return _pad(spec, ghost, cell_type, kappa, cen, apertures, face_centroid,
                    eb_area, normal, np.zeros((ndim,) + kappa.shape))


def _cell_map(n: int, ghost: int, periodic: bool) -> np.ndarray:
    index = np.arange(-ghost, n + ghost)
    return index % n if periodic else np.clip(index, 0, n - 1)


def _face_map(n: int, ghost: int, periodic: bool) -> np.ndarray:
    index = np.arange(-ghost, n + ghost + 1)
    return index % n if periodic else np.clip(index, 0, n)


def _pad(spec: GridSpec, ghost: int, cell_type, kappa, centroid, apertures, face_centroid,
         eb_area, eb_normal, eb_centroid) -> EBGrid:
    """Заполняет фиктивный слой: периодический перенос или продление"""
    ndim = spec.ndim
    maps = [_cell_map(n, ghost, spec.periodic(d)) for d, n in enumerate(spec.cells)]

    def pad_cells(array, lead=0):
        for d in range(ndim):
            array = np.take(array, maps[d], axis=d + lead)
        return array

    padded_apertures, padded_face_centroid = [], []
    for d in range(ndim):
        face_maps = list(maps)
        face_maps[d] = _face_map(spec.cells[d], ghost, spec.periodic(d))
        a, fc = apertures[d], face_centroid[d]
        for e in range(ndim):
            a = np.take(a, face_maps[e], axis=e)
            fc = np.take(fc, face_maps[e], axis=e + 1)
        padded_apertures.append(a)
        padded_face_centroid.append(fc)

    shape = tuple(n + 2 * ghost for n in spec.cells)
    physical = np.zeros(shape, dtype=bool)
    for d, n in enumerate(spec.cells):
        if spec.periodic(d):
            continue
        index = np.arange(-ghost, n + ghost)
        outside = (index < 0) | (index >= n)
        physical |= outside.reshape([-1 if e == d else 1 for e in range(ndim)])

    lo = tuple(-ghost for _ in spec.cells)
    return EBGrid(
        spec=spec,
        ghost=ghost,
        lo=lo,
        shape=shape,
        whole_lo=lo,
        whole_shape=shape,
        cell_type=pad_cells(cell_type),
        kappa=pad_cells(kappa),
        centroid=pad_cells(centroid, 1),
        apertures=padded_apertures,
        face_centroid=padded_face_centroid,
        eb_area=pad_cells(eb_area),
        eb_normal=pad_cells(eb_normal, 1),
        eb_centroid=pad_cells(eb_centroid, 1),
        physical_ghost=physical,
    )


def _face_neighbors(cells: np.ndarray, axis: int, periodic: bool, fill=0):
    """Значения ячеек ниже и выше каждой грани по оси axis"""
    pad = [(0, 0)] * cells.ndim
    pad[axis] = (1, 1)
    if periodic:
        extended = np.pad(cells, pad, mode='wrap')
    else:
        extended = np.pad(cells, pad, mode='constant', constant_values=fill)
    below = [slice(None)] * cells.ndim
    above = [slice(None)] * cells.ndim
    below[axis] = slice(0, -1)
    above[axis] = slice(1, None)
    return extended[tuple(below)], extended[tuple(above)]


def build_ebgrid(fn: ImplicitFn, spec: GridSpec, ghost: int,
                 depth: Optional[int] = None, kappa_min: Optional[float] = None) -> EBGrid:
    """Строит сетку и классифицирует все рабочие и фиктивные ячейки"""
    if ghost < 0:
        raise ValueError("Ширина фиктивного слоя не может быть отрицательной")
    kappa_min = SOLVER_CONFIG['kappa_min'] if kappa_min is None else kappa_min
    ndim = spec.ndim
    cells = spec.cells
    h = np.asarray(spec.spacing)
    origin = np.asarray(spec.origin)

    index = np.indices(cells)
    centers = np.moveaxis(index, 0, -1) * h + origin + 0.5 * h
    values = fn.evaluate(centers)
    half = 0.5 * float(np.linalg.norm(h))
    sign = np.where(values > half, 1, np.where(values < -half, -1, 0)).astype(np.int8)

    kappa = np.where(sign < 0, 1.0, 0.0)
    centroid = np.zeros((ndim,) + tuple(cells))
    eb_centroid = np.zeros((ndim,) + tuple(cells))
    exact = np.ones(cells, dtype=bool)

    # грань с неразрезанным соседом берет его знак, остальные считает ячейка
    uniform, apertures, face_centroid = [], [], []
    for d in range(ndim):
        below, above = _face_neighbors(sign, d, spec.periodic(d))
        level = np.where(below != 0, below, above)
        uniform.append(level)
        apertures.append(np.where(level < 0, 1.0, 0.0))
        face_centroid.append(np.zeros((ndim,) + level.shape))

    for cell in np.argwhere(sign == 0):
        cell = tuple(int(i) for i in cell)
        k, c, e, is_exact, cell_apertures, face_centers = cut_cell_moments(fn, cell, spec, depth)
        kappa[cell] = k
        centroid[(slice(None),) + cell] = c
        eb_centroid[(slice(None),) + cell] = e
        exact[cell] = is_exact
        for d in range(ndim):
            for side in (0, 1):
                face = list(cell)
                face[d] += side
                face = tuple(face)
                if uniform[d][face] != 0:
                    continue
                center = np.array(face_centers[2 * d + side], dtype=float)
                center[d] = 0.0
                apertures[d][face] = cell_apertures[2 * d + side]
                face_centroid[d][(slice(None),) + face] = center

    for d in range(ndim):
        if not spec.periodic(d):
            continue
        faces, seam = apertures[d], face_centroid[d]
        first = [slice(None)] * ndim
        last = [slice(None)] * ndim
        first[d], last[d] = 0, -1
        mismatch = np.max(np.abs(faces[tuple(last)] - faces[tuple(first)]), initial=0.0)
        if mismatch > 1e-12:
            logger.warning(f"Геометрия не периодична по оси {d}: расхождение апертур {mismatch:.3e}")
        faces[tuple(last)] = faces[tuple(first)]
        seam[(slice(None),) + tuple(last)] = seam[(slice(None),) + tuple(first)]

    covered_tol = np.where(exact, 0.0, 1e-12)
    covered = (kappa <= covered_tol) | (kappa < kappa_min)
    for d in range(ndim):
        below, above = _face_neighbors(covered, d, spec.periodic(d), fill=False)
        closed = below | above
        apertures[d][closed] = 0.0
        face_centroid[d][:, closed] = 0.0

    cell_type = np.where(covered, COVERED_CODE, REGULAR_CODE).astype(np.int8)
    kappa = np.where(covered, 0.0, kappa)
    eb_area = np.zeros(cells)
    eb_normal = np.zeros((ndim,) + tuple(cells))
    partial = np.zeros(cells, dtype=bool)
    for d in range(ndim):
        lower = [slice(None)] * ndim
        upper = [slice(None)] * ndim
        lower[d], upper[d] = slice(0, -1), slice(1, None)
        partial |= (apertures[d][tuple(lower)] != 1.0) | (apertures[d][tuple(upper)] != 1.0)
    to_close = (sign == 0) | partial
    for cell in np.argwhere(to_close & ~covered):
        cell = tuple(int(i) for i in cell)
        cell_apertures = []
        for d in range(ndim):
            upper = list(cell)
            upper[d] += 1
            cell_apertures += [apertures[d][cell], apertures[d][tuple(upper)]]
        record = close_cell(kappa[cell], centroid[(slice(None),) + cell], cell_apertures,
                            [()] * (2 * ndim), eb_centroid[(slice(None),) + cell],
                            spec.spacing, bool(exact[cell]), 0.0, cell)
        cell_type[cell] = TYPE_CODES[record.cell_type]
        if record.cell_type == CUT:
            kappa[cell] = record.kappa
            eb_area[cell] = record.eb_area
            eb_normal[(slice(None),) + cell] = record.eb_normal
        else:
            kappa[cell] = 1.0
            centroid[(slice(None),) + cell] = 0.0
            eb_centroid[(slice(None),) + cell] = 0.0
    centroid[:, cell_type != CUT_CODE] = 0.0
    eb_centroid[:, cell_type != CUT_CODE] = 0.0

    grid = _pad(spec, ghost, cell_type, kappa, centroid, apertures, face_centroid,
                eb_area, eb_normal, eb_centroid)
    counts = grid.counts()
    logger.info(f"Сетка {tuple(cells)} построена: полных {counts[REGULAR]}, "
                f"разрезанных {counts[CUT]}, покрытых {counts[COVERED]}")
    return grid
