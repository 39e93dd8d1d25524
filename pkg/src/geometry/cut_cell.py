"""
Вычисление геометрических моментов ячеек.

Для плоских границ используется точное отсечение многоугольников и
многогранников, для гладких тел - адаптивное дихотомическое деление.
Координаты внутри ячейки отсчитываются от ее центра в долях шага.
"""
import itertools
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from config.settings import SOLVER_CONFIG
from src.errors import GeometryError, MultiCutCell
from src.geometry.implicit import ImplicitFn, LocalForm
from src.models import COVERED, CUT, REGULAR, CutCellGeometry, GridSpec

logger = logging.getLogger(__name__)

EXACT_REGULAR_TOL = 1e-13
SUBDIVISION_TOL = 1e-12
DEDUP_TOL = 1e-14

# Обход квадрата против часовой стрелки
SQUARE = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])


def cell_box(spec: GridSpec, index: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Физические углы ячейки; узлы считаются как origin + i*h"""
    index = np.asarray(index, dtype=float)
    origin = np.asarray(spec.origin)
    h = np.asarray(spec.spacing)
    return origin + index * h, origin + (index + 1.0) * h


def _plane_values(form: LocalForm, points: np.ndarray) -> np.ndarray:
    return (points - form.point) @ form.normal


# ---------------------------------------------------------------- exact path

def _interval_moments(values: np.ndarray):
    """Доля и центр жидкой части отрезка [-1/2, 1/2]; жидкость там, где значение <= 0"""
    a, b = float(values[0]), float(values[1])
    if a == 0.0 and b == 0.0:
        raise GeometryError("Граница совпадает с гранью сетки")
    if a <= 0.0 and b <= 0.0:
        return 1.0, 0.0, None
    if a >= 0.0 and b >= 0.0:
        return 0.0, 0.0, None
    t = a / (a - b)
    cut = -0.5 + t
    if a < 0.0:
        return t, 0.5 * (-0.5 + cut), cut
    return 1.0 - t, 0.5 * (cut + 0.5), cut


def _clip_polygon(points: np.ndarray, values: np.ndarray):
    """
    Отсечение выпуклого многоугольника полуплоскостью value <= 0.

    Возвращает вершины и признак того, что вершина лежит на границе.
    """
    if np.all(values == 0.0):
        raise GeometryError("Граница совпадает с гранью сетки")
    out, on_boundary = [], []
    count = len(points)
    for k in range(count):
        p, q = points[k], points[(k + 1) % count]
        vp, vq = values[k], values[(k + 1) % count]
        if vp <= 0.0:
            out.append(p)
            on_boundary.append(vp == 0.0)
        if (vp < 0.0 < vq) or (vq < 0.0 < vp):
            t = vp / (vp - vq)
            out.append(p + t * (q - p))
            on_boundary.append(True)
    if not out:
        return np.empty((0, points.shape[1])), np.empty(0, dtype=bool)
    out, on_boundary = np.array(out), np.array(on_boundary)
    keep = [0]
    for k in range(1, len(out)):
        if np.max(np.abs(out[k] - out[keep[-1]])) > DEDUP_TOL:
            keep.append(k)
    if len(keep) > 1 and np.max(np.abs(out[keep[-1]] - out[keep[0]])) <= DEDUP_TOL:
        keep.pop()
    return out[keep], on_boundary[keep]


def _polygon_moments(points: np.ndarray):
    """Площадь и центр плоского выпуклого многоугольника (2D или 3D)"""
    if len(points) < 3:
        return 0.0, points.mean(axis=0) if len(points) else None
    base = points[0]
    area = 0.0
    moment = np.zeros(points.shape[1])
    for k in range(1, len(points) - 1):
        u, v = points[k] - base, points[k + 1] - base
        if points.shape[1] == 2:
            tri = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        else:
            tri = 0.5 * float(np.linalg.norm(np.cross(u, v)))
        area += tri
        moment += tri * (base + points[k] + points[k + 1]) / 3.0
    if area == 0.0:
        return 0.0, points.mean(axis=0)
    return area, moment / area


def _exact_square(values: np.ndarray):
    """Жидкая часть квадрата: доля, центр, центр граничного отрезка"""
    polygon, on_boundary = _clip_polygon(SQUARE, values)
    area, centroid = _polygon_moments(polygon)
    boundary = polygon[on_boundary] if len(polygon) else polygon
    eb_centroid = boundary.mean(axis=0) if len(boundary) else np.zeros(2)
    if area == 0.0:
        centroid = np.zeros(2)
    return area, centroid, eb_centroid


def _embed(points2d: np.ndarray, axis: int, side: float) -> np.ndarray:
    free = [d for d in range(3) if d != axis]
    out = np.empty((len(points2d), 3))
    out[:, axis] = side
    out[:, free] = points2d
    return out


def _exact_cube(corner_values: np.ndarray, gradient: np.ndarray):
    """
    Жидкая часть куба. corner_values индексируются битами (i, j, k).

    Грани отсекаются по отдельности, сечение собирается из граничных
    вершин граней и упорядочивается по углу в плоскости сечения.
    """
    faces, boundary = [], []
    for axis in range(3):
        free = [d for d in range(3) if d != axis]
        for bit, side in ((0, -0.5), (1, 0.5)):
            values = np.empty(4)
            for n, (u, v) in enumerate(SQUARE):
                idx = [0, 0, 0]
                idx[axis] = bit
                idx[free[0]] = int(u > 0)
                idx[free[1]] = int(v > 0)
                values[n] = corner_values[tuple(idx)]
            polygon, on_boundary = _clip_polygon(SQUARE, values)
            if len(polygon) >= 3:
                faces.append(_embed(polygon, axis, side))
            if len(polygon):
                boundary.extend(_embed(polygon[on_boundary], axis, side))
    if not faces:
        return 0.0, np.zeros(3), np.zeros(3)

    cut = _unique_points(np.array(boundary)) if boundary else np.empty((0, 3))
    if len(cut) >= 3:
        cut = _sort_around(cut, gradient)
        faces.append(cut)

    vertices = _unique_points(np.vstack(faces))
    reference = vertices.mean(axis=0)
    volume = 0.0
    moment = np.zeros(3)
    for polygon in faces:
        for k in range(1, len(polygon) - 1):
            a, b, c = polygon[0], polygon[k], polygon[k + 1]
            tet = abs(np.linalg.det(np.array([a - reference, b - reference, c - reference]))) / 6.0
            volume += tet
            moment += tet * (reference + a + b + c) / 4.0
    centroid = moment / volume if volume > 0.0 else np.zeros(3)
    if len(cut) >= 3:
        eb_centroid = _polygon_moments(cut)[1]
    elif len(cut):
        eb_centroid = cut.mean(axis=0)
    else:
        eb_centroid = np.zeros(3)
    return volume, centroid, eb_centroid


def _unique_points(points: np.ndarray) -> np.ndarray:
    kept = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= DEDUP_TOL for q in kept):
            kept.append(p)
    return np.array(kept)


def _sort_around(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    center = points.mean(axis=0)
    normal = normal / np.linalg.norm(normal)
    helper = np.eye(3)[int(np.argmin(np.abs(normal)))]
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    rel = points - center
    order = np.argsort(np.arctan2(rel @ e2, rel @ e1))
    return points[order]


# ---------------------------------------------------------- subdivision path

def _subdivide(fn: ImplicitFn, lo: np.ndarray, hi: np.ndarray, free: Sequence[int], depth: int):
    """
    Адаптивное деление прямоугольника по свободным осям.

    Смешанные листья учитываются по знаку в центре. Возвращает долю
    жидкости, центр жидкой части и центр смешанных листьев
    в локальных координатах свободных осей.
    """
    k = len(free)
    size = (hi - lo)[list(free)]
    diagonal = float(np.linalg.norm(size))
    offsets = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
    centers = np.full((1, k), 0.5)
    half = 0.5
    fluid = 0.0
    moment = np.zeros(k)
    mixed_leaves = np.empty((0, k))
    for level in range(depth + 1):
        points = np.tile(lo, (len(centers), 1))
        points[:, list(free)] = lo[list(free)] + centers * size
        values = fn.evaluate(points)
        radius = half * diagonal
        volume = (2.0 * half) ** k
        is_fluid = values < -radius
        is_body = values > radius
        mixed = ~(is_fluid | is_body)
        fluid += volume * np.count_nonzero(is_fluid)
        moment += volume * centers[is_fluid].sum(axis=0)
        if level == depth:
            leaf_fluid = mixed & (values <= 0.0)
            fluid += volume * np.count_nonzero(leaf_fluid)
            moment += volume * centers[leaf_fluid].sum(axis=0)
            mixed_leaves = centers[mixed]
            break
        parents = centers[mixed]
        if not len(parents):
            break
        half *= 0.5
        centers = (parents[:, None, :] + half * offsets[None, :, :]).reshape(-1, k)
    centroid = moment / fluid - 0.5 if fluid > 0.0 else np.zeros(k)
    eb_centroid = mixed_leaves.mean(axis=0) - 0.5 if len(mixed_leaves) else np.zeros(k)
    return fluid, centroid, eb_centroid


def _check_single_cut(fn: ImplicitFn, lo: np.ndarray, hi: np.ndarray, depth: int):
    """Проверяет, что каждое ребро пересекается не более одного раза"""
    ndim = len(lo)
    samples = np.linspace(0.0, 1.0, 2 ** depth + 1)
    corners = np.array(list(itertools.product((0, 1), repeat=ndim)), dtype=float)
    for axis in range(ndim):
        starts = corners[corners[:, axis] == 0]
        for start in starts:
            points = np.tile(lo + start * (hi - lo), (len(samples), 1))
            points[:, axis] = lo[axis] + samples * (hi[axis] - lo[axis])
            inside = fn.evaluate(points) > 0.0
            if np.count_nonzero(inside[1:] != inside[:-1]) > 1:
                raise MultiCutCell("Ребро пересекается границей несколько раз")
    for pair in itertools.combinations(range(ndim), 2):
        fixed = [d for d in range(ndim) if d not in pair]
        for bits in itertools.product((0, 1), repeat=len(fixed)):
            signs = []
            for u, v in ((0, 0), (1, 0), (1, 1), (0, 1)):
                corner = lo.copy()
                corner[pair[0]] = hi[pair[0]] if u else lo[pair[0]]
                corner[pair[1]] = hi[pair[1]] if v else lo[pair[1]]
                for d, bit in zip(fixed, bits):
                    corner[d] = hi[d] if bit else lo[d]
                signs.append(bool(fn.evaluate(corner) > 0.0))
            if signs in ([True, False, True, False], [False, True, False, True]):
                raise MultiCutCell("Ячейке нужны две грани границы")


# ------------------------------------------------------------------- moments

def face_moments(fn: ImplicitFn, lo: np.ndarray, hi: np.ndarray, axis: int,
                 depth: Optional[int] = None):
    """
    Апертура и центр грани, перпендикулярной оси axis.

    lo[axis] == hi[axis]. Центр возвращается в локальных координатах
    ячейки с нулем по оси axis.
    """
    depth = SOLVER_CONFIG['subdivision_depth'] if depth is None else depth
    ndim = len(lo)
    free = [d for d in range(ndim) if d != axis]
    centroid = np.zeros(ndim)
    form = fn.affine_in(lo, hi)
    if form is not None and form.sign:
        return (1.0 if form.sign < 0 else 0.0), centroid
    if form is not None:
        if ndim == 2:
            ends = np.array([lo, lo])
            ends[1, free[0]] = hi[free[0]]
            fraction, center, _ = _interval_moments(_plane_values(form, ends))
            centroid[free[0]] = center
            return fraction, centroid
        corners = np.empty((4, ndim))
        for n, (u, v) in enumerate(SQUARE):
            corners[n] = lo
            corners[n, free[0]] = hi[free[0]] if u > 0 else lo[free[0]]
            corners[n, free[1]] = hi[free[1]] if v > 0 else lo[free[1]]
        area, center, _ = _exact_square(_plane_values(form, corners))
        centroid[free] = center
        return area, centroid
    fraction, center, _ = _subdivide(fn, lo, hi, free, depth)
    centroid[free] = center
    return fraction, centroid


def volume_moments(fn: ImplicitFn, lo: np.ndarray, hi: np.ndarray,
                   depth: Optional[int] = None):
    """
    Доля объема, центр жидкой части и центр границы ячейки.

    Возвращает также признак точного пути.
    """
    depth = SOLVER_CONFIG['subdivision_depth'] if depth is None else depth
    ndim = len(lo)
    form = fn.affine_in(lo, hi)
    if form is not None and form.sign:
        kappa = 1.0 if form.sign < 0 else 0.0
        return kappa, np.zeros(ndim), np.zeros(ndim), True
    if form is not None:
        if ndim == 2:
            corners = np.array([[lo[0] if u < 0 else hi[0], lo[1] if v < 0 else hi[1]]
                                for u, v in SQUARE])
            kappa, centroid, eb_centroid = _exact_square(_plane_values(form, corners))
        else:
            grid = np.empty((2, 2, 2))
            for bits in itertools.product((0, 1), repeat=3):
                corner = np.where(np.array(bits) == 1, hi, lo)
                grid[bits] = _plane_values(form, corner[None, :])[0]
            kappa, centroid, eb_centroid = _exact_cube(grid, form.normal * (hi - lo))
        return kappa, centroid, eb_centroid, True
    _check_single_cut(fn, lo, hi, depth)
    kappa, centroid, eb_centroid = _subdivide(fn, lo, hi, list(range(ndim)), depth)
    return kappa, centroid, eb_centroid, False


def close_cell(kappa: float, centroid, apertures, face_centroids, eb_centroid,
               spacing, exact: bool = True, kappa_min: Optional[float] = None,
               cell=None) -> CutCellGeometry:
    """
    Классифицирует ячейку и замыкает момент границы по граням:
    eb_area * eb_normal = -sum(+-a * A * e).
    """
    kappa_min = SOLVER_CONFIG['kappa_min'] if kappa_min is None else kappa_min
    ndim = len(spacing)
    regular_tol = EXACT_REGULAR_TOL if exact else SUBDIVISION_TOL
    covered_tol = 0.0 if exact else SUBDIVISION_TOL
    if kappa <= covered_tol or kappa < kappa_min:
        return CutCellGeometry.covered(ndim)
    if kappa >= 1.0 - regular_tol and all(a == 1.0 for a in apertures):
        return CutCellGeometry.regular(ndim)

    spacing = np.asarray(spacing, dtype=float)
    face_area = np.array([np.prod(np.delete(spacing, d)) for d in range(ndim)])
    vector = np.zeros(ndim)
    for d in range(ndim):
        vector[d] = -face_area[d] * (apertures[2 * d + 1] - apertures[2 * d])
    eb_area = float(np.linalg.norm(vector))
    if eb_area == 0.0:
        raise GeometryError("Граница внутри ячейки не пересекает ее грани", cell)
    kappa = min(kappa, float(np.nextafter(1.0, 0.0)))
    return CutCellGeometry(
        cell_type=CUT,
        kappa=float(kappa),
        centroid=tuple(float(c) for c in centroid),
        apertures=tuple(float(a) for a in apertures),
        face_centroids=tuple(tuple(float(c) for c in fc) for fc in face_centroids),
        eb_area=eb_area,
        eb_normal=tuple(float(v) for v in vector / eb_area),
        eb_centroid=tuple(float(c) for c in eb_centroid),
    )


def cut_cell_moments(fn: ImplicitFn, cell_index: Sequence[int], spec: GridSpec,
                     depth: Optional[int] = None):
    """
    Моменты одной ячейки до классификации.

    Возвращает долю объема, центр жидкой части, центр границы, признак
    точного пути, апертуры и центры граней. Грани идут парами (нижняя,
    верхняя) по каждой оси; центр грани в локальных координатах ячейки,
    по своей оси -0.5 или 0.5.
    """
    lo, hi = cell_box(spec, cell_index)
    try:
        kappa, centroid, eb_centroid, exact = volume_moments(fn, lo, hi, depth)
        apertures, face_centroids = [], []
        for axis in range(spec.ndim):
            for side in (0, 1):
                face_lo, face_hi = lo.copy(), hi.copy()
                if side:
                    face_lo[axis] = hi[axis]
                else:
                    face_hi[axis] = lo[axis]
                aperture, center = face_moments(fn, face_lo, face_hi, axis, depth)
                center[axis] = 0.5 if side else -0.5
                apertures.append(aperture)
                face_centroids.append(center)
    except GeometryError as e:
        if e.cell is None:
            raise type(e)(str(e), tuple(cell_index)) from e
        raise
    return kappa, centroid, eb_centroid, exact, apertures, face_centroids


def compute_cut_geometry(fn: ImplicitFn, cell_index: Sequence[int], spec: GridSpec,
                         depth: Optional[int] = None,
                         kappa_min: Optional[float] = None) -> CutCellGeometry:
    """Геометрия одной ячейки сетки"""
    kappa, centroid, eb_centroid, exact, apertures, face_centroids = \
        cut_cell_moments(fn, cell_index, spec, depth)
    return close_cell(kappa, centroid, apertures, face_centroids, eb_centroid,
                      spec.spacing, exact, kappa_min, tuple(cell_index))


__all__ = [
    'cell_box',
    'face_moments',
    'volume_moments',
    'close_cell',
    'cut_cell_moments',
    'compute_cut_geometry',
    'REGULAR',
    'CUT',
    'COVERED',
]
