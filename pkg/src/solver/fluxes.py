"""
Потоки конечных объемов на сетке с вложенной границей.

Конвективный поток: MUSCL с ограничителем ван Лира и множителем
Барта-Йесперсена, экстраполяция в центроид грани по полному градиенту
ячейки и выбор против потока.
Диффузионный поток: центральная разность через грань с поправкой на
поперечное смещение центроидов. На вложенной границе оба потока равны
нулю (стенка, условие Неймана).
"""
import itertools
import logging
from typing import List, Optional, Sequence

import numpy as np

from src.mesh.ebgrid import EBGrid

logger = logging.getLogger(__name__)


def _shift(array: np.ndarray, axis: int, step: int) -> np.ndarray:
    """out[i] = array[i + step] по оси axis; у края повторяется крайнее значение"""
    n = array.shape[axis]
    index = np.clip(np.arange(n) + step, 0, n - 1)
    return np.take(array, index, axis=axis)


def _inside(shape, axis: int, step: int) -> np.ndarray:
    n = shape[axis]
    index = np.arange(n) + step
    inside = (index >= 0) & (index < n)
    return inside.reshape([-1 if e == axis else 1 for e in range(len(shape))])


def _offset(array: np.ndarray, offset: Sequence[int], lead: int = 0):
    """Значения со смещением offset и маска существования соседа"""
    out = array
    mask = np.ones(array.shape[lead:], dtype=bool)
    for d, step in enumerate(offset):
        if step:
            out = _shift(out, d + lead, step)
            mask &= _inside(array.shape[lead:], d, step)
    return out, mask


def _face_pair(array: np.ndarray, axis: int):
    """Значения ячеек слева и справа от внутренних граней по оси axis"""
    lower = [slice(None)] * array.ndim
    upper = [slice(None)] * array.ndim
    lower[axis], upper[axis] = slice(0, -1), slice(1, None)
    return array[tuple(lower)], array[tuple(upper)]


def _interior_faces(shape, axis: int, lead: int = 0):
    sl = [slice(None)] * (lead + len(shape))
    sl[lead + axis] = slice(1, -1)
    return tuple(sl)


class Discretization:
    """Геометрические величины и операторы потоков для одной сетки"""

    def __init__(self, grid: EBGrid):
        self.grid = grid
        self.ndim = grid.ndim
        self.h = grid.spacing
        self.positions = grid.positions()
        self.open = ~grid.covered
        self.face_area = np.array([np.prod(np.delete(self.h, d)) for d in range(self.ndim)])
        self.face_positions = [self._face_positions(d) for d in range(self.ndim)]
        self._lsq = None

    def _face_positions(self, axis: int) -> np.ndarray:
        grid = self.grid
        shape = grid.apertures[axis].shape
        origin = np.asarray(grid.spec.origin)
        axes = [np.arange(l, l + s) for l, s in zip(grid.lo, shape)]
        index = np.array(np.meshgrid(*axes, indexing='ij'), dtype=float)
        positions = np.empty_like(index)
        for d in range(self.ndim):
            if d == axis:
                positions[d] = origin[d] + index[d] * self.h[d]
            else:
                positions[d] = origin[d] + (index[d] + 0.5 + grid.face_centroid[axis][d]) * self.h[d]
        return positions

    # ------------------------------------------------------------ gradients

    def muscl_slopes(self, values: np.ndarray, limiter: bool = True) -> np.ndarray:
        """
        Наклоны по направлениям, форма (ncomp, ndim, *shape).

        Односторонний наклон к покрытому соседу обнуляется.
        """
        ncomp = values.shape[0]
        slopes = np.zeros((ncomp, self.ndim) + values.shape[1:])
        for d in range(self.ndim):
            x = self.positions[d]
            x_up, x_dn = _shift(x, d, 1), _shift(x, d, -1)
            open_up = _shift(self.open, d, 1) & _inside(self.open.shape, d, 1)
            open_dn = _shift(self.open, d, -1) & _inside(self.open.shape, d, -1)
            up, dn = _shift(values, d + 1, 1), _shift(values, d + 1, -1)
            with np.errstate(divide='ignore', invalid='ignore'):
                s_up = np.where(open_up, (up - values) / (x_up - x), 0.0)
                s_dn = np.where(open_dn, (values - dn) / (x - x_dn), 0.0)
                if limiter:
                    product = s_up * s_dn
                    slope = np.where(product > 0.0, 2.0 * product / (s_up + s_dn), 0.0)
                else:
                    central = (up - dn) / (x_up - x_dn)
                    slope = np.where(open_up & open_dn, central,
                                     np.where(open_up, s_up, np.where(open_dn, s_dn, 0.0)))
            slopes[:, d] = np.where(self.open, slope, 0.0)
        return slopes

    def bound_slopes(self, values: np.ndarray, slopes: np.ndarray) -> np.ndarray:
        """
        Множитель Барта-Йесперсена для наклонов MUSCL.

        Значение, продолженное в центроид любой открытой грани ячейки,
        не выходит за минимум и максимум по открытым соседям 3^d.
        На регулярных ячейках наклон ван Лира этому условию уже удовлетворяет.
        """
        low, high = values.copy(), values.copy()
        for offset in itertools.product((-1, 0, 1), repeat=self.ndim):
            if not any(offset):
                continue
            shifted, exists = _offset(values, offset, lead=1)
            neighbor_open, _ = _offset(self.open, offset)
            mask = exists & neighbor_open
            low = np.where(mask, np.minimum(low, shifted), low)
            high = np.where(mask, np.maximum(high, shifted), high)
        alpha = np.ones_like(values)
        for d in range(self.ndim):
            faces = self.grid.apertures[d]
            n = faces.shape[d] - 1
            for side in (0, 1):
                cells = [slice(None)] * self.ndim
                cells[d] = slice(side, side + n)
                cells = tuple(cells)
                offset = self.face_positions[d][(slice(None),) + cells] - self.positions
                delta = np.einsum('ce...,e...->c...', slopes, offset)
                with np.errstate(divide='ignore', invalid='ignore'):
                    ratio = np.where(delta > 0.0, (high - values) / delta,
                                     np.where(delta < 0.0, (low - values) / delta, 1.0))
                ratio = np.where(faces[cells] > 0.0, ratio, 1.0)
                alpha = np.minimum(alpha, np.clip(ratio, 0.0, 1.0))
        return slopes * alpha[:, None]

    def _lsq_inverse(self) -> np.ndarray:
        """Обращенные нормальные матрицы наименьших квадратов по блоку 3^d"""
        if self._lsq is not None:
            return self._lsq
        shape = self.grid.shape
        normal = np.zeros(tuple(shape) + (self.ndim, self.ndim))
        for offset in itertools.product((-1, 0, 1), repeat=self.ndim):
            if not any(offset):
                continue
            other, exists = _offset(self.positions, offset, lead=1)
            neighbor_open, _ = _offset(self.open, offset)
            mask = exists & neighbor_open & self.open
            delta = np.moveaxis(other - self.positions, 0, -1) * mask[..., None]
            normal += delta[..., :, None] * delta[..., None, :]
        self._lsq = np.linalg.pinv(normal)
        return self._lsq

    def lsq_gradient(self, values: np.ndarray) -> np.ndarray:
        """Градиент ячейки по наименьшим квадратам, форма (ncomp, ndim, *shape)"""
        inverse = self._lsq_inverse()
        ncomp = values.shape[0]
        rhs = np.zeros((ncomp,) + tuple(self.grid.shape) + (self.ndim,))
        for offset in itertools.product((-1, 0, 1), repeat=self.ndim):
            if not any(offset):
                continue
            other, exists = _offset(self.positions, offset, lead=1)
            neighbor_open, _ = _offset(self.open, offset)
            mask = exists & neighbor_open & self.open
            delta = np.moveaxis(other - self.positions, 0, -1) * mask[..., None]
            shifted, _ = _offset(values, offset, lead=1)
            difference = (shifted - values) * mask
            rhs += difference[..., None] * delta[None]
        gradient = np.einsum('...ij,c...j->c...i', inverse, rhs)
        return np.moveaxis(gradient, -1, 1)

    # ---------------------------------------------------------------- fluxes

    def advective_flux(self, values: np.ndarray, velocity: Sequence[float],
                       limiter: bool = True) -> List[np.ndarray]:
        """Плотности потока v_d * U на гранях, по оси d форма (ncomp, *faces_d)"""
        slopes = self.muscl_slopes(values, limiter)
        if limiter:
            slopes = self.bound_slopes(values, slopes)
        fluxes = []
        for d in range(self.ndim):
            faces = self.grid.apertures[d]
            flux = np.zeros((values.shape[0],) + faces.shape)
            v = float(velocity[d])
            if v != 0.0:
                x_face = self.face_positions[d][_interior_faces(faces.shape, d, 1)]
                left, right = _face_pair(values, d + 1)
                x_left, x_right = _face_pair(self.positions, d + 1)
                g_left, g_right = _face_pair(slopes, d + 2)
                u_left = left + np.einsum('ce...,e...->c...', g_left, x_face - x_left)
                u_right = right + np.einsum('ce...,e...->c...', g_right, x_face - x_right)
                upwind = u_left if v > 0.0 else u_right
                flux[_interior_faces(faces.shape, d, 1)] = v * upwind
            flux *= faces > 0.0
            fluxes.append(flux)
        return fluxes

    def diffusive_flux(self, values: np.ndarray, nu: float) -> List[np.ndarray]:
        """Плотности потока -nu * dU/dx_d на гранях"""
        fluxes = []
        gradient = self.lsq_gradient(values) if nu > 0.0 else None
        for d in range(self.ndim):
            faces = self.grid.apertures[d]
            flux = np.zeros((values.shape[0],) + faces.shape)
            if nu > 0.0:
                left, right = _face_pair(values, d + 1)
                x_left, x_right = _face_pair(self.positions, d + 1)
                g_left, g_right = _face_pair(gradient, d + 2)
                difference = right - left
                for e in range(self.ndim):
                    if e == d:
                        continue
                    average = 0.5 * (g_left[:, e] + g_right[:, e])
                    difference = difference - average * (x_right[e] - x_left[e])
                with np.errstate(divide='ignore', invalid='ignore'):
                    normal = difference / (x_right[d] - x_left[d])
                flux[_interior_faces(faces.shape, d, 1)] = -nu * np.nan_to_num(normal)
            flux *= faces > 0.0
            fluxes.append(flux)
        return fluxes

    def flux_sum(self, fluxes: Sequence[np.ndarray]) -> np.ndarray:
        """sum_faces F n A для каждой ячейки, форма (ncomp, *shape)"""
        total = None
        for d, flux in enumerate(fluxes):
            weighted = flux * self.grid.apertures[d] * self.face_area[d]
            lower, upper = _face_pair(weighted, d + 1)
            part = upper - lower
            total = part if total is None else total + part
        return np.where(self.open, total, 0.0)

    def divergences(self, fluxes: Sequence[np.ndarray]):
        """Консервативная (деление на V) и неконсервативная (на h^d) дивергенции"""
        total = self.flux_sum(fluxes)
        volume = self.grid.volume
        conservative = np.divide(total, volume, out=np.zeros_like(total), where=volume > 0.0)
        return conservative, total / self.grid.spec.cell_volume

    def provisional_update(self, values: np.ndarray, fluxes: Sequence[np.ndarray],
                           dt: float) -> np.ndarray:
        """U^ = U - dt/V * sum F n A; покрытые ячейки не меняются"""
        conservative, _ = self.divergences(fluxes)
        return values - dt * conservative


def advective_flux(values: np.ndarray, grid: EBGrid, velocity: Sequence[float],
                   limiter: bool = True) -> List[np.ndarray]:
    return Discretization(grid).advective_flux(values, velocity, limiter)


def diffusive_flux(values: np.ndarray, grid: EBGrid, nu: float) -> List[np.ndarray]:
    return Discretization(grid).diffusive_flux(values, nu)


def provisional_update(values: np.ndarray, fluxes: Sequence[np.ndarray], dt: float,
                       grid: EBGrid, discretization: Optional[Discretization] = None) -> np.ndarray:
    discretization = discretization or Discretization(grid)
    return discretization.provisional_update(values, fluxes, dt)
