"""
Постобработка: перераспределение состояний.

В матричной форме для каждой компоненты:
    Q^ = A (V U^) / V^
    U  = A^T Q^ + sum_d [x_d * (A^T sigma_d) - A^T (x^_d * sigma_d)]
Ячейки с N = 1 и M = {i} копируются из U^ без изменений.
"""
import logging
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from src.errors import WeightSumViolation
from src.mesh.field import Field
from src.srd.plan import NeighborhoodPlan

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12


def _values(u_hat: Union[Field, np.ndarray]) -> np.ndarray:
    values = u_hat.values if isinstance(u_hat, Field) else np.asarray(u_hat, dtype=float)
    return values


def _averages(matrix, volume: np.ndarray, v_hat: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.zeros((values.shape[0], volume.size))
    positive = v_hat > 0.0
    for c, u in enumerate(values.reshape(values.shape[0], -1)):
        moment = matrix @ (volume * u)
        out[c, positive] = moment[positive] / v_hat[positive]
    return out


def neighborhood_averages(plan: NeighborhoodPlan, u_hat) -> np.ndarray:
    """Q^ для всех строк плана, форма (ncomp, *shape)"""
    values = _values(u_hat)
    q = _averages(plan.matrix, plan.grid.volume.ravel(), plan.v_hat.ravel(), values)
    return q.reshape(values.shape)


def neighborhood_gradients(plan: NeighborhoodPlan, q_hat: np.ndarray,
                           limit: Optional[bool] = None) -> np.ndarray:
    """
    Наклоны sigma по наименьшим квадратам, форма (ncomp, ndim, *shape).

    При limit ограничиваются по Барту-Йесперсену: восстановление в
    центроидах получателей не выходит за пределы Q^ шаблона.
    """
    limit = plan.settings.limit_slopes if limit is None else limit
    ndim = plan.grid.ndim
    ncomp = q_hat.shape[0]
    flat_q = q_hat.reshape(ncomp, -1)
    sigma = np.zeros((ncomp, ndim, flat_q.shape[1]))
    for c in range(ncomp):
        for d, operator in enumerate(plan.gradient):
            sigma[c, d] = operator @ flat_q[c]
        if limit:
            _barth_jespersen(plan, flat_q[c], sigma[c])
    return sigma.reshape((ncomp, ndim) + tuple(plan.grid.shape))


def _barth_jespersen(plan: NeighborhoodPlan, q: np.ndarray, sigma: np.ndarray):
    positions = plan.positions.reshape(plan.grid.ndim, -1)
    x_hat = plan.x_hat.reshape(plan.grid.ndim, -1)
    for j, stencil in plan.stencils.items():
        if stencil.deficient:
            continue
        values = q[np.append(stencil.cells, j)]
        upper, lower = values.max(), values.min()
        offsets = positions[:, stencil.receivers] - x_hat[:, [j]]
        change = sigma[:, j] @ offsets
        theta = 1.0
        for delta in change:
            if delta > 0.0:
                theta = min(theta, (upper - q[j]) / delta)
            elif delta < 0.0:
                theta = min(theta, (lower - q[j]) / delta)
        if theta < 1.0:
            sigma[:, j] *= max(theta, 0.0)


def _apply(plan: NeighborhoodPlan, matrix, values: np.ndarray,
           sigma: Optional[np.ndarray] = None, q_hat: Optional[np.ndarray] = None,
           v_hat: Optional[np.ndarray] = None) -> np.ndarray:
    grid = plan.grid
    volume = grid.volume.ravel()
    ncomp = values.shape[0]
    if v_hat is None:
        v_hat = matrix @ volume
    if q_hat is None:
        q_hat = _averages(matrix, volume, v_hat, values)
    q_hat = q_hat.reshape(ncomp, -1)
    transpose = matrix.T.tocsr()
    positions = plan.positions.reshape(grid.ndim, -1)
    x_hat = plan.x_hat.reshape(grid.ndim, -1)

    update = np.zeros((ncomp, volume.size))
    for c in range(ncomp):
        result = transpose @ q_hat[c]
        if sigma is not None:
            slopes = sigma[c].reshape(grid.ndim, -1)
            for d in range(grid.ndim):
                result += positions[d] * (transpose @ slopes[d]) - transpose @ (x_hat[d] * slopes[d])
        update[c] = result

    target = np.zeros(grid.shape, dtype=bool)
    target[grid.valid] = True
    target &= ~grid.blocked & ~plan.inert
    out = values.copy()
    out[:, target] = update.reshape(values.shape)[:, target]
    return out


def srd_apply(plan: NeighborhoodPlan, u_hat, slopes: bool = True,
              limit: Optional[bool] = None) -> Field:
    """
    Перераспределение предварительного решения U^.

    Возвращает поле того же патча; фиктивные ячейки не меняются.
    """
    values = _values(u_hat)
    q_hat = neighborhood_averages(plan, values)
    sigma = neighborhood_gradients(plan, q_hat, limit) if slopes else None
    out = _apply(plan, plan.matrix, values, sigma, q_hat, plan.v_hat.ravel())
    if isinstance(u_hat, Field):
        return u_hat.with_values(out)
    return Field(plan.grid, out)


def srd_init(plan: NeighborhoodPlan, u0, slopes: bool = True,
             limit: Optional[bool] = None) -> Field:
    """Применение перераспределения к начальным данным до первого шага"""
    return srd_apply(plan, u0, slopes, limit)


def weight_matrix_from(plan: NeighborhoodPlan, weights: Dict[Tuple[int, int], float]) -> sparse.csr_matrix:
    """Матрица A по словарю весов {(i, j): w_ij} в глобальных номерах"""
    grid = plan.grid
    size = int(np.prod(grid.shape))
    keys = list(weights)
    cols = grid.local_flat(np.array([i for i, _ in keys], dtype=np.int64))
    rows = grid.local_flat(np.array([j for _, j in keys], dtype=np.int64))
    data = np.array([weights[k] for k in keys], dtype=float)
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def framework_apply(plan: NeighborhoodPlan, u_hat,
                    weights: Union[None, sparse.spmatrix, Dict[Tuple[int, int], float]] = None) -> Field:
    """
    Общая схема перераспределения с произвольными весами w_{i,j}.

    Шаг 1: V^_j = sum_i w_ij V_i, Q^_j = sum_i w_ij V_i U^_i / V^_j.
    Шаг 2: U_i = sum_j w_ij Q^_j. Для каждой рабочей ячейки сумма
    весов по W_i должна быть равна единице.
    """
    if weights is None:
        matrix = plan.matrix
    elif isinstance(weights, dict):
        matrix = weight_matrix_from(plan, weights)
    else:
        matrix = sparse.csr_matrix(weights)
    grid = plan.grid
    sums = np.asarray(matrix.sum(axis=0)).ravel().reshape(grid.shape)
    check = np.zeros(grid.shape, dtype=bool)
    check[grid.valid] = True
    check &= ~grid.blocked
    deviation = np.abs(sums - 1.0) * check
    if np.any(deviation > WEIGHT_SUM_TOL):
        worst = np.unravel_index(int(np.argmax(deviation)), grid.shape)
        cell = tuple(int(i) + l for i, l in zip(worst, grid.lo))
        raise WeightSumViolation(
            f"Сумма весов отличается от 1 на {deviation[worst]:.3e}", cell)
    values = _values(u_hat)
    out = _apply(plan, matrix, values)
    if isinstance(u_hat, Field):
        return u_hat.with_values(out)
    return Field(plan.grid, out)
