"""
Веса исходного и взвешенного вариантов и матрица A.

Оба варианта записываются через одну форму весов: w_{i,i} = alpha_i,
w_{i,j} = beta_j / N_i для j != i. Исходный вариант получается при
alpha_i = 1/N_i и beta_j = 1.
"""
import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import sparse

from src.errors import DegenerateBeta
from src.mesh.ebgrid import EBGrid
from src.models import SrdSettings
from src.srd.plan import NeighborhoodPlan

logger = logging.getLogger(__name__)


def _rows(grid: EBGrid, members, ring: np.ndarray) -> np.ndarray:
    """Ячейки, все члены окрестности которых имеют известный счетчик N"""
    limit = grid.ghost - 2
    rows = ~grid.blocked & (ring <= limit)
    for cells in members.values():
        local = grid.local_flat(np.array(cells, dtype=np.int64))
        if np.any(ring.flat[local] > limit):
            rows.flat[local[0]] = False
    return rows


def _plan(grid, variant, members, overlap, overlap_sets, alpha, beta, settings) -> NeighborhoodPlan:
    plan = NeighborhoodPlan(
        grid=grid,
        variant=variant,
        settings=settings,
        members=members,
        overlap=overlap,
        overlap_sets=overlap_sets if overlap_sets is not None else _invert(members),
        alpha=alpha,
        beta=beta,
        v_target=settings.v_target * grid.spec.cell_volume,
        rows=_rows(grid, members, grid.ring()),
    )
    plan.matrix = assemble_weight_matrix(plan)
    volume = grid.volume.ravel()
    v_hat = plan.matrix @ volume
    positions = grid.positions().reshape(grid.ndim, -1)
    plan.positions = positions.reshape((grid.ndim,) + tuple(grid.shape))
    x_hat = np.zeros_like(positions)
    has_volume = v_hat > 0.0
    for d in range(grid.ndim):
        moment = plan.matrix @ (volume * positions[d])
        x_hat[d, has_volume] = moment[has_volume] / v_hat[has_volume]
    plan.v_hat = v_hat.reshape(grid.shape)
    plan.x_hat = x_hat.reshape((grid.ndim,) + tuple(grid.shape))
    return plan


def _invert(members) -> Dict[int, Tuple[int, ...]]:
    containing: Dict[int, list] = {}
    for owner, cells in members.items():
        for cell in cells[1:]:
            containing.setdefault(cell, []).append(owner)
    return {cell: (cell,) + tuple(sorted(owners)) for cell, owners in containing.items()}


def compute_weights_original(grid: EBGrid, members, overlap: np.ndarray,
                             overlap_sets=None,
                             settings: Optional[SrdSettings] = None) -> NeighborhoodPlan:
    """Веса исходного варианта: w_{i,j} = 1/N_i"""
    settings = settings or SrdSettings()
    alpha = np.divide(1.0, overlap, out=np.zeros(grid.shape), where=overlap > 0)
    beta = np.zeros(grid.shape)
    if members:
        beta.flat[grid.local_flat(np.fromiter(members, dtype=np.int64))] = 1.0
    return _plan(grid, 'original', members, overlap, overlap_sets, alpha, beta, settings)


def compute_weights_weighted(grid: EBGrid, members, overlap: np.ndarray,
                             overlap_sets=None,
                             settings: Optional[SrdSettings] = None) -> NeighborhoodPlan:
    """
    Веса взвешенного варианта.

    beta_i = (V_target - V_i) / sum_{M_i \\ i} V для сливающихся ячеек,
    alpha_i = 1 - (1/N_i) * sum_{W_i \\ i} beta_j.
    """
    settings = settings or SrdSettings()
    full = grid.spec.cell_volume
    v_target = settings.v_target * full
    volume = grid.volume

    small = ~grid.blocked & (volume < v_target - settings.merge_tol * full) & (grid.ring() == 0)
    for cell in np.argwhere(small):
        flat = int(grid.flat(tuple(np.array(cell) + np.array(grid.lo))))
        if flat not in members:
            raise DegenerateBeta("Малая ячейка без соседей в окрестности",
                                 tuple(int(c) + l for c, l in zip(cell, grid.lo)))

    beta = np.zeros(grid.shape)
    received = np.zeros(grid.shape)
    for owner, cells in members.items():
        local = grid.local_flat(np.array(cells, dtype=np.int64))
        others = volume.flat[local[1:]].sum()
        value = (v_target - volume.flat[local[0]]) / others
        value = min(max(value, 0.0), 1.0)
        beta.flat[local[0]] = value
        np.add.at(received.ravel(), local[1:], value)
    alpha = np.divide(overlap - received, overlap, out=np.zeros(grid.shape), where=overlap > 0)
    alpha = np.where(overlap > 0, alpha, 0.0)
    return _plan(grid, 'weighted', members, overlap, overlap_sets, alpha, beta, settings)


def assemble_weight_matrix(plan: NeighborhoodPlan) -> sparse.csr_matrix:
    """
    Матрица A с A[j, i] = w_{i,j}; столбцы суммируются в единицу.

    Строятся только строки plan.rows.
    """
    grid = plan.grid
    size = int(np.prod(grid.shape))
    row_ids = np.flatnonzero(plan.rows)
    rows, cols, data = [row_ids], [row_ids], [plan.alpha.ravel()[row_ids]]
    overlap = plan.overlap.ravel()
    for owner, cells in plan.members.items():
        local = grid.local_flat(np.array(cells, dtype=np.int64))
        j = local[0]
        if not plan.rows.flat[j]:
            continue
        rows.append(np.full(len(local) - 1, j))
        cols.append(local[1:])
        data.append(plan.beta.flat[j] / overlap[local[1:]])
    matrix = sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size))
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix
