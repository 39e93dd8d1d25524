"""
Предобработка: окрестности, веса и шаблоны наклонов.
"""
import itertools
import logging
from typing import Optional

import numpy as np
from scipy import sparse

from config.settings import SOLVER_CONFIG
from src.mesh.ebgrid import EBGrid
from src.models import SrdSettings
from src.srd.neighborhoods import build_neighborhoods, compute_overlaps
from src.srd.plan import NeighborhoodPlan, Stencil
from src.srd.tracking import ReadTracker
from src.srd.weights import compute_weights_original, compute_weights_weighted

logger = logging.getLogger(__name__)

VARIANTS = ('original', 'weighted')


def _offsets(ndim: int, extent) -> np.ndarray:
    ranges = [range(-e, e + 1) for e in extent]
    return np.array(list(itertools.product(*ranges)))


def _within(index: np.ndarray, shape) -> np.ndarray:
    return np.all((index >= 0) & (index < np.array(shape)), axis=1)


def build_stencils(plan: NeighborhoodPlan) -> NeighborhoodPlan:
    """
    Шаблоны наименьших квадратов для окрестностей из двух и более ячеек.

    Базовый шаблон - открытые ячейки блока 3^d. По оси d шаблон
    расширяется до 5, если все x^ шаблона лежат не дальше h_d/2 от x^_j
    (или, при alt_stencil_criterion, если размах x^ по оси не больше
    h_d/2). Добавленная ячейка допускается, только если все члены ее
    окрестности лежат в пределах ghost_postprocess от каждого
    получателя.
    """
    grid = plan.grid
    ndim = grid.ndim
    h = grid.spacing
    ring = grid.ring()
    usable = plan.rows & ~grid.blocked
    reach = SOLVER_CONFIG['ghost_postprocess']
    settings = plan.settings
    base = _offsets(ndim, [1] * ndim)
    base = base[np.any(base != 0, axis=1)]
    x_hat = plan.x_hat.reshape(ndim, -1)
    lo = np.array(grid.lo)

    for owner, cells in plan.members.items():
        members = grid.local_flat(np.array(cells, dtype=np.int64))
        j = int(members[0])
        if not plan.rows.flat[j] or not np.any(ring.flat[members] == 0):
            continue
        center = np.array(np.unravel_index(j, grid.shape))

        candidates = center + base
        candidates = candidates[_within(candidates, grid.shape)]
        flat = np.ravel_multi_index(tuple(candidates.T), grid.shape)
        stencil = flat[usable.flat[flat]]

        delta = x_hat[:, stencil] - x_hat[:, [j]]
        grown = [False] * ndim
        considered = np.empty(0, dtype=np.int64)
        if settings.stencil_growth and len(stencil):
            for d in range(ndim):
                if settings.alt_stencil_criterion:
                    values = np.append(x_hat[d, stencil], x_hat[d, j])
                    grown[d] = bool(values.max() - values.min() <= 0.5 * h[d])
                else:
                    grown[d] = bool(np.abs(delta[d]).max() <= 0.5 * h[d])
        if any(grown):
            wide = center + _offsets(ndim, [2 if g else 1 for g in grown])
            wide = wide[_within(wide, grid.shape)]
            wide_flat = np.ravel_multi_index(tuple(wide.T), grid.shape)
            extra = [int(s) for s in wide_flat
                     if s != j and s not in set(flat) and usable.flat[s]]
            considered = np.array(extra, dtype=np.int64)
            receivers = np.array(np.unravel_index(members, grid.shape)).T
            admitted = []
            for s in extra:
                their = grid.local_flat(np.array(plan.M(int(grid.global_flat(s))), dtype=np.int64))
                their = np.array(np.unravel_index(their, grid.shape)).T
                gap = np.abs(their[:, None, :] - receivers[None, :, :]).max()
                if gap <= reach:
                    admitted.append(s)
            if admitted:
                stencil = np.concatenate([stencil, np.array(admitted, dtype=np.int64)])
                delta = x_hat[:, stencil] - x_hat[:, [j]]

        deficient = len(stencil) < ndim or np.linalg.matrix_rank(delta.T) < ndim
        if deficient:
            weights = np.zeros((ndim, len(stencil)))
            where = tuple(int(c) + l for c, l in zip(center, lo))
            message = f"Вырожденный шаблон наклона в ячейке {where}"
            plan.diagnostics.append(message)
            logger.warning(message)
        else:
            weights = np.linalg.pinv(delta.T)
        plan.stencils[j] = Stencil(
            owner=j,
            cells=stencil,
            receivers=members,
            weights=weights,
            grown=tuple(grown),
            deficient=bool(deficient),
            considered=considered,
        )

    plan.gradient = _gradient_operators(plan)
    return plan


def _gradient_operators(plan: NeighborhoodPlan):
    """Разреженные операторы: sigma_d = G_d @ Q^"""
    grid = plan.grid
    size = int(np.prod(grid.shape))
    operators = []
    for d in range(grid.ndim):
        rows, cols, data = [], [], []
        for j, stencil in plan.stencils.items():
            weights = stencil.weights[d]
            rows.append(np.full(len(stencil.cells) + 1, j))
            cols.append(np.append(stencil.cells, j))
            data.append(np.append(weights, -weights.sum()))
        if rows:
            matrix = sparse.csr_matrix(
                (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                shape=(size, size))
            matrix.sum_duplicates()
        else:
            matrix = sparse.csr_matrix((size, size))
        operators.append(matrix)
    return operators


def build_plan(grid: EBGrid, variant: str = 'weighted',
               settings: Optional[SrdSettings] = None,
               tracker: Optional[ReadTracker] = None) -> NeighborhoodPlan:
    """Полная предобработка для сетки патча"""
    if variant not in VARIANTS:
        raise ValueError(f"Неизвестный вариант SRD: {variant}")
    settings = settings or SrdSettings()
    members = build_neighborhoods(grid, settings)
    overlap, overlap_sets = compute_overlaps(grid, members)
    if variant == 'original':
        plan = compute_weights_original(grid, members, overlap, overlap_sets, settings)
    else:
        plan = compute_weights_weighted(grid, members, overlap, overlap_sets, settings)
    build_stencils(plan)
    stats = plan.statistics()
    logger.info(f"План SRD ({variant}) построен: сливающихся ячеек {stats['merged_cells']}, "
                f"максимальное N {stats['max_overlap']}")
    if tracker is not None:
        tracker.trace(plan)
    return plan
