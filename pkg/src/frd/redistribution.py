"""
Перераспределение потоков (FRD): базовая схема для сравнения.

Разрезанная ячейка обновляется гибридной дивергенцией
kappa * D^c + (1 - kappa) * D^nc, а недостающая масса раздается
открытым соседям блока 3^d пропорционально их объему.
"""
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from src.mesh.ebgrid import EBGrid
from src.mesh.field import Field

logger = logging.getLogger(__name__)


@dataclass
class FrdPlan:
    """
    Списки соседей разрезанных ячеек.

    scatter[j, i] - доля дефекта ячейки i, получаемая ячейкой j;
    hybrid - ячейки, обновляемые гибридной дивергенцией.
    """
    grid: EBGrid
    scatter: sparse.csr_matrix
    hybrid: np.ndarray

    def __str__(self):
        return f"План FRD: {int(np.count_nonzero(self.hybrid))} разрезанных ячеек"


def build_frd_plan(grid: EBGrid) -> FrdPlan:
    """Соседи каждой разрезанной ячейки рабочей области и первого фиктивного кольца"""
    size = int(np.prod(grid.shape))
    volume = grid.volume
    open_cells = ~grid.blocked
    sources = grid.cut & open_cells & (grid.ring() <= 1)
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=grid.ndim) if any(o)]
    hybrid = np.zeros(grid.shape, dtype=bool)
    rows, cols, data = [], [], []
    for cell in np.argwhere(sources):
        cell = tuple(int(i) for i in cell)
        neighbors = []
        for offset in offsets:
            other = tuple(c + o for c, o in zip(cell, offset))
            if all(0 <= i < s for i, s in zip(other, grid.shape)) and open_cells[other]:
                neighbors.append(other)
        if not neighbors:
            logger.warning(f"У разрезанной ячейки {cell} нет открытых соседей, FRD не применяется")
            continue
        weights = np.array([volume[n] for n in neighbors])
        weights /= weights.sum()
        source = np.ravel_multi_index(cell, grid.shape)
        for n, w in zip(neighbors, weights):
            rows.append(np.ravel_multi_index(n, grid.shape))
            cols.append(source)
            data.append(w)
        hybrid[cell] = True
    scatter = sparse.csr_matrix((data, (rows, cols)), shape=(size, size))
    scatter.sum_duplicates()
    logger.info(f"План FRD построен: {int(np.count_nonzero(hybrid))} разрезанных ячеек")
    return FrdPlan(grid, scatter, hybrid)


def frd_apply(plan: FrdPlan, u_n: Field, conservative_div: np.ndarray,
              nonconservative_div: np.ndarray, dt: float) -> Field:
    """
    Шаг с перераспределением потоков.

    conservative_div = sum(F n A) / V, nonconservative_div = sum(F n A) / h^d,
    формы (ncomp, *shape). Обновляются только рабочие открытые ячейки.
    """
    grid = plan.grid
    kappa = grid.kappa
    volume = grid.volume
    hybrid = plan.hybrid
    mix = np.where(hybrid, kappa, 1.0)
    divergence = mix * conservative_div + (1.0 - mix) * nonconservative_div
    defect = np.where(hybrid, -dt * volume * (1.0 - kappa) * (conservative_div - nonconservative_div), 0.0)

    target = np.zeros(grid.shape, dtype=bool)
    target[grid.valid] = True
    target &= ~grid.blocked
    out = u_n.values.copy()
    for c in range(out.shape[0]):
        gained = (plan.scatter @ defect[c].ravel()).reshape(grid.shape)
        update = u_n.values[c] - dt * divergence[c]
        update = update + np.divide(gained, volume, out=np.zeros(grid.shape), where=volume > 0)
        out[c, target] = update[target]
    return u_n.with_values(out)
