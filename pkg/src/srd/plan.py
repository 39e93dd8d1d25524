"""
Предвычисленный план перераспределения состояний.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy import sparse

from src.mesh.ebgrid import EBGrid
from src.models import SrdSettings


@dataclass
class Stencil:
    """
    Шаблон наклона окрестности j в локальных плоских номерах.

    weights - матрица наименьших квадратов (ndim x len(cells)):
    sigma_j = weights @ (Q^_s - Q^_j).
    """
    owner: int
    cells: np.ndarray
    receivers: np.ndarray
    weights: np.ndarray
    grown: Tuple[bool, ...] = ()
    deficient: bool = False
    considered: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


@dataclass
class NeighborhoodPlan:
    """
    Окрестности M, счетчики N, обратные списки W, веса alpha и beta,
    взвешенные объемы V^ и центроиды x^.

    Матрица A хранится над локальными плоскими номерами расширенной
    области патча: A[j, i] = w_{i,j}, так что V^ = A V.
    """
    grid: EBGrid
    variant: str
    settings: SrdSettings
    members: Dict[int, Tuple[int, ...]]
    overlap: np.ndarray
    overlap_sets: Dict[int, Tuple[int, ...]]
    alpha: np.ndarray
    beta: np.ndarray
    v_target: float
    rows: np.ndarray
    matrix: sparse.csr_matrix = None
    v_hat: np.ndarray = None
    x_hat: np.ndarray = None
    positions: np.ndarray = None
    stencils: Dict[int, Stencil] = field(default_factory=dict)
    gradient: List[sparse.csr_matrix] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    def __str__(self):
        return f"План SRD ({self.variant}): {len(self.members)} сливающихся ячеек"

    def M(self, cell: int) -> Tuple[int, ...]:
        """Окрестность ячейки по глобальному номеру"""
        local = np.unravel_index(self.grid.local_flat(cell), self.grid.shape)
        if self.grid.blocked[local]:
            return ()
        return self.members.get(cell, (cell,))

    def W(self, cell: int) -> Tuple[int, ...]:
        """Окрестности, содержащие ячейку"""
        local = np.unravel_index(self.grid.local_flat(cell), self.grid.shape)
        if self.grid.blocked[local]:
            return ()
        return self.overlap_sets.get(cell, (cell,))

    @property
    def merged(self) -> np.ndarray:
        """Маска ячеек с окрестностью из двух и более ячеек"""
        mask = np.zeros(self.grid.shape, dtype=bool)
        if self.members:
            local = self.grid.local_flat(np.fromiter(self.members, dtype=np.int64))
            mask.flat[local] = True
        return mask

    @property
    def inert(self) -> np.ndarray:
        """Ячейки, которые перераспределение не меняет: N = 1 и M = {i}"""
        return self.rows & (self.overlap == 1) & ~self.merged

    def statistics(self) -> Dict[str, float]:
        """Сводка плана по рабочим ячейкам"""
        valid = self.grid.valid
        open_cells = ~self.grid.blocked[valid]
        v_hat = self.v_hat[valid][open_cells] if self.v_hat is not None else np.array([1.0])
        merged = self.merged[valid]
        return {
            'merged_cells': int(np.count_nonzero(merged)),
            'max_overlap': int(self.overlap[valid].max(initial=0)),
            'min_v_hat': float(v_hat.min(initial=np.inf) / self.grid.spec.cell_volume),
            'grown_stencils': int(sum(any(s.grown) for s in self.stencils.values())),
            'rank_deficient': len(self.diagnostics),
        }

    def dense_matrix(self, cells) -> np.ndarray:
        """Плотная подматрица A по списку глобальных номеров"""
        local = self.grid.local_flat(np.asarray(cells, dtype=np.int64))
        return self.matrix[local][:, local].toarray()
