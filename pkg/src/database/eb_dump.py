"""
Текстовые дампы: база геометрии, поля и планы перераспределения.
"""
import csv
import logging
from typing import Dict, List, Tuple

import numpy as np

from src.errors import ConfigError
from src.mesh.ebgrid import EBGrid
from src.mesh.field import Field

logger = logging.getLogger(__name__)

FIELD_HEADER = ('NDIM', 'NX', 'NY', 'NZ', 'NCOMP', 'TIME')


def _valid_indices(grid: EBGrid):
    """Глобальные индексы рабочих ячеек: сначала k, затем j, затем i"""
    cells = grid.spec.cells
    order = [np.arange(n) for n in reversed(cells)]
    for reversed_index in np.array(np.meshgrid(*order, indexing='ij')).reshape(len(cells), -1).T:
        yield tuple(int(i) for i in reversed(reversed_index))


def eb_database_header(ndim: int) -> List[str]:
    """Заголовок базы геометрии"""
    axes = 'xyz'[:ndim]
    header = ['cell_index', 'cell_type', 'kappa']
    header += [f'centroid_{a}' for a in axes]
    header += [f'aperture_{a}_{side}' for a in axes for side in ('lo', 'hi')]
    header += [f'face_{a}_{side}_{b}' for a in axes for side in ('lo', 'hi') for b in axes]
    header += ['eb_area']
    header += [f'eb_normal_{a}' for a in axes]
    header += [f'eb_centroid_{a}' for a in axes]
    return header


def write_eb_database(grid: EBGrid, path: str) -> int:
    """Записывает по одной строке на рабочую ячейку, возвращает число строк"""
    rows = 0
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(eb_database_header(grid.ndim))
        for index in _valid_indices(grid):
            record = grid.cell(index)
            line = [' '.join(str(i) for i in index), record.cell_type, repr(record.kappa)]
            line += [repr(c) for c in record.centroid]
            line += [repr(a) for a in record.apertures]
            line += [repr(c) for center in record.face_centroids for c in center]
            line += [repr(record.eb_area)]
            line += [repr(c) for c in record.eb_normal]
            line += [repr(c) for c in record.eb_centroid]
            writer.writerow(line)
            rows += 1
    logger.info(f"База геометрии записана: {path} ({rows} ячеек)")
    return rows


def write_field(field: Field, path: str):
    """Дамп поля: заголовок и строки i,j,k,x,y,z,kappa,u..."""
    grid = field.grid
    cells = list(grid.spec.cells) + [1] * (3 - grid.ndim)
    positions = grid.positions()
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(FIELD_HEADER)
        writer.writerow([grid.ndim] + cells + [field.ncomp, repr(float(field.time))])
        for index in _valid_indices(grid):
            p = grid.local(index)
            ijk = list(index) + [0] * (3 - grid.ndim)
            xyz = [repr(float(positions[(d,) + tuple(p)])) for d in range(grid.ndim)]
            xyz += ['0.0'] * (3 - grid.ndim)
            values = [repr(float(field.values[(c,) + tuple(p)])) for c in range(field.ncomp)]
            writer.writerow(ijk + xyz + [repr(float(grid.kappa[tuple(p)]))] + values)
    logger.debug(f"Поле записано: {path}")


def read_field(path: str) -> Tuple[Dict[str, float], np.ndarray]:
    """
    Читает дамп поля.

    Возвращает заголовок {NDIM, NX, NY, NZ, NCOMP, TIME} и массив строк
    формы (число ячеек, 7 + NCOMP).
    """
    try:
        with open(path, newline='', encoding='utf-8') as f:
            reader = csv.reader(f)
            names = next(reader)
            values = next(reader)
            rows = [[float(v) for v in row] for row in reader if row]
    except (OSError, StopIteration, ValueError) as e:
        raise ConfigError(f"Не удалось прочитать дамп поля {path}: {e}")
    if tuple(names) != FIELD_HEADER:
        raise ConfigError(f"Неверный заголовок дампа поля {path}")
    header = {name: float(v) for name, v in zip(names, values)}
    ncomp = int(header['NCOMP'])
    return header, np.array(rows, dtype=float).reshape(-1, 7 + ncomp)


def _cell(grid, flat) -> Tuple[int, ...]:
    return tuple(int(i) for i in grid.unflat(flat))


def plan_lines(plan) -> List[str]:
    """Текст плана: окрестности, перекрытия и веса по рабочим ячейкам"""
    grid = plan.grid
    ring = grid.ring()
    lines = [f"variant={plan.variant}",
             f"v_target={plan.v_target!r}"]
    stats = plan.statistics()
    lines.append(','.join(f"{key}={value}" for key, value in stats.items()))
    for owner in sorted(plan.members):
        index = _cell(grid, owner)
        if ring[grid.local(index)] != 0:
            continue
        members = [_cell(grid, m) for m in plan.members[owner]]
        lines.append(f"M{index} = {members}")
    for cell in sorted(plan.overlap_sets):
        index = _cell(grid, cell)
        p = grid.local(index)
        if ring[p] != 0 or len(plan.overlap_sets[cell]) == 1:
            continue
        lines.append(f"N{index} = {int(plan.overlap[p])} "
                     f"alpha={float(plan.alpha[p])!r} beta={float(plan.beta[p])!r} "
                     f"v_hat={float(plan.v_hat[p])!r}")
    return lines


def write_plan(plan, path: str):
    """Текстовый дамп плана перераспределения"""
    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(plan_lines(plan)) + '\n')
    logger.info(f"План записан: {path}")
