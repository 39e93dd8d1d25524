"""
Модуль для выгрузки плана перераспределения в Excel.

Используемые библиотеки:
- xlsxwriter: создание файлов .xlsx с форматированием
  - лист "Матрица A": плотная подматрица весов по ячейкам слияния
  - лист "Окрестности": M, N, alpha, beta, V^ по ячейкам
  - лист "Сводка": статистика плана
"""
import logging
from datetime import datetime
from typing import List

import numpy as np
import xlsxwriter

from src.srd.plan import NeighborhoodPlan

logger = logging.getLogger(__name__)

# одинаковые метаданные при повторных запусках
CREATED = datetime(2000, 1, 1)


def matrix_cells(plan: NeighborhoodPlan) -> List[int]:
    """Глобальные номера рабочих ячеек, затронутых слиянием"""
    ring = plan.grid.ring()
    cells = set()
    for owner, members in plan.members.items():
        cells.update(members)
    cells = [c for c in cells if ring.flat[plan.grid.local_flat(c)] == 0]
    return sorted(cells)


def _label(plan: NeighborhoodPlan, cell: int) -> str:
    return str(tuple(int(i) for i in plan.grid.unflat(cell)))


def write_matrix_csv(plan: NeighborhoodPlan, path: str) -> int:
    """Матрица A в CSV: первая строка и первый столбец - индексы ячеек"""
    cells = matrix_cells(plan)
    dense = plan.dense_matrix(cells) if cells else np.zeros((0, 0))
    labels = [_label(plan, c) for c in cells]
    with open(path, 'w', encoding='utf-8') as f:
        f.write(';' + ';'.join(labels) + '\n')
        for label, row in zip(labels, dense):
            f.write(label + ';' + ';'.join(repr(float(v)) for v in row) + '\n')
    logger.info(f"Матрица весов записана: {path} ({len(cells)} ячеек)")
    return len(cells)


def export_plan_to_excel(plan: NeighborhoodPlan, filename: str) -> bool:
    """Создает книгу Excel с матрицей весов и окрестностями"""
    try:
        workbook = xlsxwriter.Workbook(filename, {'nan_inf_to_errors': True})
        workbook.set_properties({'title': 'План перераспределения', 'created': CREATED})

        title_format = workbook.add_format({
            'bold': True,
            'font_size': 14,
            'fg_color': '#4A90A4',
            'font_color': 'white',
            'border': 1,
            'align': 'center',
            'valign': 'vcenter'
        })
        header_format = workbook.add_format({
            'bold': True,
            'font_size': 11,
            'fg_color': '#E8F4F8',
            'border': 1,
            'align': 'center',
            'valign': 'vcenter'
        })
        weight_format = workbook.add_format({'num_format': '0.000000', 'border': 1, 'align': 'center'})
        zero_format = workbook.add_format({'font_color': '#AAAAAA', 'border': 1, 'align': 'center'})
        text_format = workbook.add_format({'border': 1, 'valign': 'top'})

        cells = matrix_cells(plan)
        labels = [_label(plan, c) for c in cells]
        dense = plan.dense_matrix(cells) if cells else np.zeros((0, 0))

        # ЛИСТ 1: МАТРИЦА
        sheet = workbook.add_worksheet('Матрица A')
        sheet.merge_range(0, 0, 0, max(len(cells), 1), f"Матрица весов ({plan.variant})", title_format)
        sheet.write(2, 0, 'j \\ i', header_format)
        for col, label in enumerate(labels, start=1):
            sheet.write(2, col, label, header_format)
        for row, (label, values) in enumerate(zip(labels, dense), start=3):
            sheet.write(row, 0, label, header_format)
            for col, value in enumerate(values, start=1):
                sheet.write_number(row, col, float(value), weight_format if value else zero_format)
        sheet.set_column(0, len(cells), 12)
        sheet.freeze_panes(3, 1)

        # ЛИСТ 2: ОКРЕСТНОСТИ
        sheet = workbook.add_worksheet('Окрестности')
        headers = ['Ячейка', 'M', 'N', 'alpha', 'beta', 'V^ / h^d']
        for col, header in enumerate(headers):
            sheet.write(0, col, header, header_format)
        grid = plan.grid
        h_d = grid.spec.cell_volume
        for row, cell in enumerate(cells, start=1):
            p = np.unravel_index(grid.local_flat(cell), grid.shape)
            members = ' '.join(_label(plan, m) for m in plan.M(cell))
            sheet.write(row, 0, _label(plan, cell), text_format)
            sheet.write(row, 1, members, text_format)
            sheet.write_number(row, 2, int(plan.overlap[p]))
            sheet.write_number(row, 3, float(plan.alpha[p]), weight_format)
            sheet.write_number(row, 4, float(plan.beta[p]), weight_format)
            sheet.write_number(row, 5, float(plan.v_hat[p]) / h_d, weight_format)
        sheet.set_column(0, 0, 14)
        sheet.set_column(1, 1, 40)
        sheet.set_column(2, 5, 12)
        sheet.freeze_panes(1, 0)

        # ЛИСТ 3: СВОДКА
        sheet = workbook.add_worksheet('Сводка')
        sheet.write(0, 0, 'Показатель', header_format)
        sheet.write(0, 1, 'Значение', header_format)
        for row, (key, value) in enumerate(plan.statistics().items(), start=1):
            sheet.write(row, 0, key, text_format)
            sheet.write_number(row, 1, float(value))
        sheet.set_column(0, 1, 20)

        workbook.close()
        logger.info(f"Книга плана создана: {filename}")
        return True
    except Exception as e:
        logger.error(f"Ошибка создания книги плана: {e}")
        return False
