"""
Исключения инструментария.

Каждое исключение несет код завершения командной строки.
"""
from typing import Optional, Tuple


class EBError(Exception):
    """Базовая ошибка инструментария"""
    exit_code = 1

    def __init__(self, message: str, cell: Optional[Tuple[int, ...]] = None):
        if cell is not None:
            message = f"{message} (ячейка {tuple(int(c) for c in cell)})"
        super().__init__(message)
        self.cell = cell


class ConfigError(EBError):
    """Ошибка разбора или проверки конфигурации эксперимента"""
    exit_code = 2

    def __init__(self, message: str, section: Optional[str] = None,
                 key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if section:
            where.append(f"секция [{section}]")
        if key:
            where.append(f"поле '{key}'")
        if line is not None:
            where.append(f"строка {line}")
        if where:
            message = f"{message}: {', '.join(where)}"
        super().__init__(message)
        self.section = section
        self.key = key
        self.line = line


class GridMismatch(EBError):
    """Сравниваемые результаты получены на разных сетках"""
    exit_code = 2


class GeometryError(EBError):
    """Неподдерживаемая геометрия"""
    exit_code = 4


class MultiCutCell(GeometryError):
    """Ребро с несколькими пересечениями или ячейка с двумя гранями границы"""


class NumericError(EBError):
    """Численная ошибка"""
    exit_code = 3


class NonFiniteState(NumericError):
    """Решение стало неконечным (неустойчивость)"""


class NeighborhoodTooSmall(NumericError):
    """Окрестность не набирает целевой объем даже в блоке 3^d"""


class DegenerateBeta(NumericError):
    """Малая ячейка без соседей в окрестности"""


class WeightSumViolation(NumericError):
    """Сумма весов по столбцу отличается от единицы"""


class GhostWidthTooSmall(NumericError):
    """Чтение за пределами фиктивного слоя"""

    def __init__(self, message: str, cell: Optional[Tuple[int, ...]] = None,
                 offset: Optional[Tuple[int, ...]] = None, quantity: str = ''):
        if offset is not None:
            message = f"{message}: '{quantity}' смещение {tuple(int(o) for o in offset)}"
        super().__init__(message, cell)
        self.offset = offset
        self.quantity = quantity


class DecomposeError(NumericError):
    """Невозможно разбить область на заданное число патчей"""
