"""
Модели численной схемы и параметров перераспределения.
"""
from dataclasses import dataclass
from typing import Tuple

from config.settings import SOLVER_CONFIG

STABILIZERS = ('none', 'frd', 'srd-original', 'srd-weighted')
INTEGRATORS = ('forward-euler', 'heun', 'predictor-corrector')
MERGE_MODES = ('normal', 'central', 'vertical', 'horizontal')


@dataclass
class SchemeConfig:
    """Параметры схемы: скорость, вязкость, CFL, стабилизатор, интегратор"""
    velocity: Tuple[float, ...] = (1.0, 0.0)
    diffusivity: float = 0.0
    cfl: float = 0.5
    stabilizer: str = 'srd-weighted'
    limiter: bool = True
    rk: str = 'heun'
    pc_iterations: int = 1

    def __post_init__(self):
        self.velocity = tuple(float(v) for v in self.velocity)

    @property
    def uses_srd(self) -> bool:
        return self.stabilizer.startswith('srd-')

    @property
    def srd_variant(self) -> str:
        """'original' или 'weighted'"""
        return self.stabilizer[len('srd-'):] if self.uses_srd else ''

    def validate(self):
        """Проверяет параметры схемы, возвращает (ok, сообщение)"""
        if self.stabilizer not in STABILIZERS:
            return False, f"Неизвестный стабилизатор: {self.stabilizer}"
        if self.rk not in INTEGRATORS:
            return False, f"Неизвестный интегратор: {self.rk}"
        if not 0.0 < self.cfl <= 1.0:
            return False, "Число CFL должно лежать в (0, 1]"
        if self.diffusivity < 0.0:
            return False, "Коэффициент диффузии не может быть отрицательным"
        if self.pc_iterations < 1:
            return False, "Число итераций корректора должно быть не меньше 1"
        return True, None

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'velocity': list(self.velocity),
            'diffusivity': self.diffusivity,
            'cfl': self.cfl,
            'stabilizer': self.stabilizer,
            'limiter': self.limiter,
            'rk': self.rk,
            'pc_iterations': self.pc_iterations,
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        return cls(
            velocity=tuple(data.get('velocity', (1.0, 0.0))),
            diffusivity=float(data.get('diffusivity', 0.0)),
            cfl=float(data.get('cfl', 0.5)),
            stabilizer=data.get('stabilizer', 'srd-weighted'),
            limiter=bool(data.get('limiter', True)),
            rk=data.get('rk', 'heun'),
            pc_iterations=int(data.get('pc_iterations', 1)),
        )


@dataclass
class SrdSettings:
    """
    Параметры построения окрестностей и наклонов.

    v_target задается в долях объема полной ячейки.
    """
    v_target: float = SOLVER_CONFIG['v_target']
    tol_sym: float = SOLVER_CONFIG['tol_sym']
    merge_tol: float = SOLVER_CONFIG['merge_tol']
    merge_mode: str = 'normal'
    limit_slopes: bool = True
    stencil_growth: bool = True
    alt_stencil_criterion: bool = False

    def validate(self):
        """Проверяет параметры, возвращает (ok, сообщение)"""
        if not 0.0 < self.v_target <= 1.0:
            return False, "Целевой объем должен лежать в (0, 1]"
        if self.merge_mode not in MERGE_MODES:
            return False, f"Неизвестный режим слияния: {self.merge_mode}"
        if self.tol_sym < 0.0 or self.merge_tol < 0.0:
            return False, "Допуски не могут быть отрицательными"
        return True, None

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'v_target': self.v_target,
            'tol_sym': self.tol_sym,
            'merge_tol': self.merge_tol,
            'merge_mode': self.merge_mode,
            'limit_slopes': self.limit_slopes,
            'stencil_growth': self.stencil_growth,
            'alt_stencil_criterion': self.alt_stencil_criterion,
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        defaults = cls()
        return cls(
            v_target=float(data.get('v_target', defaults.v_target)),
            tol_sym=float(data.get('tol_sym', defaults.tol_sym)),
            merge_tol=float(data.get('merge_tol', defaults.merge_tol)),
            merge_mode=data.get('merge_mode', defaults.merge_mode),
            limit_slopes=bool(data.get('limit_slopes', True)),
            stencil_growth=bool(data.get('stencil_growth', True)),
            alt_stencil_criterion=bool(data.get('alt_stencil_criterion', False)),
        )
