"""
Шаг по времени для скалярного переноса с диффузией.

Каждая стадия интегратора: обмен фиктивными ячейками, потоки,
предварительное решение U^, повторный обмен и стабилизация (SRD или
FRD). Для 'none' предварительное решение принимается как есть.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import SOLVER_CONFIG
from src.frd import build_frd_plan, frd_apply
from src.mesh.ebgrid import EBGrid
from src.mesh.field import Field
from src.mesh.patches import (
    GhostSchedule, Patch, decompose, fill_ghost, gather_fields, scatter_field,
)
from src.models import GridSpec, SchemeConfig, SrdSettings
from src.solver.fluxes import Discretization
from src.srd import ReadTracker, build_plan, srd_apply, srd_init

logger = logging.getLogger(__name__)


def compute_dt(spec: GridSpec, scheme: SchemeConfig,
               end_time: Optional[float] = None) -> Tuple[float, Optional[int]]:
    """
    Шаг по времени из условия CFL.

    dt * sum_d |v_d| / h_d <= cfl, при диффузии еще nu * dt / h^2 <= cfl / (2d).
    Для скорости вдоль оси это cfl * h / |v|; при косой скорости сумма
    по направлениям держит неразделенную схему MUSCL в границах данных.
    Если задано end_time, шаг уменьшается так, чтобы end_time делилось
    на него нацело; возвращается также число шагов.
    """
    h = min(spec.spacing)
    rate = sum(abs(float(v)) / dx for v, dx in zip(scheme.velocity, spec.spacing))
    limits = []
    if rate > 0.0:
        limits.append(scheme.cfl / rate)
    if scheme.diffusivity > 0.0:
        limits.append(scheme.cfl * h * h / (2 * spec.ndim * scheme.diffusivity))
    dt = min(limits) if limits else scheme.cfl * h
    if end_time is None:
        return dt, None
    steps = max(1, math.ceil(end_time / dt - 1e-12))
    return end_time / steps, steps


class Simulation:
    """
    Решатель на наборе патчей.

    Геометрия строится один раз для всей области с фиктивным слоем
    ghost_preprocess; каждый патч получает ее ограничение и свои планы
    стабилизации.
    """

    def __init__(self, grid: EBGrid, scheme: SchemeConfig,
                 srd: Optional[SrdSettings] = None, n_patches: int = 1,
                 tracker: Optional[ReadTracker] = None):
        ok, message = scheme.validate()
        if not ok:
            raise ValueError(message)
        self.whole = grid
        self.scheme = scheme
        self.srd = srd or SrdSettings()
        ghost = grid.ghost
        if n_patches == 1:
            self.patches = [Patch(0, (0,) * grid.ndim, grid.spec.cells, ghost)]
        else:
            self.patches = decompose(grid.spec, n_patches, ghost)
        self.schedule = GhostSchedule(grid.spec, self.patches)
        self.grids = [grid.restrict(p.lo, p.hi, ghost) for p in self.patches]
        self.discretizations = [Discretization(g) for g in self.grids]
        self.srd_plans = []
        self.frd_plans = []
        if scheme.uses_srd:
            self.srd_plans = [build_plan(g, scheme.srd_variant, self.srd, tracker) for g in self.grids]
        elif scheme.stabilizer == 'frd':
            self.frd_plans = [build_frd_plan(g) for g in self.grids]
        logger.info(f"Решатель готов: {len(self.patches)} патчей, стабилизатор {scheme.stabilizer}, "
                    f"интегратор {scheme.rk}")

    # ------------------------------------------------------------ патчи

    def split(self, field: Field) -> List[Field]:
        return scatter_field(field, self.patches, self.grids)

    def merge(self, fields: Sequence[Field]) -> Field:
        return gather_fields(fields, self.patches, self.whole)

    def initialize(self, field: Field) -> List[Field]:
        """Раскладывает начальные данные и, для SRD, перераспределяет их"""
        fields = fill_ghost(self.split(field), self.patches, self.schedule)
        if self.srd_plans:
            slopes = self.srd.limit_slopes
            fields = [srd_init(plan, f, limit=slopes) for plan, f in zip(self.srd_plans, fields)]
            fill_ghost(fields, self.patches, self.schedule)
        return list(fields)

    # ----------------------------------------------------------- стадии

    def _fluxes(self, discretization: Discretization, values: np.ndarray):
        scheme = self.scheme
        fluxes = discretization.advective_flux(values, scheme.velocity, scheme.limiter)
        if scheme.diffusivity > 0.0:
            diffusive = discretization.diffusive_flux(values, scheme.diffusivity)
            fluxes = [a + b for a, b in zip(fluxes, diffusive)]
        return fluxes

    def stage(self, fields: Sequence[Field], dt: float) -> List[Field]:
        """Одна стабилизированная стадия U -> U + dt * L(U)"""
        fill_ghost(fields, self.patches, self.schedule)
        out = []
        for k, (field, discretization) in enumerate(zip(fields, self.discretizations)):
            fluxes = self._fluxes(discretization, field.values)
            if self.frd_plans:
                conservative, nonconservative = discretization.divergences(fluxes)
                out.append(frd_apply(self.frd_plans[k], field, conservative, nonconservative, dt))
            else:
                u_hat = discretization.provisional_update(field.values, fluxes, dt)
                out.append(field.with_values(u_hat))
        if self.srd_plans:
            fill_ghost(out, self.patches, self.schedule)
            out = [srd_apply(plan, u_hat, limit=self.srd.limit_slopes)
                   for plan, u_hat in zip(self.srd_plans, out)]
        return out

    def advection_diffusion_increment(self, fields: Sequence[Field], dt: float) -> List[np.ndarray]:
        """I = (S(U) - U) / dt, где S - стабилизированная стадия"""
        staged = self.stage(fields, dt)
        return [(s.values - f.values) / dt for s, f in zip(staged, fields)]

    def step(self, fields: Sequence[Field], dt: float) -> List[Field]:
        """Один шаг выбранного интегратора"""
        rk = self.scheme.rk
        time = fields[0].time + dt
        if rk == 'forward-euler':
            result = [f.with_values(s.values) for f, s in zip(fields, self.stage(fields, dt))]
        elif rk == 'heun':
            first = self.stage(fields, dt)
            second = self.stage(first, dt)
            result = [f.with_values(0.5 * (f.values + s.values)) for f, s in zip(fields, second)]
        else:
            base = self.advection_diffusion_increment(fields, dt)
            current = [f.with_values(f.values + dt * i) for f, i in zip(fields, base)]
            for _ in range(self.scheme.pc_iterations):
                increment = self.advection_diffusion_increment(current, dt)
                current = [f.with_values(f.values + 0.5 * dt * (b + i))
                           for f, b, i in zip(fields, base, increment)]
            result = current
        result = [Field(f.grid, f.values, time) for f in result]
        for field in result:
            field.check_finite(SOLVER_CONFIG['blowup_limit'])
        return result

    def advance(self, fields: Sequence[Field], steps: int, dt: float) -> List[Field]:
        """steps шагов над полями патчей"""
        for n in range(steps):
            fields = self.step(fields, dt)
            if logger.isEnabledFor(logging.DEBUG):
                low = min(float(f.valid_values().min()) for f in fields)
                high = max(float(f.valid_values().max()) for f in fields)
                logger.debug(f"Шаг {n + 1}/{steps}, t={fields[0].time:.6g}: min={low:.6g}, max={high:.6g}")
        fill_ghost(fields, self.patches, self.schedule)
        return list(fields)

    def run(self, field: Field, steps: int, dt: float) -> Field:
        """Начальные данные всей области -> решение всей области после steps шагов"""
        return self.merge(self.advance(self.initialize(field), steps, dt))
