"""
Программный интерфейс экспериментов: запуск, серия, сравнение, дамп плана.
"""
import asyncio
import csv
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import SOLVER_CONFIG
from src.database import read_field, write_eb_database, write_field, write_plan
from src.errors import ConfigError, EBError, GridMismatch, NumericError
from src.geometry import Constant, ImplicitFn, parse_csg, ramp
from src.mesh import EBGrid, Field, build_ebgrid
from src.models import ExperimentConfig
from src.solver import Discretization, Simulation, compute_dt
from src.srd import ReadTracker, build_plan
from src.utils.reports import artifact_path, ensure_directory_exists, get_reports_directory

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Итог одного запуска"""
    config: ExperimentConfig
    field: Field
    initial: Field
    dt: float
    steps: int
    seconds: float = 0.0
    statistics: Dict[str, float] = field(default_factory=dict)
    directory: Optional[str] = None

    def summary(self) -> Dict[str, float]:
        """Сводка запуска для summary.txt и серии"""
        values = self.field.valid_values()
        open_cells = ~self.field.grid.covered[self.field.grid.valid]
        before, after = self.initial.total(), self.field.total()
        data = {
            'stabilizer': self.config.scheme.stabilizer,
            'steps': self.steps,
            'dt': self.dt,
            'time': self.field.time,
            'min': float(values[:, open_cells].min(initial=np.inf)),
            'max': float(values[:, open_cells].max(initial=-np.inf)),
            'total_before': float(before[0]),
            'total_after': float(after[0]),
            'total_drift': float(np.max(np.abs(after - before))),
        }
        data.update(self.statistics)
        return data


def build_geometry(config: ExperimentConfig) -> ImplicitFn:
    """Неявная функция тела по описанию эксперимента"""
    geometry = config.geometry
    ndim = config.grid.ndim
    if geometry.kind == 'ramp':
        point = np.zeros(ndim)
        point[:len(geometry.wall_point)] = geometry.wall_point[:ndim]
        point[1] += geometry.wall_offset * config.grid.spacing[1]
        return ramp(geometry.angle, point)
    if geometry.kind == 'csg':
        return parse_csg(geometry.csg, ndim)
    return Constant(-1.0)


def build_grid(config: ExperimentConfig, ghost: Optional[int] = None) -> EBGrid:
    ghost = SOLVER_CONFIG['ghost_preprocess'] if ghost is None else ghost
    return build_ebgrid(build_geometry(config), config.grid, ghost)


def _domain(config: ExperimentConfig) -> Tuple[np.ndarray, np.ndarray]:
    spec = config.grid
    origin = np.asarray(spec.origin)
    length = np.asarray(spec.cells) * np.asarray(spec.spacing)
    return origin, length


def _direction(config: ExperimentConfig) -> np.ndarray:
    velocity = np.asarray(config.scheme.velocity)
    speed = np.linalg.norm(velocity)
    if speed == 0.0:
        direction = np.zeros_like(velocity)
        direction[0] = 1.0
        return direction
    return velocity / speed


def _params(config: ExperimentConfig, defaults: Sequence[float]) -> np.ndarray:
    given = list(config.run.initial_params)
    return np.array(given + list(defaults[len(given):]), dtype=float)


def initial_field(config: ExperimentConfig, grid: EBGrid) -> Field:
    """
    Начальные данные в центроидах ячеек.

    heaviside: U = 1 при (x - p) . v/|v| < 0, p по умолчанию центр области;
    constant: c; linear: a0 + a . x; sine: sin(2 pi k . (x - origin) / L);
    gaussian: exp(-|x - c|^2 / w^2); random: равномерные значения из [0, 1).
    """
    kind = config.run.initial
    ndim = grid.ndim
    origin, length = _domain(config)
    center = origin + 0.5 * length
    shape = (-1,) + (1,) * ndim

    if kind == 'random':
        rng = np.random.default_rng(config.run.seed)
        values = rng.uniform(0.0, 1.0, size=(1,) + tuple(grid.spec.cells))
        padded = np.zeros((1,) + tuple(grid.shape))
        padded[(slice(None),) + grid.valid] = values
        padded = np.where(grid.covered, 0.0, padded)
        return Field(grid, padded)

    def function(x: np.ndarray) -> np.ndarray:
        if kind == 'heaviside':
            point = _params(config, center)
            side = np.einsum('d...,d->...', x - point.reshape(shape), _direction(config))
            return (side < 0.0).astype(float)
        if kind == 'constant':
            return np.full(x.shape[1:], _params(config, [1.0])[0])
        if kind == 'linear':
            a = _params(config, [0.0] + [float(d + 1) for d in range(ndim)])
            return a[0] + np.einsum('d...,d->...', x, a[1:ndim + 1])
        if kind == 'sine':
            k = _params(config, [1.0] + [0.0] * (ndim - 1))
            phase = np.einsum('d...,d->...', (x - origin.reshape(shape)) / length.reshape(shape), k)
            return np.sin(2.0 * np.pi * phase)
        c = _params(config, list(center) + [0.1 * float(length.min())])
        r2 = np.sum((x - c[:ndim].reshape(shape)) ** 2, axis=0)
        return np.exp(-r2 / c[ndim] ** 2)

    return Field.from_function(grid, function)


def profile_rows(field: Field, eb_profile: bool = False) -> List[list]:
    """
    Профиль вдоль первой разрезанной ячейки каждого столбца.

    Для каждой пары (i, k) берется наименьший j с разрезанной рабочей
    ячейкой. При eb_profile добавляется значение, восстановленное в
    центроид границы по градиенту наименьших квадратов.
    """
    grid = field.grid
    cut = grid.cut[grid.valid]
    positions = grid.positions()[(slice(None),) + grid.valid]
    values = field.valid_values()
    gradient = None
    if eb_profile:
        gradient = Discretization(grid).lsq_gradient(field.values)[(slice(None), slice(None)) + grid.valid]
    h = grid.spacing
    origin = np.asarray(grid.spec.origin)
    rows = []
    cells = grid.spec.cells
    columns = [(i, k) for k in range(cells[2] if grid.ndim == 3 else 1) for i in range(cells[0])]
    for i, k in columns:
        column = cut[i, :, k] if grid.ndim == 3 else cut[i, :]
        hits = np.flatnonzero(column)
        if hits.size == 0:
            continue
        j = int(hits[0])
        p = (i, j, k) if grid.ndim == 3 else (i, j)
        xyz = [float(positions[(d,) + p]) for d in range(grid.ndim)] + [0.0] * (3 - grid.ndim)
        row = [i, j, k] + xyz + [float(grid.kappa[grid.valid][p])]
        row += [float(values[(c,) + p]) for c in range(field.ncomp)]
        if gradient is not None:
            lp = tuple(q + grid.ghost for q in p)
            eb = origin + (np.asarray(p) + 0.5 + grid.eb_centroid[(slice(None),) + lp]) * h
            offset = eb - positions[(slice(None),) + p]
            row += [float(values[(c,) + p] + gradient[(c, slice(None)) + p] @ offset)
                    for c in range(field.ncomp)]
        rows.append(row)
    return rows


def write_profile(field: Field, path: str, eb_profile: bool = False):
    header = ['i', 'j', 'k', 'x', 'y', 'z', 'kappa'] + [f'u_{c}' for c in range(field.ncomp)]
    if eb_profile:
        header += [f'u_eb_{c}' for c in range(field.ncomp)]
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in profile_rows(field, eb_profile):
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def run_experiment(config: ExperimentConfig, out_dir: Optional[str] = None,
                   patches: Optional[int] = None, check_reads: Optional[bool] = None) -> RunResult:
    """
    Строит сетку и планы, выполняет шаги и пишет объявленные артефакты.

    Ошибки модулей пробрасываются как EBError с кодом завершения.
    """
    started = time.perf_counter()
    patches = config.run.patches if patches is None else patches
    check_reads = config.run.check_reads if check_reads is None else check_reads
    logger.info(f"Запуск: {config}, стабилизатор {config.scheme.stabilizer}, патчей {patches}")

    grid = build_grid(config)
    tracker = ReadTracker() if check_reads else None
    simulation = Simulation(grid, config.scheme, config.srd, patches, tracker)
    dt, steps = compute_dt(config.grid, config.scheme, config.run.end_time)
    steps = config.run.steps if steps is None else steps

    fields = simulation.initialize(initial_field(config, grid))
    initial = simulation.merge(fields)
    final = simulation.merge(simulation.advance(fields, steps, dt))

    statistics = {}
    if simulation.srd_plans:
        per_patch = [plan.statistics() for plan in simulation.srd_plans]
        statistics = {
            'merged_cells': sum(s['merged_cells'] for s in per_patch),
            'max_overlap': max(s['max_overlap'] for s in per_patch),
            'min_v_hat': min(s['min_v_hat'] for s in per_patch),
            'grown_stencils': sum(s['grown_stencils'] for s in per_patch),
            'rank_deficient': sum(s['rank_deficient'] for s in per_patch),
        }
    result = RunResult(config, final, initial,
                       dt, steps, time.perf_counter() - started, statistics)

    if out_dir is not None:
        result.directory = out_dir
        write_artifacts(result, grid, out_dir)
    logger.info(f"Запуск завершен за {result.seconds:.2f} с: min={result.summary()['min']:.6g}, "
                f"max={result.summary()['max']:.6g}")
    return result


def write_artifacts(result: RunResult, grid: EBGrid, out_dir: str):
    """Записывает артефакты запуска в каталог"""
    from src.export_to_xlsx import export_plan_to_excel, write_matrix_csv

    os.makedirs(out_dir, exist_ok=True)
    config = result.config
    output = config.output
    with open(artifact_path(out_dir, 'config'), 'w', encoding='utf-8') as f:
        f.write(config.to_ini())
    if output.field:
        write_field(result.field, artifact_path(out_dir, 'field'))
    if output.profile:
        write_profile(result.field, artifact_path(out_dir, 'profile'), output.eb_profile)
    if output.plan or output.matrix:
        plan = build_plan(grid, config.scheme.srd_variant or 'weighted', config.srd)
        if output.plan:
            write_plan(plan, artifact_path(out_dir, 'plan'))
            write_eb_database(grid, artifact_path(out_dir, 'geometry'))
        if output.matrix:
            write_matrix_csv(plan, artifact_path(out_dir, 'matrix'))
            export_plan_to_excel(plan, artifact_path(out_dir, 'workbook'))
    with open(artifact_path(out_dir, 'summary'), 'w', encoding='utf-8') as f:
        for key, value in result.summary().items():
            f.write(f"{key}={value!r}\n" if isinstance(value, float) else f"{key}={value}\n")


def dump_plan(config: ExperimentConfig, out_dir: Optional[str] = None) -> List[str]:
    """Строит план без запуска и возвращает его текст"""
    from src.database import plan_lines
    from src.export_to_xlsx import write_matrix_csv

    grid = build_grid(config)
    plan = build_plan(grid, config.scheme.srd_variant or 'weighted', config.srd)
    lines = plan_lines(plan)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_plan(plan, artifact_path(out_dir, 'plan'))
        write_matrix_csv(plan, artifact_path(out_dir, 'matrix'))
    return lines


def compare(dir_a: str, dir_b: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Разности двух дампов поля по компонентам.

    MAXDIFF - максимум модуля, L1DIFF - сумма V * |a - b|.
    """
    header_a, rows_a = read_field(artifact_path(dir_a, 'field') if os.path.isdir(dir_a) else dir_a)
    header_b, rows_b = read_field(artifact_path(dir_b, 'field') if os.path.isdir(dir_b) else dir_b)
    shape_keys = ('NDIM', 'NX', 'NY', 'NZ', 'NCOMP')
    if any(header_a[k] != header_b[k] for k in shape_keys) or rows_a.shape != rows_b.shape:
        raise GridMismatch(f"Сетки не совпадают: {dir_a} и {dir_b}")
    if not np.array_equal(rows_a[:, :3], rows_b[:, :3]):
        raise GridMismatch(f"Порядок ячеек не совпадает: {dir_a} и {dir_b}")
    diff = np.abs(rows_a[:, 7:] - rows_b[:, 7:])
    ndim = int(header_a['NDIM'])
    cell_volume = _cell_volume(rows_a, ndim)
    volume = rows_a[:, 6] * cell_volume
    return diff.max(axis=0, initial=0.0), (volume[:, None] * diff).sum(axis=0)


def _cell_volume(rows: np.ndarray, ndim: int) -> float:
    """Объем полной ячейки по координатам ячеек с kappa = 1"""
    volume = 1.0
    for d in range(ndim):
        regular = rows[:, 6] == 1.0
        index, x = rows[regular, d], rows[regular, 3 + d]
        if len(np.unique(index)) < 2:
            continue
        slope = np.polyfit(index, x, 1)[0]
        volume *= abs(slope)
    return volume


def compare_line(maxdiff: np.ndarray, l1diff: np.ndarray) -> str:
    """Строка отчета MAXDIFF=...,L1DIFF=..."""
    def fmt(values):
        return ';'.join(f"{v:.17g}" for v in values)
    return f"MAXDIFF={fmt(maxdiff)},L1DIFF={fmt(l1diff)}"


def exit_code_of(error: Exception) -> int:
    """Код завершения для ошибки участника серии"""
    if isinstance(error, EBError):
        return error.exit_code
    if isinstance(error, ArithmeticError):
        return NumericError.exit_code
    if isinstance(error, ValueError):
        return ConfigError.exit_code
    return 1


async def sweep(config: ExperimentConfig, stabilizers: Sequence[str], out_dir: str,
                patches: Optional[int] = None, check_reads: Optional[bool] = None) -> List[Dict]:
    """
    Серия запусков с разными стабилизаторами.

    Запуски независимы и выполняются параллельно; каждый пишет в свой
    подкаталог. Возвращает строки sweep.csv.
    """
    loop = asyncio.get_running_loop()

    async def one(stabilizer: str) -> Dict:
        member = config.with_stabilizer(stabilizer)
        directory = os.path.join(out_dir, stabilizer)
        try:
            result = await loop.run_in_executor(
                None, run_experiment, member, directory, patches, check_reads)
            row = result.summary()
            row['exit_code'] = 0
        except Exception as e:
            logger.error(f"Запуск {stabilizer} завершился ошибкой: {e}")
            row = {'stabilizer': stabilizer, 'exit_code': exit_code_of(e), 'error': str(e)}
        return row

    rows = await asyncio.gather(*(one(s) for s in stabilizers))
    get_reports_directory(out_dir)
    write_sweep(rows, artifact_path(out_dir, 'sweep'))
    if config.output.pdf_report:
        from src.utils.export_manager import ExportManager
        await ExportManager(out_dir).export_sweep_report(config.name, rows)
    return list(rows)


def write_sweep(rows: Sequence[Dict], path: str):
    from src.export_to_pdf import SWEEP_COLUMNS

    ensure_directory_exists(path)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, extrasaction='ignore')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
