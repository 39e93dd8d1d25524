"""
Модуль валидации и разбора описаний экспериментов.
"""
import configparser
import logging
import math
import re
from typing import Dict, Optional, Tuple

from src.errors import ConfigError
from src.models import (
    STABILIZERS, Boundary, ExperimentConfig, GeometrySpec, GridSpec, OutputSpec,
    RunSpec, SchemeConfig, SrdSettings,
)
from src.models.experiment import GEOMETRY_KINDS, INITIAL_KINDS

logger = logging.getLogger(__name__)

SECTIONS = ('experiment', 'geometry', 'grid', 'scheme', 'srd', 'run', 'output')
AXES = 'xyz'

_FLAGS = {'yes': True, 'true': True, 'on': True, '1': True,
          'no': False, 'false': False, 'off': False, '0': False}


def validate_name(name):
    """Валидация имени эксперимента"""
    if not name or not isinstance(name, str):
        return False, "Имя эксперимента не может быть пустым"
    if not re.match(r'^[\w\-\.]+$', name.strip()):
        return False, "Имя может содержать только буквы, цифры, '-', '_' и '.'"
    return True, None


def validate_vector(text, ndim=None, kind=float):
    """Валидация списка чисел через запятую"""
    try:
        values = tuple(kind(v) for v in str(text).split(',') if v.strip())
    except ValueError:
        return False, f"Ожидается список чисел: '{text}'"
    if not values:
        return False, "Список не может быть пустым"
    if ndim is not None and len(values) != ndim:
        return False, f"Ожидается {ndim} значений, получено {len(values)}"
    if kind is float and not all(math.isfinite(v) for v in values):
        return False, "Значения должны быть конечными"
    return True, None


def validate_flag(text):
    """Валидация логического флага"""
    if str(text).strip().lower() not in _FLAGS:
        return False, f"Ожидается yes или no: '{text}'"
    return True, None


def validate_stabilizers(text):
    """Валидация списка стабилизаторов через запятую"""
    names = [s.strip() for s in str(text).split(',') if s.strip()]
    if not names:
        return False, "Список стабилизаторов пуст"
    unknown = [s for s in names if s not in STABILIZERS]
    if unknown:
        return False, f"Неизвестные стабилизаторы: {', '.join(unknown)}"
    return True, None


def _key_lines(text: str) -> Dict[Tuple[str, str], int]:
    """Номера строк для пар (секция, ключ)"""
    lines = {}
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in '#;':
            continue
        header = re.match(r'^\[([^\]]+)\]', line)
        if header:
            section = header.group(1).strip().lower()
            lines[(section, '')] = number
            continue
        if section and ('=' in line or ':' in line):
            key = re.split(r'[=:]', line, maxsplit=1)[0].strip().lower()
            lines.setdefault((section, key), number)
    return lines


class _Reader:
    """Чтение значений секции с указанием места ошибки"""

    def __init__(self, parser: configparser.ConfigParser, lines):
        self.parser = parser
        self.lines = lines

    def error(self, message, section, key=None):
        line = self.lines.get((section, key or ''), self.lines.get((section, '')))
        return ConfigError(message, section, key, line)

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def text(self, section, key, default=None):
        if not self.has(section, key):
            return default
        return self.parser.get(section, key).strip()

    def number(self, section, key, default=None, kind=float):
        raw = self.text(section, key)
        if raw is None:
            return default
        try:
            value = kind(raw)
        except ValueError:
            raise self.error(f"Ожидается число: '{raw}'", section, key)
        if kind is float and not math.isfinite(value):
            raise self.error("Значение должно быть конечным", section, key)
        return value

    def vector(self, section, key, default=None, ndim=None, kind=float):
        raw = self.text(section, key)
        if raw is None:
            return default
        ok, message = validate_vector(raw, ndim, kind)
        if not ok:
            raise self.error(message, section, key)
        return tuple(kind(v) for v in raw.split(',') if v.strip())

    def flag(self, section, key, default):
        raw = self.text(section, key)
        if raw is None:
            return default
        ok, message = validate_flag(raw)
        if not ok:
            raise self.error(message, section, key)
        return _FLAGS[raw.lower()]

    def choice(self, section, key, options, default):
        raw = self.text(section, key, default)
        if raw not in options:
            raise self.error(f"Недопустимое значение '{raw}', ожидается одно из: "
                             f"{', '.join(options)}", section, key)
        return raw


def wall_direction(angle: float, ndim: int) -> Tuple[float, ...]:
    """Единичный вектор вдоль стенки рампы"""
    s = math.sin(math.radians(angle))
    c = math.sin(math.radians(90.0 - angle))
    return (c, s) + (0.0,) * (ndim - 2)


def parse_experiment(text: str, name: Optional[str] = None) -> ExperimentConfig:
    """
    Разбирает описание эксперимента в формате INI.

    Ошибки сообщаются исключением ConfigError с секцией, полем и строкой.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("Отсутствует заголовок секции", line=e.lineno)
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError("Повторное определение", getattr(e, 'section', None),
                          getattr(e, 'option', None), e.lineno)
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError("Ошибка синтаксиса", line=line)

    lines = _key_lines(text)
    reader = _Reader(parser, lines)
    for section in parser.sections():
        if section not in SECTIONS:
            raise reader.error(f"Неизвестная секция '{section}'", section)
    for section in SECTIONS:
        if not parser.has_section(section):
            parser.add_section(section)

    experiment_name = reader.text('experiment', 'name', name or 'experiment')
    ok, message = validate_name(experiment_name)
    if not ok:
        raise reader.error(message, 'experiment', 'name')

    grid = _read_grid(reader)
    geometry = _read_geometry(reader, grid.ndim)
    scheme = _read_scheme(reader, grid.ndim, geometry)
    srd = _read_srd(reader)
    run = _read_run(reader)
    output = OutputSpec(**{key: reader.flag('output', key, value)
                           for key, value in OutputSpec().to_dict().items()})
    for key in parser.options('output'):
        if key not in OutputSpec().to_dict():
            raise reader.error(f"Неизвестное поле '{key}'", 'output', key)

    config = ExperimentConfig(experiment_name, geometry, grid, scheme, srd, run, output)
    logger.debug(f"Разобрано описание: {config}")
    return config


def load_experiment(path: str) -> ExperimentConfig:
    """Читает описание эксперимента из файла"""
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Не удалось прочитать файл {path}: {e}")
    return parse_experiment(text)


def _read_grid(reader: _Reader) -> GridSpec:
    cells = reader.vector('grid', 'cells', (64, 32), kind=int)
    ndim = len(cells)
    if ndim not in (2, 3):
        raise reader.error("Поддерживаются только размерности 2 и 3", 'grid', 'cells')
    spacing = reader.vector('grid', 'spacing', None, ndim)
    if spacing is None:
        spacing = tuple(1.0 / cells[0] for _ in cells)
    origin = reader.vector('grid', 'origin', (0.0,) * ndim, ndim)
    boundaries = []
    for axis in range(ndim):
        pair = []
        for side in ('lo', 'hi'):
            key = f'{AXES[axis]}_{side}'
            try:
                pair.append(Boundary.parse(reader.text('grid', key, 'periodic')))
            except ValueError as e:
                raise reader.error(str(e), 'grid', key)
        boundaries.append(tuple(pair))
    spec = GridSpec(cells, spacing, origin, tuple(boundaries))
    ok, message = spec.validate()
    if not ok:
        raise reader.error(message, 'grid')
    return spec


def _read_geometry(reader: _Reader, ndim: int) -> GeometrySpec:
    kind = reader.choice('geometry', 'kind', GEOMETRY_KINDS, 'ramp')
    geometry = GeometrySpec(kind=kind)
    if kind == 'ramp':
        geometry.angle = reader.number('geometry', 'angle', 40.0)
        if not 0.0 <= geometry.angle < 90.0:
            raise reader.error("Угол рампы должен лежать в [0, 90)", 'geometry', 'angle')
        geometry.wall_offset = reader.number('geometry', 'wall_offset', 0.0)
        geometry.wall_point = reader.vector('geometry', 'wall_point', (0.0,) * ndim, ndim)
    elif kind == 'csg':
        geometry.csg = reader.text('geometry', 'csg', '')
        if not geometry.csg:
            raise reader.error("Не задано выражение CSG", 'geometry', 'csg')
    return geometry


def _read_scheme(reader: _Reader, ndim: int, geometry: GeometrySpec) -> SchemeConfig:
    raw = reader.text('scheme', 'velocity', 'wall')
    if raw.lower() == 'wall':
        if geometry.kind != 'ramp':
            raise reader.error("Скорость 'wall' допустима только для рампы", 'scheme', 'velocity')
        speed = reader.number('scheme', 'speed', 1.0)
        velocity = tuple(speed * v for v in wall_direction(geometry.angle, ndim))
    else:
        velocity = reader.vector('scheme', 'velocity', None, ndim)
    scheme = SchemeConfig(
        velocity=velocity,
        diffusivity=reader.number('scheme', 'diffusivity', 0.0),
        cfl=reader.number('scheme', 'cfl', 0.5),
        stabilizer=reader.choice('scheme', 'stabilizer', STABILIZERS, 'srd-weighted'),
        limiter=reader.flag('scheme', 'limiter', True),
        rk=reader.text('scheme', 'rk', 'heun'),
        pc_iterations=reader.number('scheme', 'pc_iterations', 1, int),
    )
    ok, message = scheme.validate()
    if not ok:
        raise reader.error(message, 'scheme')
    return scheme


def _read_srd(reader: _Reader) -> SrdSettings:
    defaults = SrdSettings()
    srd = SrdSettings(
        v_target=reader.number('srd', 'v_target', defaults.v_target),
        tol_sym=reader.number('srd', 'tol_sym', defaults.tol_sym),
        merge_tol=reader.number('srd', 'merge_tol', defaults.merge_tol),
        merge_mode=reader.text('srd', 'merge_mode', defaults.merge_mode),
        limit_slopes=reader.flag('srd', 'limit_slopes', defaults.limit_slopes),
        stencil_growth=reader.flag('srd', 'stencil_growth', defaults.stencil_growth),
        alt_stencil_criterion=reader.flag('srd', 'alt_stencil_criterion',
                                          defaults.alt_stencil_criterion),
    )
    ok, message = srd.validate()
    if not ok:
        raise reader.error(message, 'srd')
    return srd


def _read_run(reader: _Reader) -> RunSpec:
    end_time = reader.number('run', 'end_time', None)
    steps = reader.number('run', 'steps', None if end_time is not None else 10, int)
    if steps is not None and steps < 0:
        raise reader.error("Число шагов не может быть отрицательным", 'run', 'steps')
    if end_time is not None and end_time <= 0.0:
        raise reader.error("Конечное время должно быть положительным", 'run', 'end_time')
    patches = reader.number('run', 'patches', 1, int)
    if patches < 1:
        raise reader.error("Число патчей должно быть положительным", 'run', 'patches')
    return RunSpec(
        steps=steps,
        end_time=end_time,
        initial=reader.choice('run', 'initial', INITIAL_KINDS, 'heaviside'),
        initial_params=reader.vector('run', 'initial_params', ()),
        seed=reader.number('run', 'seed', 0, int),
        patches=patches,
        check_reads=reader.flag('run', 'check_reads', False),
    )
