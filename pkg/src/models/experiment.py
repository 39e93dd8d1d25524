"""
Модель описания эксперимента.
"""
import configparser
import io
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .grid_spec import GridSpec
from .scheme import SchemeConfig, SrdSettings

GEOMETRY_KINDS = ('ramp', 'csg', 'none')
INITIAL_KINDS = ('heaviside', 'constant', 'linear', 'sine', 'gaussian', 'random')


@dataclass
class GeometrySpec:
    """
    Описание тела.

    Для рампы: угол в градусах, точка на стенке и сдвиг стенки вверх
    в долях шага по вертикали. Для CSG: выражение вида
    difference(box(...), sphere(...)).
    """
    kind: str = 'ramp'
    angle: float = 40.0
    wall_offset: float = 0.0
    wall_point: Tuple[float, ...] = (0.0, 0.0)
    csg: str = ''

    def __str__(self):
        if self.kind == 'ramp':
            return f"рампа {self.angle:g}° (сдвиг {self.wall_offset:g})"
        if self.kind == 'csg':
            return f"CSG {self.csg}"
        return "без тела"

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'kind': self.kind,
            'angle': self.angle,
            'wall_offset': self.wall_offset,
            'wall_point': list(self.wall_point),
            'csg': self.csg,
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        return cls(
            kind=data.get('kind', 'ramp'),
            angle=float(data.get('angle', 40.0)),
            wall_offset=float(data.get('wall_offset', 0.0)),
            wall_point=tuple(float(v) for v in data.get('wall_point', (0.0, 0.0))),
            csg=data.get('csg', ''),
        )


@dataclass
class RunSpec:
    """Число шагов или конечное время, начальные данные, декомпозиция"""
    steps: Optional[int] = 10
    end_time: Optional[float] = None
    initial: str = 'heaviside'
    initial_params: Tuple[float, ...] = ()
    seed: int = 0
    patches: int = 1
    check_reads: bool = False

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'steps': self.steps,
            'end_time': self.end_time,
            'initial': self.initial,
            'initial_params': list(self.initial_params),
            'seed': self.seed,
            'patches': self.patches,
            'check_reads': self.check_reads,
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        steps = data.get('steps', 10)
        end_time = data.get('end_time')
        return cls(
            steps=int(steps) if steps is not None else None,
            end_time=float(end_time) if end_time is not None else None,
            initial=data.get('initial', 'heaviside'),
            initial_params=tuple(float(v) for v in data.get('initial_params', ())),
            seed=int(data.get('seed', 0)),
            patches=int(data.get('patches', 1)),
            check_reads=bool(data.get('check_reads', False)),
        )


@dataclass
class OutputSpec:
    """Какие артефакты записывать"""
    field: bool = True
    profile: bool = True
    eb_profile: bool = False
    plan: bool = False
    matrix: bool = False
    pdf_report: bool = False

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'field': self.field,
            'profile': self.profile,
            'eb_profile': self.eb_profile,
            'plan': self.plan,
            'matrix': self.matrix,
            'pdf_report': self.pdf_report,
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        defaults = cls()
        return cls(**{key: bool(data.get(key, getattr(defaults, key)))
                      for key in defaults.to_dict()})


@dataclass
class ExperimentConfig:
    """Полное описание эксперимента"""
    name: str = 'experiment'
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    grid: GridSpec = field(default_factory=GridSpec)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    srd: SrdSettings = field(default_factory=SrdSettings)
    run: RunSpec = field(default_factory=RunSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def __str__(self):
        return f"Эксперимент '{self.name}': {self.geometry}, сетка {self.grid.cells}"

    def with_stabilizer(self, stabilizer: str) -> 'ExperimentConfig':
        """Копия эксперимента с другим стабилизатором"""
        data = self.to_dict()
        data['scheme']['stabilizer'] = stabilizer
        return ExperimentConfig.from_dict(data)

    def to_dict(self):
        """Преобразует объект в словарь"""
        return {
            'name': self.name,
            'geometry': self.geometry.to_dict(),
            'grid': self.grid.to_dict(),
            'scheme': self.scheme.to_dict(),
            'srd': self.srd.to_dict(),
            'run': self.run.to_dict(),
            'output': self.output.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Создает объект из словаря"""
        return cls(
            name=data.get('name', 'experiment'),
            geometry=GeometrySpec.from_dict(data.get('geometry', {})),
            grid=GridSpec.from_dict(data.get('grid', {})),
            scheme=SchemeConfig.from_dict(data.get('scheme', {})),
            srd=SrdSettings.from_dict(data.get('srd', {})),
            run=RunSpec.from_dict(data.get('run', {})),
            output=OutputSpec.from_dict(data.get('output', {})),
        )

    def to_ini(self) -> str:
        """Записывает эксперимент в формате INI, пригодном для повторного разбора"""
        parser = configparser.ConfigParser()
        parser['experiment'] = {'name': self.name}

        geometry = {'kind': self.geometry.kind}
        if self.geometry.kind == 'ramp':
            geometry['angle'] = repr(self.geometry.angle)
            geometry['wall_offset'] = repr(self.geometry.wall_offset)
            geometry['wall_point'] = _join(self.geometry.wall_point)
        elif self.geometry.kind == 'csg':
            geometry['csg'] = self.geometry.csg
        parser['geometry'] = geometry

        parser['grid'] = {
            'cells': _join(self.grid.cells),
            'spacing': _join(self.grid.spacing),
            'origin': _join(self.grid.origin),
        }
        for axis, (lo, hi) in enumerate(self.grid.boundaries):
            name = 'xyz'[axis]
            parser['grid'][f'{name}_lo'] = str(lo)
            parser['grid'][f'{name}_hi'] = str(hi)

        parser['scheme'] = {
            'velocity': _join(self.scheme.velocity),
            'diffusivity': repr(self.scheme.diffusivity),
            'cfl': repr(self.scheme.cfl),
            'stabilizer': self.scheme.stabilizer,
            'limiter': _flag(self.scheme.limiter),
            'rk': self.scheme.rk,
            'pc_iterations': str(self.scheme.pc_iterations),
        }
        parser['srd'] = {
            'v_target': repr(self.srd.v_target),
            'tol_sym': repr(self.srd.tol_sym),
            'merge_tol': repr(self.srd.merge_tol),
            'merge_mode': self.srd.merge_mode,
            'limit_slopes': _flag(self.srd.limit_slopes),
            'stencil_growth': _flag(self.srd.stencil_growth),
            'alt_stencil_criterion': _flag(self.srd.alt_stencil_criterion),
        }

        run = {
            'initial': self.run.initial,
            'seed': str(self.run.seed),
            'patches': str(self.run.patches),
            'check_reads': _flag(self.run.check_reads),
        }
        if self.run.steps is not None:
            run['steps'] = str(self.run.steps)
        if self.run.end_time is not None:
            run['end_time'] = repr(self.run.end_time)
        if self.run.initial_params:
            run['initial_params'] = _join(self.run.initial_params)
        parser['run'] = run

        parser['output'] = {key: _flag(value) for key, value in self.output.to_dict().items()}

        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()


def _join(values) -> str:
    return ', '.join(repr(v) for v in values)


def _flag(value: bool) -> str:
    return 'yes' if value else 'no'
