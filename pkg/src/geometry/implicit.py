"""
Неявные функции тела и операции конструктивной геометрии.

Соглашение о знаке: функция положительна внутри тела, отрицательна
в жидкости и равна нулю на границе. Все функции 1-липшицевы, поэтому
|f(c)| > r гарантирует постоянный знак в шаре радиуса r вокруг c.
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class LocalForm:
    """
    Локальное описание функции внутри прямоугольника.

    sign = +1 или -1: знак постоянен; sign = 0: знак совпадает
    со знаком плоскости normal·(x - point).
    """
    sign: int
    normal: Optional[np.ndarray] = None
    point: Optional[np.ndarray] = None

    def negated(self) -> 'LocalForm':
        if self.sign:
            return LocalForm(-self.sign)
        return LocalForm(0, -self.normal, self.point)


INSIDE = LocalForm(1)
OUTSIDE = LocalForm(-1)


class ImplicitFn:
    """Базовый класс неявной функции"""
    kind = 'base'

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """x имеет форму (..., ndim), результат (...)"""
        raise NotImplementedError

    def affine_in(self, lo: np.ndarray, hi: np.ndarray) -> Optional[LocalForm]:
        """
        Описание знака функции в прямоугольнике [lo, hi].

        None означает, что функция не сводится к одной плоскости.
        """
        center = 0.5 * (lo + hi)
        radius = 0.5 * float(np.linalg.norm(hi - lo))
        value = float(self.evaluate(center))
        if value > radius:
            return INSIDE
        if value < -radius:
            return OUTSIDE
        return None

    def __repr__(self):
        return f"{self.kind}(...)"


class HalfSpace(ImplicitFn):
    """Полупространство normal·(x - point) > 0, нормаль нормируется"""
    kind = 'halfspace'

    def __init__(self, normal: Sequence[float], offset: float = 0.0,
                 point: Optional[Sequence[float]] = None):
        normal = np.asarray(normal, dtype=float)
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            raise ValueError("Нормаль полупространства не может быть нулевой")
        self.normal = normal / norm
        if point is None:
            point = self.normal * (offset / norm)
        self.point = np.asarray(point, dtype=float)

    @property
    def offset(self) -> float:
        return float(self.normal @ self.point)

    def evaluate(self, x):
        return (x - self.point) @ self.normal

    def affine_in(self, lo, hi):
        return LocalForm(0, self.normal, self.point)

    def __repr__(self):
        return f"halfspace({self.normal.tolist()}, {self.offset!r})"


class Sphere(ImplicitFn):
    """Шар (в 2D круг): r - |x - c|"""
    kind = 'sphere'

    def __init__(self, center: Sequence[float], radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def evaluate(self, x):
        return self.radius - np.linalg.norm(x - self.center, axis=-1)

    def __repr__(self):
        return f"sphere({self.center.tolist()}, {self.radius!r})"


class Cylinder(ImplicitFn):
    """Бесконечный круговой цилиндр вдоль оси axis"""
    kind = 'cylinder'

    def __init__(self, center: Sequence[float], radius: float, axis: int = 2):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.axis = int(axis)

    def evaluate(self, x):
        delta = x - self.center
        mask = np.ones(delta.shape[-1], dtype=bool)
        if self.axis < delta.shape[-1]:
            mask[self.axis] = False
        return self.radius - np.linalg.norm(delta[..., mask], axis=-1)

    def __repr__(self):
        return f"cylinder({self.center.tolist()}, {self.radius!r}, {self.axis})"


class Box(ImplicitFn):
    """Прямоугольный параллелепипед [lo, hi]"""
    kind = 'box'

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if np.any(self.hi <= self.lo):
            raise ValueError("Пустой параллелепипед")

    def evaluate(self, x):
        return np.minimum(x - self.lo, self.hi - x).min(axis=-1)

    def affine_in(self, lo, hi):
        if np.any(hi <= self.lo) or np.any(lo >= self.hi):
            return OUTSIDE
        crossing = []
        for axis in range(len(lo)):
            if lo[axis] < self.lo[axis] < hi[axis]:
                crossing.append((axis, 1.0, self.lo))
            if lo[axis] < self.hi[axis] < hi[axis]:
                crossing.append((axis, -1.0, self.hi))
        if not crossing:
            return INSIDE
        if len(crossing) > 1:
            return None
        axis, direction, bound = crossing[0]
        normal = np.zeros(len(lo))
        normal[axis] = direction
        return LocalForm(0, normal, bound.copy())

    def __repr__(self):
        return f"box({self.lo.tolist()}, {self.hi.tolist()})"


class Union(ImplicitFn):
    """Объединение тел: максимум"""
    kind = 'union'

    def __init__(self, *operands: ImplicitFn):
        if not operands:
            raise ValueError("Нужен хотя бы один операнд")
        self.operands = operands

    def evaluate(self, x):
        return np.maximum.reduce([op.evaluate(x) for op in self.operands])

    def affine_in(self, lo, hi):
        planes = []
        for op in self.operands:
            form = op.affine_in(lo, hi)
            if form is None:
                return None
            if form.sign > 0:
                return INSIDE
            if form.sign == 0:
                planes.append(form)
        if not planes:
            return OUTSIDE
        return planes[0] if len(planes) == 1 else None

    def __repr__(self):
        return f"union({', '.join(map(repr, self.operands))})"


class Intersection(ImplicitFn):
    """Пересечение тел: минимум"""
    kind = 'intersection'

    def __init__(self, *operands: ImplicitFn):
        if not operands:
            raise ValueError("Нужен хотя бы один операнд")
        self.operands = operands

    def evaluate(self, x):
        return np.minimum.reduce([op.evaluate(x) for op in self.operands])

    def affine_in(self, lo, hi):
        planes = []
        for op in self.operands:
            form = op.affine_in(lo, hi)
            if form is None:
                return None
            if form.sign < 0:
                return OUTSIDE
            if form.sign == 0:
                planes.append(form)
        if not planes:
            return INSIDE
        return planes[0] if len(planes) == 1 else None

    def __repr__(self):
        return f"intersection({', '.join(map(repr, self.operands))})"


class Difference(ImplicitFn):
    """Разность тел A \\ B: min(A, -B)"""
    kind = 'difference'

    def __init__(self, first: ImplicitFn, second: ImplicitFn):
        self.first = first
        self.second = second

    def evaluate(self, x):
        return np.minimum(self.first.evaluate(x), -self.second.evaluate(x))

    def affine_in(self, lo, hi):
        second = self.second.affine_in(lo, hi)
        if second is None:
            return None
        return Intersection(_Fixed(self.first), _Fixed(second.negated())).affine_in(lo, hi)

    def __repr__(self):
        return f"difference({self.first!r}, {self.second!r})"


class Translate(ImplicitFn):
    """Сдвиг тела на вектор shift"""
    kind = 'translate'

    def __init__(self, operand: ImplicitFn, shift: Sequence[float]):
        self.operand = operand
        self.shift = np.asarray(shift, dtype=float)

    def evaluate(self, x):
        return self.operand.evaluate(x - self.shift)

    def affine_in(self, lo, hi):
        form = self.operand.affine_in(lo - self.shift, hi - self.shift)
        if form is None or form.sign:
            return form
        return LocalForm(0, form.normal, form.point + self.shift)

    def __repr__(self):
        return f"translate({self.operand!r}, {self.shift.tolist()})"


class Rotate(ImplicitFn):
    """
    Поворот тела вокруг начала координат.

    В 2D задается угол в градусах, в 3D дополнительно ось ('x', 'y', 'z').
    """
    kind = 'rotate'

    def __init__(self, operand: ImplicitFn, angle: float, axis: str = 'z', ndim: int = 2):
        self.operand = operand
        self.angle = float(angle)
        self.axis = axis
        self.matrix = rotation_matrix(self.angle, axis, ndim)

    def evaluate(self, x):
        # Обратный поворот: R^T x
        return self.operand.evaluate(x @ self.matrix)

    def affine_in(self, lo, hi):
        corners = _box_corners(lo, hi) @ self.matrix
        form = self.operand.affine_in(corners.min(axis=0), corners.max(axis=0))
        if form is None or form.sign:
            return form
        return LocalForm(0, self.matrix @ form.normal, self.matrix @ form.point)

    def __repr__(self):
        return f"rotate({self.operand!r}, {self.angle!r}, '{self.axis}')"


class Constant(ImplicitFn):
    """Постоянная функция, например -1 для области без тела"""
    kind = 'constant'

    def __init__(self, value: float):
        if value == 0.0:
            raise ValueError("Постоянная функция не может быть нулевой")
        self.value = float(value)

    def evaluate(self, x):
        return np.full(np.shape(x)[:-1], self.value)

    def affine_in(self, lo, hi):
        return INSIDE if self.value > 0 else OUTSIDE

    def __repr__(self):
        return f"constant({self.value!r})"


class _Fixed(ImplicitFn):
    """Обертка, подставляющая заранее найденную локальную форму"""

    def __init__(self, source):
        self.source = source

    def affine_in(self, lo, hi):
        if isinstance(self.source, LocalForm):
            return self.source
        return self.source.affine_in(lo, hi)


def rotation_matrix(angle: float, axis: str = 'z', ndim: int = 2) -> np.ndarray:
    """Матрица поворота на угол в градусах"""
    theta = math.radians(angle)
    c, s = math.cos(theta), math.sin(theta)
    plane = np.array([[c, -s], [s, c]])
    if ndim == 2:
        return plane
    index = {'x': (1, 2), 'y': (2, 0), 'z': (0, 1)}[axis]
    matrix = np.eye(3)
    matrix[np.ix_(index, index)] = plane
    return matrix


def ramp(angle: float, point: Sequence[float]) -> HalfSpace:
    """
    Наклонная стенка под углом angle (в градусах) к горизонтали.

    Тело лежит ниже прямой, проходящей через point. Синус и косинус
    берутся как sin(angle) и sin(90 - angle), чтобы при 45° они совпадали.
    """
    s = math.sin(math.radians(angle))
    c = math.sin(math.radians(90.0 - angle))
    normal = np.zeros(len(point))
    normal[0], normal[1] = s, -c
    return HalfSpace(normal, point=point)


def _box_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    ndim = len(lo)
    bits = np.array(np.meshgrid(*([[0, 1]] * ndim), indexing='ij')).reshape(ndim, -1).T
    return lo + bits * (hi - lo)


def evaluate_csg(fn: ImplicitFn, x) -> np.ndarray:
    """Значение неявной функции в точке или массиве точек"""
    return fn(x)
