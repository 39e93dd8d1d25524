"""
Разбор текстового описания тела.

Описание записывается как вызовы функций, например
difference(box([0, 0], [1, 1]), sphere([0.5, 0.5], 0.25)).
"""
import ast
from typing import Any

from src.errors import ConfigError
from src.geometry.implicit import (
    Box, Constant, Cylinder, Difference, HalfSpace, ImplicitFn, Intersection,
    Rotate, Sphere, Translate, Union, ramp,
)


def _literal(node: ast.AST) -> Any:
    try:
        return ast.literal_eval(node)
    except ValueError:
        raise ConfigError(f"Ожидалось число или список: {ast.dump(node)}",
                          section='geometry', key='csg')


def _build(node: ast.AST, ndim: int) -> ImplicitFn:
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise ConfigError("Ожидался вызов примитива или операции", section='geometry', key='csg')
    name = node.func.id
    args = node.args
    try:
        if name in ('union', 'intersection'):
            operands = [_build(arg, ndim) for arg in args]
            return Union(*operands) if name == 'union' else Intersection(*operands)
        if name == 'difference':
            first, second = args
            return Difference(_build(first, ndim), _build(second, ndim))
        if name == 'translate':
            operand, shift = args
            return Translate(_build(operand, ndim), _literal(shift))
        if name == 'rotate':
            operand, *rest = args
            values = [_literal(arg) for arg in rest]
            return Rotate(_build(operand, ndim), *values, ndim=ndim)
        values = [_literal(arg) for arg in args]
        if name == 'halfspace':
            return HalfSpace(*values)
        if name == 'sphere':
            return Sphere(*values)
        if name == 'cylinder':
            return Cylinder(*values)
        if name == 'box':
            return Box(*values)
        if name == 'ramp':
            return ramp(*values)
        if name == 'constant':
            return Constant(*values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Неверные аргументы '{name}': {e}", section='geometry', key='csg')
    raise ConfigError(f"Неизвестная операция '{name}'", section='geometry', key='csg')


def parse_csg(text: str, ndim: int = 2) -> ImplicitFn:
    """Строит неявную функцию по текстовому описанию"""
    try:
        tree = ast.parse(text.strip(), mode='eval')
    except SyntaxError as e:
        raise ConfigError(f"Синтаксическая ошибка в описании тела: {e.msg}",
                          section='geometry', key='csg')
    return _build(tree.body, ndim)
