"""
Тесты неявных функций и моментов разрезанных ячеек.
"""
import math

import numpy as np
import pytest

from src.errors import ConfigError, GeometryError
from src.geometry import (
    Box, Constant, Difference, HalfSpace, Sphere, Translate, Union, compute_cut_geometry,
    evaluate_csg, parse_csg, ramp,
)
from src.mesh import CUT_CODE, build_ebgrid
from src.models import GridSpec
from tests.conftest import ramp_grid, ramp_spec


class TestImplicitFunctions:
    """Знак: тело положительно, жидкость не положительна"""

    def test_sphere_sign(self):
        sphere = Sphere((0.5, 0.5), 0.25)
        assert sphere(np.array([0.5, 0.5])) > 0.0
        assert sphere(np.array([0.0, 0.0])) < 0.0
        assert sphere(np.array([0.75, 0.5])) == pytest.approx(0.0, abs=1e-15)

    def test_ramp_body_below_wall(self):
        wall = ramp(40.0, (0.0, 0.1))
        assert wall(np.array([0.5, 0.0])) > 0.0
        assert wall(np.array([0.0, 0.5])) < 0.0

    def test_csg_combinators(self):
        body = Difference(Box((0.0, 0.0), (1.0, 1.0)), Sphere((0.5, 0.5), 0.25))
        assert body(np.array([0.1, 0.1])) > 0.0
        assert body(np.array([0.5, 0.5])) < 0.0
        both = Union(Sphere((0.0, 0.0), 0.1), Translate(Sphere((0.0, 0.0), 0.1), (1.0, 0.0)))
        assert both(np.array([1.0, 0.0])) > 0.0
        assert both(np.array([0.5, 0.0])) < 0.0

    def test_vectorized_evaluation(self):
        wall = HalfSpace((0.0, -1.0), point=(0.0, 0.3))
        points = np.array([[0.0, 0.1], [0.0, 0.5]])
        values = wall(points)
        assert values.shape == (2,)
        assert values[0] > 0.0 > values[1]

    def test_evaluate_csg_values(self):
        assert evaluate_csg(HalfSpace((0.0, 1.0)), np.array([0.3, -0.2])) == pytest.approx(-0.2)
        spheres = Union(Sphere((0.0, 0.0), 1.0), Sphere((3.0, 0.0), 1.0))
        assert evaluate_csg(spheres, np.array([0.0, 0.0])) == pytest.approx(1.0)


class TestParser:

    def test_parse_matches_direct_construction(self):
        parsed = parse_csg("difference(box([0, 0], [1, 1]), sphere([0.5, 0.5], 0.25))")
        direct = Difference(Box((0.0, 0.0), (1.0, 1.0)), Sphere((0.5, 0.5), 0.25))
        points = np.random.default_rng(3).uniform(0.0, 1.0, size=(50, 2))
        np.testing.assert_allclose(parsed(points), direct(points))

    def test_unknown_operation(self):
        with pytest.raises(ConfigError):
            parse_csg("torus([0, 0], 1)")

    def test_syntax_error(self):
        with pytest.raises(ConfigError):
            parse_csg("sphere([0, 0], ")


class TestCutCellMoments:

    def test_regular_and_covered_cells(self):
        spec = ramp_spec((8, 8))
        wall = ramp(0.0, (0.0, 0.3))
        assert compute_cut_geometry(wall, (0, 7), spec).cell_type == 'regular'
        assert compute_cut_geometry(wall, (0, 0), spec).cell_type == 'covered'

    def test_horizontal_wall_fraction(self):
        spec = ramp_spec((8, 8))
        h = spec.spacing[1]
        wall = ramp(0.0, (0.0, 2.3 * h))
        cell = compute_cut_geometry(wall, (3, 2), spec)
        assert cell.cell_type == 'cut'
        assert cell.kappa == pytest.approx(0.7, abs=1e-13)
        assert cell.eb_normal == pytest.approx((0.0, -1.0), abs=1e-13)
        assert cell.apertures[2] == 0.0 and cell.apertures[3] == 1.0
        assert cell.centroid[1] == pytest.approx(0.15, abs=1e-13)

    def test_boundary_on_grid_face(self):
        spec = ramp_spec((8, 8))
        wall = ramp(0.0, (0.0, 2 * spec.spacing[1]))
        with pytest.raises(GeometryError):
            build_ebgrid(wall, spec, ghost=2)

    def test_45_degree_wall_through_nodes(self):
        grid = ramp_grid(45.0, cells=(16, 8), wall_y=0.125)
        cut = grid.cut[grid.valid]
        kappa = grid.kappa[grid.valid][cut]
        assert kappa.size > 0
        np.testing.assert_allclose(kappa, 0.5, atol=1e-14)


class TestEBGrid:

    def test_fluid_area_matches_analytic(self):
        angle, wall_y = 40.0, 0.1
        grid = ramp_grid(angle, cells=(32, 16), wall_y=wall_y)
        t = math.tan(math.radians(angle))
        x_top = (0.5 - wall_y) / t
        body = wall_y * x_top + 0.5 * t * x_top ** 2 + 0.5 * (1.0 - x_top)
        fluid = 0.5 - body
        area = float(np.sum(grid.volume[grid.valid]))
        assert area == pytest.approx(fluid, abs=1e-8)

    def test_eb_normal_of_plane_wall(self):
        grid = ramp_grid(40.0)
        cut = grid.cell_type[grid.valid] == CUT_CODE
        normals = grid.eb_normal[(slice(None),) + grid.valid][:, cut]
        s, c = math.sin(math.radians(40.0)), math.cos(math.radians(40.0))
        np.testing.assert_allclose(normals[0], s, atol=1e-10)
        np.testing.assert_allclose(normals[1], -c, atol=1e-10)

    def test_divergence_closure(self):
        grid = ramp_grid(40.0)
        h = grid.spacing
        total = np.zeros((grid.ndim,) + tuple(grid.shape))
        for d in range(grid.ndim):
            area = np.prod(np.delete(h, d))
            lower = [slice(None)] * grid.ndim
            upper = [slice(None)] * grid.ndim
            lower[d], upper[d] = slice(0, -1), slice(1, None)
            faces = grid.apertures[d]
            total[d] = area * (faces[tuple(upper)] - faces[tuple(lower)])
        total += grid.eb_area * grid.eb_normal
        open_cells = ~grid.covered[grid.valid]
        residual = total[(slice(None),) + grid.valid][:, open_cells]
        assert np.max(np.abs(residual)) < 1e-12

    def test_counts_and_cell_record(self):
        grid = ramp_grid(40.0)
        counts = grid.counts()
        assert sum(counts.values()) == 16 * 8
        assert counts['cut'] > 0
        record = grid.cell((0, 7))
        assert record.cell_type == 'regular'
        assert record.kappa == 1.0

    def test_constant_geometry_all_regular(self):
        spec = GridSpec(cells=(4, 4), spacing=(0.25, 0.25))
        grid = build_ebgrid(Constant(-1.0), spec, ghost=2)
        assert grid.counts()['regular'] == 16

    @pytest.mark.parametrize('body', [ramp(40.0, (0.0, 0.1)), Sphere((0.5, 0.25), 0.15)])
    def test_cells_match_single_cell_geometry(self, body):
        spec = ramp_spec((16, 8))
        grid = build_ebgrid(body, spec, ghost=2)
        cut = np.argwhere(grid.cut[grid.valid])
        assert len(cut) > 0
        for index in cut:
            index = tuple(int(i) for i in index)
            record = grid.cell(index)
            single = compute_cut_geometry(body, index, spec)
            assert single.cell_type == 'cut'
            assert single.kappa == pytest.approx(record.kappa, abs=1e-12)
            assert single.apertures == pytest.approx(record.apertures, abs=1e-12)
            assert single.eb_normal == pytest.approx(record.eb_normal, abs=1e-12)
