"""
Тесты потоков и интеграторов по времени.
"""
import numpy as np
import pytest
from scipy import ndimage

from src.errors import NonFiniteState
from src.geometry import Constant, Sphere
from src.mesh import EBGrid, Field, build_ebgrid
from src.models import SchemeConfig, SrdSettings
from src.solver import Discretization, Simulation, compute_dt, provisional_update
from tests.conftest import OUTFLOW, PERIODIC, linear_field, random_field, ramp_grid, ramp_spec


def regular_grid(cells=(16, 8), boundaries=None):
    spec = ramp_spec(cells, boundaries or tuple(PERIODIC for _ in cells))
    return build_ebgrid(Constant(-1.0), spec, 5)


def circle_grid():
    spec = ramp_spec((16, 8), tuple(PERIODIC for _ in range(2)))
    return build_ebgrid(Sphere((0.5, 0.25), 0.15), spec, 5)


def interior(faces_shape, axis, margin=2):
    """Грани, оба соседа которых лежат не дальше margin от края массива"""
    sl = [slice(margin, -margin)] * len(faces_shape)
    sl[axis] = slice(margin + 1, -margin - 1)
    return tuple(sl)


class TestFluxes:

    def test_constant_state_has_no_divergence(self):
        grid = regular_grid()
        discretization = Discretization(grid)
        values = np.full((1,) + tuple(grid.shape), 3.0)
        fluxes = discretization.advective_flux(values, (1.0, 0.5))
        conservative, _ = discretization.divergences(fluxes)
        np.testing.assert_allclose(conservative[(0,) + grid.valid], 0.0, atol=1e-12)

    def test_linear_state_exact_face_values(self):
        grid = regular_grid()
        discretization = Discretization(grid)
        field = linear_field(grid, (0.3, 1.0, -2.0))
        fluxes = discretization.advective_flux(field.values, (2.0, -1.0), limiter=False)
        for d, speed in enumerate((2.0, -1.0)):
            x = discretization.face_positions[d]
            exact = 0.3 + 1.0 * x[0] - 2.0 * x[1]
            where = interior(exact.shape, d)
            np.testing.assert_allclose(fluxes[d][0][where], speed * exact[where], atol=1e-12)

    def test_diffusive_flux_of_linear_state(self):
        grid = regular_grid()
        discretization = Discretization(grid)
        field = linear_field(grid, (0.3, 1.0, -2.0))
        fluxes = discretization.diffusive_flux(field.values, 0.1)
        for d, slope in enumerate((1.0, -2.0)):
            where = interior(fluxes[d].shape[1:], d)
            np.testing.assert_allclose(fluxes[d][0][where], -0.1 * slope, atol=1e-12)

    def test_wall_faces_carry_no_flux(self, ramp40):
        discretization = Discretization(ramp40)
        values = random_field(ramp40, seed=31).values
        for flux, faces in zip(discretization.advective_flux(values, (1.0, 1.0)), ramp40.apertures):
            assert not np.any(flux[0][faces == 0.0])

    def test_zero_flux_keeps_state(self, ramp40):
        values = random_field(ramp40, seed=32).values
        fluxes = [np.zeros((1,) + a.shape) for a in ramp40.apertures]
        np.testing.assert_array_equal(provisional_update(values, fluxes, 0.1, ramp40), values)

    def test_single_face_moves_mass_between_neighbors(self):
        grid = regular_grid()
        discretization = Discretization(grid)
        values = np.zeros((1,) + tuple(grid.shape))
        fluxes = [np.zeros((1,) + a.shape) for a in grid.apertures]
        face = (grid.ghost + 4, grid.ghost + 3)
        fluxes[0][(0,) + face] = 2.0
        dt = 0.01
        u_hat = discretization.provisional_update(values, fluxes, dt)
        h = grid.spacing[0]
        left = (0, face[0] - 1, face[1])
        right = (0,) + face
        assert u_hat[left] == pytest.approx(-dt * 2.0 / h)
        assert u_hat[right] == pytest.approx(dt * 2.0 / h)
        assert np.count_nonzero(u_hat) == 2

    def test_face_bound_is_noop_on_regular_grid(self):
        grid = regular_grid()
        discretization = Discretization(grid)
        values = random_field(grid, seed=12).values
        slopes = discretization.muscl_slopes(values)
        np.testing.assert_allclose(discretization.bound_slopes(values, slopes), slopes, rtol=1e-12)

    def test_face_values_within_neighbors(self, ramp40):
        discretization = Discretization(ramp40)
        values = random_field(ramp40, seed=13).values
        slopes = discretization.bound_slopes(values, discretization.muscl_slopes(values))
        open_cells = discretization.open
        high = ndimage.maximum_filter(np.where(open_cells, values[0], -np.inf), size=3,
                                      mode='constant', cval=-np.inf)
        low = ndimage.minimum_filter(np.where(open_cells, values[0], np.inf), size=3,
                                     mode='constant', cval=np.inf)
        for d in range(ramp40.ndim):
            faces = ramp40.apertures[d]
            for side in (0, 1):
                cells = [slice(None)] * ramp40.ndim
                cells[d] = slice(side, side + faces.shape[d] - 1)
                cells = tuple(cells)
                offset = discretization.face_positions[d][(slice(None),) + cells] - discretization.positions
                face = values[0] + np.einsum('e...,e...->...', slopes[0], offset)
                check = open_cells & (faces[cells] > 0.0)
                assert np.all(face[check] <= high[check] + 1e-12)
                assert np.all(face[check] >= low[check] - 1e-12)


class TestTimeStep:

    def test_advective_limit(self):
        scheme = SchemeConfig(velocity=(1.0, 0.0), cfl=0.5)
        dt, steps = compute_dt(ramp_spec(), scheme)
        assert dt == pytest.approx(0.5 / 16)
        assert steps is None

    def test_oblique_velocity_sums_directions(self):
        scheme = SchemeConfig(velocity=(1.0, -1.0), cfl=0.5)
        dt, _ = compute_dt(ramp_spec(), scheme)
        assert dt == pytest.approx(0.5 / 32)

    def test_diffusive_limit(self):
        scheme = SchemeConfig(velocity=(0.0, 0.0), diffusivity=1.0, cfl=0.5)
        dt, _ = compute_dt(ramp_spec(), scheme)
        assert dt == pytest.approx(0.5 / 256 / 4)

    def test_end_time_divides_evenly(self):
        scheme = SchemeConfig(velocity=(1.0, 0.0), cfl=0.5)
        dt, steps = compute_dt(ramp_spec(), scheme, end_time=0.1)
        assert steps == 4
        assert dt == pytest.approx(0.025)
        assert dt <= 0.5 / 16


class TestSimulation:

    def test_invalid_scheme_rejected(self, ramp40):
        with pytest.raises(ValueError):
            Simulation(ramp40, SchemeConfig(stabilizer='unknown'))

    @pytest.mark.parametrize('stabilizer', ['srd-original', 'srd-weighted', 'frd', 'none'])
    @pytest.mark.parametrize('rk', ['forward-euler', 'heun', 'predictor-corrector'])
    def test_conservation_on_periodic_grid(self, stabilizer, rk):
        grid = circle_grid()
        scheme = SchemeConfig(velocity=(1.0, 0.5), diffusivity=0.001, stabilizer=stabilizer, rk=rk)
        dt, _ = compute_dt(grid.spec, scheme)
        field = random_field(grid, seed=33)
        simulation = Simulation(grid, scheme)
        start = simulation.merge(simulation.initialize(field))
        result = simulation.run(field, 3, dt)
        assert result.total()[0] == pytest.approx(start.total()[0], abs=1e-12)
        assert result.time == pytest.approx(3 * dt)

    @pytest.mark.parametrize('stabilizer', ['srd-original', 'srd-weighted'])
    def test_free_stream_along_wall(self, stabilizer):
        grid = ramp_grid(40.0)
        angle = np.radians(40.0)
        scheme = SchemeConfig(velocity=(np.cos(angle), np.sin(angle)), stabilizer=stabilizer,
                              rk='heun')
        dt, _ = compute_dt(grid.spec, scheme)
        field = Field.from_function(grid, lambda x: np.full(x.shape[1:], 1.5))
        result = Simulation(grid, scheme).run(field, 5, dt)
        open_cells = ~grid.covered[grid.valid]
        np.testing.assert_allclose(result.valid_values()[0][open_cells], 1.5, atol=1e-9)

    def test_unstabilized_small_cell_blows_up(self):
        kappa = np.ones((8, 4))
        kappa[4, 2] = 1e-4
        grid = EBGrid.synthetic(kappa, ghost=5, boundaries=(PERIODIC, PERIODIC))
        scheme = SchemeConfig(velocity=(1.0, 0.0), stabilizer='none', rk='forward-euler')
        dt, _ = compute_dt(grid.spec, scheme)
        simulation = Simulation(grid, scheme)
        with pytest.raises(NonFiniteState):
            simulation.run(random_field(grid, seed=34), 60, dt)

    @pytest.mark.parametrize('stabilizer', ['srd-weighted', 'frd'])
    def test_patch_count_does_not_change_result(self, stabilizer):
        grid = ramp_grid(40.0, cells=(32, 16))
        scheme = SchemeConfig(velocity=(1.0, 0.3), diffusivity=0.001, stabilizer=stabilizer)
        dt, _ = compute_dt(grid.spec, scheme)
        field = random_field(grid, seed=35)
        single = Simulation(grid, scheme).run(field, 3, dt)
        split = Simulation(grid, scheme, n_patches=4).run(field, 3, dt)
        np.testing.assert_allclose(split.valid_values(), single.valid_values(), atol=1e-12)

    @pytest.mark.parametrize('resolutions, depth', [((32, 64, 128), None), ((16, 32, 64), 6)])
    def test_smooth_profile_converges(self, resolutions, depth):
        angle = np.radians(40.0)
        end_time = 0.2
        center = np.array([0.4, 0.366])
        ndim = 2 if depth is None else 3
        velocity = np.zeros(ndim)
        velocity[:2] = np.cos(angle), np.sin(angle)
        scheme = SchemeConfig(velocity=tuple(velocity), stabilizer='srd-weighted', rk='heun',
                              limiter=False)

        def bump(time):
            def function(x):
                shifted = x[:2] - (center + time * velocity[:2]).reshape((2,) + (1,) * ndim)
                return np.exp(-np.sum(shifted ** 2, axis=0) / 0.12 ** 2)
            return function

        errors = []
        for n in resolutions:
            cells = (n, n) if depth is None else (n, n, depth)
            boundaries = (OUTFLOW, OUTFLOW) if depth is None else (OUTFLOW, OUTFLOW, PERIODIC)
            grid = ramp_grid(40.0, cells=cells, wall_y=-0.1, boundaries=boundaries)
            dt, steps = compute_dt(grid.spec, scheme, end_time)
            simulation = Simulation(grid, scheme, SrdSettings(limit_slopes=False))
            result = simulation.run(Field.from_function(grid, bump(0.0)), steps, dt)
            exact = Field.from_function(grid, bump(end_time))
            volume = np.where(grid.covered, 0.0, grid.volume)[grid.valid]
            difference = np.abs(result.valid_values()[0] - exact.valid_values()[0])
            errors.append(np.sum(volume * difference) / np.sum(volume))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert orders[-1] >= 1.5, errors
