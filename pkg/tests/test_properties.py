"""
Свойства перераспределения на случайных сетках и состояниях.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.frd import build_frd_plan, frd_apply
from src.geometry import HalfSpace, Sphere
from src.mesh import EBGrid, Field, build_ebgrid
from src.models import SrdSettings
from src.srd import build_plan, framework_apply, srd_apply
from tests.conftest import linear_field, ramp_grid, ramp_spec

kappas = st.tuples(st.integers(3, 6), st.integers(3, 6)).flatmap(
    lambda shape: arrays(np.float64, shape, elements=st.floats(0.15, 1.0)))
variants = st.sampled_from(['original', 'weighted'])
modes = st.sampled_from(['normal', 'central'])


def open_valid(grid):
    mask = np.zeros(grid.shape, dtype=bool)
    mask[grid.valid] = True
    return mask & ~grid.blocked


def state(grid, seed):
    rng = np.random.default_rng(seed)
    return Field(grid, np.where(grid.covered, 0.0, rng.normal(size=grid.shape))[None])


@settings(max_examples=25, deadline=None)
@given(kappa=kappas, variant=variants, mode=modes)
def test_columns_sum_to_one(kappa, variant, mode):
    grid = EBGrid.synthetic(kappa, ghost=5)
    plan = build_plan(grid, variant, SrdSettings(merge_mode=mode))
    sums = np.asarray(plan.matrix.sum(axis=0)).ravel().reshape(grid.shape)
    np.testing.assert_allclose(sums[open_valid(grid)], 1.0, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(kappa=kappas, variant=variants, seed=st.integers(0, 2 ** 16))
def test_redistribution_conserves(kappa, variant, seed):
    grid = EBGrid.synthetic(kappa, ghost=5)
    plan = build_plan(grid, variant)
    u_hat = state(grid, seed)
    before = u_hat.total()[0]
    after = srd_apply(plan, u_hat).total()[0]
    assert after == pytest.approx(before, abs=1e-12 * max(1.0, abs(before)))


@settings(max_examples=25, deadline=None)
@given(kappa=kappas)
def test_weighted_coefficients(kappa):
    grid = EBGrid.synthetic(kappa, ghost=5)
    plan = build_plan(grid, 'weighted')
    cells = open_valid(grid)
    assert np.all((plan.beta[cells] >= 0.0) & (plan.beta[cells] <= 1.0))
    assert np.all(plan.alpha[cells] > 0.0)


@settings(max_examples=25, deadline=None)
@given(kappa=kappas, variant=variants, value=st.floats(-10.0, 10.0))
def test_constant_state_is_fixed(kappa, variant, value):
    grid = EBGrid.synthetic(kappa, ghost=5)
    plan = build_plan(grid, variant)
    field = Field(grid, np.where(grid.covered, 0.0, value)[None])
    cells = open_valid(grid)
    np.testing.assert_allclose(framework_apply(plan, field).values[0][cells], value, atol=1e-12)
    np.testing.assert_allclose(srd_apply(plan, field).values[0][cells], value, atol=1e-12)


def sphere_grid(center, radius):
    spec = ramp_spec((6, 6, 6))
    return build_ebgrid(Sphere(center, radius), spec, 5)


def plane_grid(normal, height):
    spec = ramp_spec((6, 6, 6))
    return build_ebgrid(HalfSpace(normal, point=(0.5, 0.5, height)), spec, 5)


spheres = st.builds(
    sphere_grid,
    st.tuples(*[st.floats(0.35, 0.65)] * 3),
    st.floats(0.15, 0.3))
planes = st.builds(
    plane_grid,
    st.tuples(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-1.0, -0.3)),
    st.floats(0.3, 0.7))
meshes3d = st.one_of(spheres, planes)


@settings(max_examples=10, deadline=None)
@given(grid=meshes3d, variant=variants, seed=st.integers(0, 2 ** 16))
def test_redistribution_conserves_in_3d(grid, variant, seed):
    plan = build_plan(grid, variant)
    u_hat = state(grid, seed)
    before = u_hat.total()[0]
    after = srd_apply(plan, u_hat).total()[0]
    assert after == pytest.approx(before, rel=1e-12, abs=1e-14)


@settings(max_examples=10, deadline=None)
@given(grid=meshes3d, variant=variants)
def test_linear_state_is_fixed_in_3d(grid, variant):
    plan = build_plan(grid, variant)
    field = linear_field(grid)
    cells = open_valid(grid) & ~grid.covered
    result = srd_apply(plan, field, limit=False)
    np.testing.assert_allclose(result.values[0][cells], field.values[0][cells], atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(grid=st.one_of(meshes3d, st.builds(ramp_grid, st.floats(20.0, 70.0),
                                          wall_y=st.floats(0.05, 0.3))),
       seed=st.integers(0, 2 ** 16))
def test_flux_redistribution_conserves(grid, seed):
    plan = build_frd_plan(grid)
    rng = np.random.default_rng(seed)
    flux = np.where(grid.blocked | grid.covered, 0.0, rng.uniform(-1.0, 1.0, size=grid.shape))[None]
    conservative = np.divide(flux, grid.volume, out=np.zeros_like(flux), where=grid.volume > 0)
    nonconservative = flux / grid.spec.cell_volume
    u = state(grid, seed)
    dt = 1e-3
    result = frd_apply(plan, u, conservative, nonconservative, dt)
    expected = u.total()[0] - dt * flux[0][grid.valid].sum()
    assert result.total()[0] == pytest.approx(expected, rel=1e-12, abs=1e-14)
