"""
Тесты перераспределения состояний: окрестности, веса, применение,
контроль ширины фиктивного слоя.
"""
import numpy as np
import pytest

from src.errors import GhostWidthTooSmall, WeightSumViolation
from src.geometry import ramp
from src.mesh import EBGrid, Field, build_ebgrid, decompose
from src.models import SrdSettings
from src.srd import (
    ReadTracker, build_neighborhoods, build_plan, compute_overlaps, compute_weights_original,
    compute_weights_weighted, framework_apply, neighborhood_averages, srd_apply, srd_init,
)
from tests.conftest import linear_field, random_field, ramp_grid, ramp_spec

# Ячейки 3x3 нумеруются n = i + 3j + 1
KAPPA_3X3 = [1.0, 0.8, 0.3, 0.7, 0.9, 0.2, 0.4, 0.35, 0.1]
MEMBERS_3X3 = {3: (3, 2), 6: (6, 5), 7: (7, 4), 8: (8, 5), 9: (9, 5, 6, 8)}

# A^orig для блока 3x3: строка j - окрестность, столбец i - ячейка
ORIGINAL_3X3 = np.array([
    [1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1 / 2, 0, 0, 0, 0, 0, 0, 0],
    [0, 1 / 2, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1 / 2, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1 / 4, 0, 0, 0, 0],
    [0, 0, 0, 0, 1 / 4, 1 / 2, 0, 0, 0],
    [0, 0, 0, 1 / 2, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 1 / 4, 0, 0, 1 / 2, 0],
    [0, 0, 0, 0, 1 / 4, 1 / 2, 0, 1 / 2, 1],
])


def _index(n):
    return ((n - 1) % 3, (n - 1) // 3)


def grid_3x3():
    kappa = np.zeros((3, 3))
    for n, k in enumerate(KAPPA_3X3, start=1):
        kappa[_index(n)] = k
    return EBGrid.synthetic(kappa, ghost=3)


def members_3x3(grid):
    flat = {n: int(grid.flat(_index(n))) for n in range(1, 10)}
    members = {flat[owner]: tuple(flat[c] for c in cells) for owner, cells in MEMBERS_3X3.items()}
    return members, flat


def overlap_counts():
    counts = {n: 1 for n in range(1, 10)}
    for cells in MEMBERS_3X3.values():
        for c in cells[1:]:
            counts[c] += 1
    return counts


def expected_weights(variant):
    """w[(i, j)]: доля ячейки i в окрестности j"""
    counts = overlap_counts()
    beta = {n: 0.0 for n in range(1, 10)}
    for owner, cells in MEMBERS_3X3.items():
        if variant == 'original':
            beta[owner] = 1.0
        else:
            others = sum(KAPPA_3X3[c - 1] for c in cells[1:])
            beta[owner] = min(max((0.5 - KAPPA_3X3[owner - 1]) / others, 0.0), 1.0)
    weights = {}
    for i in range(1, 10):
        received = sum(beta[j] for j, cells in MEMBERS_3X3.items() if i in cells[1:])
        weights[(i, i)] = 1.0 / counts[i] if variant == 'original' else 1.0 - received / counts[i]
    for j, cells in MEMBERS_3X3.items():
        for i in cells[1:]:
            weights[(i, j)] = beta[j] / counts[i]
    return weights


class TestMatrixGolden:
    """Матрица весов для окрестностей, заданных вручную на блоке 3x3"""

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_matrix_entries(self, variant):
        grid = grid_3x3()
        members, flat = members_3x3(grid)
        overlap, overlap_sets = compute_overlaps(grid, members)
        build = compute_weights_original if variant == 'original' else compute_weights_weighted
        plan = build(grid, members, overlap, overlap_sets)
        cells = [flat[n] for n in range(1, 10)]
        matrix = plan.dense_matrix(cells)

        expected = np.zeros((9, 9))
        for (i, j), w in expected_weights(variant).items():
            expected[j - 1, i - 1] = w
        np.testing.assert_allclose(matrix, expected, atol=1e-15)
        np.testing.assert_allclose(matrix.sum(axis=0), 1.0, atol=1e-13)

    def test_original_entries_are_simple_fractions(self):
        grid = grid_3x3()
        members, flat = members_3x3(grid)
        overlap, overlap_sets = compute_overlaps(grid, members)
        plan = compute_weights_original(grid, members, overlap, overlap_sets)
        matrix = plan.dense_matrix([flat[n] for n in range(1, 10)])
        assert set(np.unique(matrix)) <= {0.0, 0.25, 0.5, 1.0}

    def test_original_matrix_literal(self):
        grid = grid_3x3()
        members, flat = members_3x3(grid)
        overlap, overlap_sets = compute_overlaps(grid, members)
        plan = compute_weights_original(grid, members, overlap, overlap_sets)
        matrix = plan.dense_matrix([flat[n] for n in range(1, 10)])
        np.testing.assert_array_equal(matrix, ORIGINAL_3X3)

    def test_original_volumes_with_equal_cells(self):
        kappa = np.full((3, 3), 0.5)
        grid = EBGrid.synthetic(kappa, ghost=3)
        members, flat = members_3x3(grid)
        overlap, overlap_sets = compute_overlaps(grid, members)
        plan = compute_weights_original(grid, members, overlap, overlap_sets)
        v = float(grid.volume[_index(5)[0] + grid.ghost, _index(5)[1] + grid.ghost])
        v_hat = {n: float(plan.v_hat.flat[grid.local_flat(flat[n])]) for n in (5, 9)}
        assert v_hat[5] == pytest.approx(v / 4, rel=1e-13)
        assert v_hat[9] == pytest.approx(2.25 * v, rel=1e-13)

    def test_overlap_counts(self):
        grid = grid_3x3()
        members, flat = members_3x3(grid)
        overlap, overlap_sets = compute_overlaps(grid, members)
        for n, count in overlap_counts().items():
            p = tuple(i + grid.ghost for i in _index(n))
            assert overlap[p] == count
        assert overlap_sets[flat[5]] == (flat[5],) + tuple(sorted((flat[6], flat[8], flat[9])))


class TestNeighborhoods:

    def corner_grid(self):
        kappa = np.ones((4, 4))
        kappa[:, 0] = 0.0
        kappa[3, :] = 0.0
        normal = np.zeros((2, 4, 4))
        kappa[1, 2] = 0.9
        kappa[2, 2], normal[:, 2, 2] = 0.45, (0.95, -0.3)
        kappa[2, 1], normal[:, 2, 1] = 0.1, (0.3, -0.954)
        kappa[1, 1], normal[:, 1, 1] = 0.3, (0.1, -0.99)
        return EBGrid.synthetic(kappa, eb_normal=normal, ghost=3)

    def test_corner_overlap_counts(self):
        grid = self.corner_grid()
        members = build_neighborhoods(grid)
        overlap, _ = compute_overlaps(grid, members)
        g = grid.ghost
        assert overlap[1 + g, 2 + g] == 3
        assert overlap[2 + g, 2 + g] == 2
        assert overlap[2 + g, 1 + g] == 1
        assert overlap[1 + g, 1 + g] == 1

    def test_members_contain_owner_first(self, ramp40):
        members = build_neighborhoods(ramp40)
        assert members
        for owner, cells in members.items():
            assert cells[0] == owner
            assert len(set(cells)) == len(cells)

    def test_neighborhood_volume_reaches_target(self, ramp40):
        settings = SrdSettings()
        members = build_neighborhoods(ramp40, settings)
        volume = ramp40.volume
        target = settings.v_target * ramp40.spec.cell_volume
        for cells in members.values():
            local = ramp40.local_flat(np.array(cells, dtype=np.int64))
            assert volume.flat[local].sum() >= target - settings.merge_tol * ramp40.spec.cell_volume

    def test_no_merging_for_half_cells(self):
        grid = ramp_grid(45.0, wall_y=0.125)
        assert build_neighborhoods(grid) == {}

    def test_central_mode_uses_block(self):
        grid = ramp_grid(40.0)
        members = build_neighborhoods(grid, SrdSettings(merge_mode='central'))
        assert members
        for owner, cells in members.items():
            owner_index = np.array(grid.unflat(owner))
            for c in cells:
                assert np.abs(np.array(grid.unflat(c)) - owner_index).max() <= 1


class TestWeights:

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_column_sums(self, ramp40, variant):
        plan = build_plan(ramp40, variant)
        sums = np.asarray(plan.matrix.sum(axis=0)).ravel().reshape(ramp40.shape)
        check = np.zeros(ramp40.shape, dtype=bool)
        check[ramp40.valid] = True
        check &= ~ramp40.blocked
        np.testing.assert_allclose(sums[check], 1.0, atol=1e-13)

    def test_weighted_coefficients_in_range(self, ramp40):
        plan = build_plan(ramp40, 'weighted')
        open_cells = ~ramp40.blocked[ramp40.valid]
        assert np.all(plan.beta[ramp40.valid][open_cells] >= 0.0)
        assert np.all(plan.beta[ramp40.valid][open_cells] <= 1.0)
        assert np.all(plan.alpha[ramp40.valid][open_cells] >= -1e-14)

    def test_statistics(self, ramp40):
        stats = build_plan(ramp40, 'weighted').statistics()
        assert stats['merged_cells'] > 0
        assert stats['max_overlap'] >= 2
        assert stats['min_v_hat'] > 0.0
        assert stats['rank_deficient'] == 0


class TestRedistribution:

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_conservation(self, ramp40, variant):
        plan = build_plan(ramp40, variant)
        u_hat = random_field(ramp40, seed=11)
        result = srd_apply(plan, u_hat)
        before = u_hat.total()[0]
        after = result.total()[0]
        assert abs(after - before) <= 1e-12 * max(1.0, abs(before))

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_linearity_preserved(self, ramp40_small, variant):
        plan = build_plan(ramp40_small, variant)
        field = linear_field(ramp40_small)
        result = srd_apply(plan, field, limit=False)
        open_cells = ~ramp40_small.blocked[ramp40_small.valid]
        np.testing.assert_allclose(result.valid_values()[:, open_cells],
                                   field.valid_values()[:, open_cells], atol=1e-12)

    def test_constant_preserved_with_limiter(self, ramp40):
        plan = build_plan(ramp40, 'weighted')
        field = Field.from_function(ramp40, lambda x: np.full(x.shape[1:], 0.7))
        result = srd_apply(plan, field)
        open_cells = ~ramp40.blocked[ramp40.valid]
        np.testing.assert_allclose(result.valid_values()[:, open_cells], 0.7, atol=1e-13)

    def test_limited_result_within_bounds(self, ramp40):
        plan = build_plan(ramp40, 'weighted')
        rng = np.random.default_rng(12)
        values = np.where(ramp40.covered, 0.0, rng.uniform(0.0, 1.0, size=ramp40.shape))
        result = srd_apply(plan, Field(ramp40, values[None]))
        open_cells = ~ramp40.blocked[ramp40.valid]
        out = result.valid_values()[0, open_cells]
        assert out.min() >= -1e-12 and out.max() <= 1.0 + 1e-12

    def test_inert_cells_copied(self):
        grid = ramp_grid(45.0, wall_y=0.125)
        plan = build_plan(grid, 'weighted')
        u_hat = random_field(grid, seed=13)
        result = srd_apply(plan, u_hat)
        np.testing.assert_array_equal(result.valid_values(), u_hat.valid_values())

    def test_init_matches_apply(self, ramp40):
        plan = build_plan(ramp40, 'original')
        u0 = random_field(ramp40, seed=14)
        np.testing.assert_array_equal(srd_init(plan, u0).values, srd_apply(plan, u0).values)

    def test_averages_of_constant(self, ramp40):
        plan = build_plan(ramp40, 'weighted')
        field = Field.from_function(ramp40, lambda x: np.full(x.shape[1:], 2.0))
        q_hat = neighborhood_averages(plan, field)
        rows = plan.rows & (plan.v_hat > 0.0)
        np.testing.assert_allclose(q_hat[0][rows], 2.0, atol=1e-13)


class TestFramework:

    @staticmethod
    def canonical_weights(plan):
        grid = plan.grid
        weights = {}
        for i_flat in grid.global_flat(np.flatnonzero(plan.rows)):
            i = int(i_flat)
            p = np.unravel_index(grid.local_flat(i), grid.shape)
            weights[(i, i)] = float(plan.alpha[p])
        for owner, cells in plan.members.items():
            p_owner = np.unravel_index(grid.local_flat(owner), grid.shape)
            if not plan.rows[p_owner]:
                continue
            for i in cells[1:]:
                p = np.unravel_index(grid.local_flat(i), grid.shape)
                weights[(i, owner)] = float(plan.beta[p_owner]) / float(plan.overlap[p])
        return weights

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_matches_srd_without_slopes(self, variant):
        grid = ramp_grid(40.0, cells=(6, 6), wall_y=0.2)
        plan = build_plan(grid, variant)
        u_hat = random_field(grid, seed=21)
        np.testing.assert_array_equal(framework_apply(plan, u_hat).values,
                                      srd_apply(plan, u_hat, slopes=False).values)

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_matches_brute_force(self, variant):
        grid = ramp_grid(40.0, cells=(6, 6), wall_y=0.2)
        plan = build_plan(grid, variant)
        u_hat = random_field(grid, seed=22)
        weights = self.canonical_weights(plan)
        result = framework_apply(plan, u_hat, weights)

        volume = {}
        value = {}
        for (i, j) in weights:
            for c in (i, j):
                p = np.unravel_index(grid.local_flat(c), grid.shape)
                volume[c] = float(grid.volume[p])
                value[c] = float(u_hat.values[(0,) + p])
        v_hat, moment = {}, {}
        for (i, j), w in weights.items():
            v_hat[j] = v_hat.get(j, 0.0) + w * volume[i]
            moment[j] = moment.get(j, 0.0) + w * volume[i] * value[i]
        q_hat = {j: moment[j] / v_hat[j] for j in v_hat if v_hat[j] > 0.0}

        valid = np.zeros(grid.shape, dtype=bool)
        valid[grid.valid] = True
        for i_local in np.flatnonzero(valid & ~grid.blocked):
            i = int(grid.global_flat(i_local))
            expected = sum(w * q_hat[j] for (k, j), w in weights.items() if k == i)
            p = np.unravel_index(i_local, grid.shape)
            assert result.values[(0,) + p] == pytest.approx(expected, abs=1e-13)

    @staticmethod
    def dense_operator(plan, weights):
        """U = L U^ по формулам в плотной форме, с наклонами по lstsq"""
        grid = plan.grid
        size = int(np.prod(grid.shape))
        ndim = grid.ndim
        matrix = np.zeros((size, size))
        for (i, j), w in weights.items():
            matrix[grid.local_flat(j), grid.local_flat(i)] += w
        volume = grid.volume.ravel()
        v_hat = matrix @ volume
        inverse = np.zeros(size)
        inverse[v_hat > 0.0] = 1.0 / v_hat[v_hat > 0.0]
        averages = inverse[:, None] * matrix * volume[None, :]
        x = grid.positions().reshape(ndim, -1)
        x_hat = np.array([inverse * (matrix @ (volume * x[d])) for d in range(ndim)])

        gradient = np.zeros((ndim, size, size))
        for j, stencil in plan.stencils.items():
            if stencil.deficient:
                continue
            delta = x_hat[:, stencil.cells] - x_hat[:, [j]]
            solve = np.linalg.lstsq(delta.T, np.eye(len(stencil.cells)), rcond=None)[0]
            for d in range(ndim):
                gradient[d, j, stencil.cells] += solve[d]
                gradient[d, j, j] -= solve[d].sum()

        operator = matrix.T @ averages
        for d in range(ndim):
            shift = np.diag(x[d]) @ matrix.T - matrix.T @ np.diag(x_hat[d])
            operator += shift @ gradient[d] @ averages

        merged = np.zeros(grid.shape, dtype=bool)
        for cells in plan.members.values():
            if len(cells) > 1:
                merged.flat[grid.local_flat(np.array(cells, dtype=np.int64))] = True
        target = np.zeros(grid.shape, dtype=bool)
        target[grid.valid] = True
        target &= ~grid.blocked
        target &= ~(plan.rows & (plan.overlap == 1) & ~merged)
        keep = ~target.ravel()
        operator[keep] = 0.0
        operator[keep, keep] = 1.0
        return operator

    @pytest.mark.parametrize('variant', ['original', 'weighted'])
    def test_full_operator_with_slopes(self, variant):
        grid = ramp_grid(40.0, cells=(6, 6), wall_y=0.2)
        plan = build_plan(grid, variant)
        expected = self.dense_operator(plan, self.canonical_weights(plan))
        size = expected.shape[0]
        actual = np.zeros_like(expected)
        for k in range(size):
            unit = np.zeros((1,) + tuple(grid.shape))
            unit.flat[k] = 1.0
            actual[:, k] = srd_apply(plan, Field(grid, unit), limit=False).values.ravel()
        assert any(not s.deficient for s in plan.stencils.values())
        np.testing.assert_allclose(actual, expected, rtol=0.0, atol=1e-13)
    def test_weight_sum_violation(self, ramp40):
        plan = build_plan(ramp40, 'weighted')
        weights = self.canonical_weights(plan)
        key = next(k for k in weights if k[0] == k[1])
        weights[key] += 0.1
        with pytest.raises(WeightSumViolation):
            framework_apply(plan, random_field(ramp40), weights)


class TestGhostWidth:
    """Цепочки окрестностей вдоль горизонтальной стенки"""

    def chained_patch(self):
        spec = ramp_spec((16, 8))
        h = spec.spacing[1]
        wall = ramp(0.0, (0.0, 2.7 * h))
        grid = build_ebgrid(wall, spec, 5)
        patch = decompose(spec, 2, 5)[0]
        return grid.restrict(patch.lo, patch.hi, 5)

    def test_pipeline_within_default_widths(self):
        grid = self.chained_patch()
        tracker = ReadTracker()
        build_plan(grid, 'weighted', SrdSettings(merge_mode='central'), tracker)
        assert tracker.reach(grid, 'state') <= 3
        assert tracker.reach(grid, 'geometry') <= 5

    @pytest.mark.parametrize('limits', [{'state': 2, 'geometry': 5}, {'state': 3, 'geometry': 4}])
    def test_reduced_width_detected(self, limits):
        grid = self.chained_patch()
        with pytest.raises(GhostWidthTooSmall):
            build_plan(grid, 'weighted', SrdSettings(merge_mode='central'), ReadTracker(limits))
