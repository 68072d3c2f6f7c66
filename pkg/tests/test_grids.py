"""Tests for dense, sparse, and subsampled grid constructions."""
import itertools
import math

import numpy as np
import pytest

from quadfeat.errors import GridSizeError
from quadfeat.grids import (
    GridQuadrature,
    dense_grid,
    exactness_residual,
    grid_from_json,
    grid_to_json,
    sparse_grid,
    subsample_dense_grid,
    subsample_grid,
)
from quadfeat.quad1d import gauss_hermite


class TestDenseGrid:
    def test_single_point(self):
        g = dense_grid(1, 3)
        np.testing.assert_allclose(g.points, [[0.0, 0.0, 0.0]])
        np.testing.assert_allclose(g.weights, [1.0])

    def test_two_by_two(self):
        g = dense_grid(2, 2)
        corners = sorted(map(tuple, np.round(g.points, 12)))
        assert corners == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
        np.testing.assert_allclose(g.weights, 0.25)

    def test_three_by_two_weights(self):
        g = dense_grid(3, 2)
        assert g.count == 9
        products = sorted(
            w1 * w2 for w1, w2 in itertools.product([1 / 6, 2 / 3, 1 / 6],
                                                    [1 / 6, 2 / 3, 1 / 6]))
        np.testing.assert_allclose(sorted(g.weights), products, rtol=1e-12)
        assert g.weights.sum() == pytest.approx(1.0)

    def test_cap_error_names_the_size(self):
        with pytest.raises(GridSizeError) as exc:
            dense_grid(10, 9, cap=10**6)
        assert exc.value.requested == 10**9
        assert "1000000000" in str(exc.value)

    @pytest.mark.parametrize("L", [1, 2, 3, 4])
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_exactness_to_degree_2L_minus_1(self, L, d):
        assert exactness_residual(dense_grid(L, d), 2 * L - 1) <= 1e-9


def reference_sparse_accumulation(A, d):
    """Independent signed accumulation over difference-term branches."""
    acc = {}
    levels = [m for m in itertools.product(range(A + 1), repeat=d)
              if sum(m) <= A]
    for m in levels:
        branches = []
        for mi in m:
            if mi == 0:
                branches.append([(gauss_hermite(1), 1.0)])
            else:
                branches.append([(gauss_hermite(2**mi), 1.0),
                                 (gauss_hermite(2 ** (mi - 1)), -1.0)])
        for combo in itertools.product(*branches):
            sign = math.prod(s for _, s in combo)
            rules = [r for r, _ in combo]
            for nodes_idx in itertools.product(*(range(r.point_count)
                                                 for r in rules)):
                point = tuple(float(rules[j].nodes[nodes_idx[j]])
                              for j in range(d))
                w = sign * math.prod(rules[j].weights[nodes_idx[j]]
                                     for j in range(d))
                acc[point] = acc.get(point, 0.0) + w
    return {k: v for k, v in acc.items() if abs(v) > 1e-13}


class TestSparseGrid:
    def test_level_zero_is_the_origin(self):
        for d in (1, 3, 10):
            g = sparse_grid(0, d)
            assert g.count == 1
            np.testing.assert_allclose(g.points, np.zeros((1, d)))
            np.testing.assert_allclose(g.weights, [1.0])

    def test_one_dimensional_telescoping(self):
        # G^1 + (G^2 - G^1) + (G^4 - G^2) collapses to G^4 exactly
        g = sparse_grid(2, 1)
        rule = gauss_hermite(4)
        np.testing.assert_array_equal(g.points.ravel(), rule.nodes)
        np.testing.assert_array_equal(g.weights, rule.weights)

    def test_count_anchor_d25_A2(self):
        g = sparse_grid(2, 25)
        assert g.count == 1351
        assert g.count <= (3**2) * math.comb(27, 2)
        assert g.weights.sum() == pytest.approx(1.0, abs=1e-10)
        assert not g.nonnegative

    @pytest.mark.parametrize("A,d", [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2),
                                     (3, 2), (2, 3), (1, 4)])
    def test_matches_reference_accumulation(self, A, d):
        g = sparse_grid(A, d)
        ref = reference_sparse_accumulation(A, d)
        assert g.count == len(ref)
        for point, weight in zip(g.points, g.weights):
            assert ref[tuple(point)] == pytest.approx(weight, abs=1e-12)

    @pytest.mark.parametrize("A", [1, 2, 3])
    def test_one_dim_kernel_estimate_matches_gauss_hermite(self, A):
        g = sparse_grid(A, 1)
        rule = gauss_hermite(2**A)
        u = 3.0 * np.random.default_rng(0).standard_normal(100)
        for ui in u:
            sparse_val = float(np.cos(ui * g.points.ravel()) @ g.weights)
            rule_val = float(np.cos(ui * rule.nodes) @ rule.weights)
            assert abs(sparse_val - rule_val) <= 1e-10

    def test_smolyak_level_one_exact_to_degree_two(self):
        assert exactness_residual(sparse_grid(1, 2), 2) <= 1e-10

    def test_mid_scale_level_three(self):
        g = sparse_grid(3, 10)
        assert g.weights.sum() == pytest.approx(1.0, abs=1e-10)
        assert g.count <= (3**3) * math.comb(13, 3)
        # level 3 matches all moments of total degree <= 3 and more
        assert exactness_residual(g, 3) <= 1e-9

    def test_level_bound(self):
        with pytest.raises(ValueError):
            sparse_grid(8, 2)

    def test_point_cap(self):
        with pytest.raises(GridSizeError):
            sparse_grid(3, 8, cap=50)


class TestExactnessResidual:
    def test_dense_degree_three(self):
        assert exactness_residual(dense_grid(2, 3), 3) <= 1e-10

    def test_single_point_misses_variance(self):
        # the origin-only rule gets E[w^2] = 1 wrong by exactly 1
        assert exactness_residual(dense_grid(1, 2), 2) == pytest.approx(1.0)

    def test_constraint_cap(self):
        with pytest.raises(GridSizeError):
            exactness_residual(dense_grid(2, 3), 40, cap=100)


class TestSubsample:
    def test_single_point_grid(self):
        g = GridQuadrature(np.array([[1.5, -0.5]]), np.array([1.0]))
        for D in (1, 5, 50):
            s = subsample_grid(g, D, seed=0)
            assert s.count == 1
            np.testing.assert_allclose(s.weights, [1.0])
            np.testing.assert_allclose(s.points, g.points)

    def test_negative_weights_rejected(self):
        g = sparse_grid(2, 2)
        assert not g.nonnegative
        with pytest.raises(ValueError):
            subsample_grid(g, 10, seed=0)

    def test_weights_uniform_or_merged_and_normalized(self):
        g = dense_grid(3, 2)
        s = subsample_grid(g, 100, seed=5)
        assert abs(s.weights.sum() - 1.0) <= 1e-12
        assert (s.weights > 0).all()
        # every weight is a multiple of 1/D
        np.testing.assert_allclose(np.round(s.weights * 100), s.weights * 100)

    def test_categorical_frequencies(self):
        # 4 draws repeated many times should reproduce the grid weights
        g = dense_grid(3, 2)
        total = np.zeros(g.count)
        draws = 0
        for rep in range(25_000):
            s = subsample_grid(g, 4, seed=rep)
            for point, w in zip(s.points, s.weights):
                idx = np.flatnonzero((g.points == point).all(axis=1))[0]
                total[idx] += w * 4
            draws += 4
        freq = total / draws
        se = np.sqrt(g.weights * (1 - g.weights) / draws)
        assert (np.abs(freq - g.weights) <= 3 * se + 1e-12).all()

    def test_unbiased_kernel_estimate(self):
        # averaging the subsampled estimate over seeds recovers the grid's own
        g = dense_grid(3, 2)
        u = np.array([0.7, -0.4])
        grid_value = float(np.cos(g.points @ u) @ g.weights)
        estimates = []
        for seed in range(500):
            s = subsample_grid(g, 20, seed=seed)
            estimates.append(float(np.cos(s.points @ u) @ s.weights))
        estimates = np.asarray(estimates)
        se = estimates.std(ddof=1) / math.sqrt(len(estimates))
        assert abs(estimates.mean() - grid_value) <= 3 * se

    def test_lattice_subsample_matches_explicit_in_distribution(self):
        # per-coordinate marginals follow the one-dimensional weights
        rule = gauss_hermite(3)
        s = subsample_dense_grid(3, 2, 40_000, seed=9)
        for j in range(2):
            for node, w in zip(rule.nodes, rule.weights):
                mass = s.weights[np.isclose(s.points[:, j], node)].sum()
                se = math.sqrt(w * (1 - w) / 40_000)
                assert abs(mass - w) <= 4 * se

    def test_lattice_subsample_huge_grid(self):
        # L^d far beyond the materialization cap still subsamples fine
        s = subsample_dense_grid(8, 40, 500, seed=1)
        assert s.count <= 500
        assert abs(s.weights.sum() - 1.0) <= 1e-12


def test_grid_serialization_round_trip(tmp_path):
    g = sparse_grid(2, 3)
    back = grid_from_json(grid_to_json(g))
    np.testing.assert_array_equal(back.points, g.points)
    np.testing.assert_array_equal(back.weights, g.weights)
    assert back.nonnegative == g.nonnegative
    assert back.provenance == g.provenance


def test_empty_grid_round_trip():
    empty = GridQuadrature(np.zeros((0, 3)), np.zeros(0), normalized=False)
    back = grid_from_json(grid_to_json(empty))
    assert back.count == 0
    assert back.d == 3
    assert back.nonnegative


def test_duplicate_points_rejected():
    with pytest.raises(ValueError):
        GridQuadrature(np.array([[1.0], [1.0]]), np.array([0.5, 0.5]))
