import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aptstar.geometry import (
    HyperRectangle,
    InformedSet,
    ProblemInstance,
    WorldModel,
    default_motion_resolution,
    distance,
    is_motion_valid,
    is_state_valid,
    lebesgue_measure,
    load_world,
    orthonormal_basis,
    sample_informed,
    sample_uniform,
    save_world,
    unit_ball_volume,
    world_from_dict,
    world_to_dict,
)

from oracles import mc_two_focus_volume, motion_valid_fine


def unit_world(*obstacles):
    return WorldModel(
        HyperRectangle([0.0, 0.0], [1.0, 1.0]),
        tuple(HyperRectangle(lo, hi) for lo, hi in obstacles),
    )


class TestDistance:
    def test_identity(self):
        assert distance((0, 0), (0, 0)) == 0.0

    def test_345_triangle(self):
        assert distance((0, 0), (3, 4)) == 5.0

    def test_canonical_start_goal(self):
        assert distance((0.05, 0.5), (0.95, 0.5)) == pytest.approx(0.9, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            distance((0, 0), (0, 0, 0))

    @given(
        st.lists(st.floats(-10, 10), min_size=2, max_size=6),
        st.data(),
    )
    def test_triangle_inequality(self, a, data):
        n = len(a)
        b = data.draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
        c = data.draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=6), st.data())
    def test_symmetry(self, a, data):
        b = data.draw(st.lists(st.floats(-10, 10), min_size=len(a), max_size=len(a)))
        assert distance(a, b) == distance(b, a)


class TestSampleUniform:
    def test_containment(self):
        rng = np.random.default_rng(0)
        box = HyperRectangle([0.0, 0.0], [1.0, 1.0])
        for _ in range(100):
            x = sample_uniform(box, rng)
            assert box.contains(x)

    def test_degenerate_box(self):
        rng = np.random.default_rng(0)
        box = HyperRectangle([0.3, 0.7], [0.3, 0.7])
        assert np.array_equal(sample_uniform(box, rng), [0.3, 0.7])

    def test_empirical_mean(self):
        rng = np.random.default_rng(42)
        box = HyperRectangle([0.0, 0.0], [1.0, 1.0])
        draws = np.array([sample_uniform(box, rng) for _ in range(10_000)])
        # 1e4 draws keeps the desk-scale law-of-large-numbers check under a
        # second; the standard error is 0.003, well inside the 0.01 budget.
        assert np.all(np.abs(draws.mean(axis=0) - 0.5) < 0.01)


class TestSampleInformed:
    def test_infinite_cost_is_uniform_fallback(self):
        rng = np.random.default_rng(1)
        box = HyperRectangle([0.0, 0.0], [1.0, 1.0])
        informed = InformedSet([0.1, 0.5], [0.9, 0.5], math.inf, 0.8)
        for _ in range(50):
            assert box.contains(sample_informed(informed, box, rng))

    def test_membership(self):
        rng = np.random.default_rng(2)
        box = HyperRectangle([-2.0, -2.0], [3.0, 2.0])
        informed = InformedSet([0.0, 0.0], [1.0, 0.0], 1.25, 1.0)
        for _ in range(500):
            x = sample_informed(informed, box, rng)
            assert informed.contains(x)
            assert box.contains(x)

    def test_left_half_symmetry(self):
        rng = np.random.default_rng(3)
        box = HyperRectangle([-2.0, -2.0], [3.0, 2.0])
        informed = InformedSet([0.0, 0.0], [1.0, 0.0], 1.25, 1.0)
        draws = np.array([sample_informed(informed, box, rng) for _ in range(20_000)])
        left = np.mean(draws[:, 0] < 0.5)
        # standard error at 2e4 draws is 0.0035
        assert abs(left - 0.5) < 0.012

    def test_cost_below_cmin_rejected(self):
        with pytest.raises(ValueError):
            InformedSet([0.0, 0.0], [1.0, 0.0], 0.5, 1.0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_membership_property(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        fa = rng.uniform(-1, 1, n)
        fb = rng.uniform(-1, 1, n)
        c_min = float(np.linalg.norm(fb - fa))
        if c_min < 1e-6:
            return
        c = c_min * float(rng.uniform(1.01, 2.0))
        informed = InformedSet(fa, fb, c, c_min)
        box = HyperRectangle(np.full(n, -5.0), np.full(n, 5.0))
        x = sample_informed(informed, box, rng)
        assert informed.contains(x)


class TestLebesgueMeasure:
    def test_degenerate(self):
        assert lebesgue_measure(1.0, 1.0, 2) == 0.0

    def test_n1_reduces_to_interval(self):
        assert lebesgue_measure(0.7, 0.5, 1) == pytest.approx(0.7, abs=1e-15)

    def test_2d_value(self):
        # pi * 2 * sqrt(3) / 4, frozen from direct evaluation
        assert lebesgue_measure(2.0, 1.0, 2) == pytest.approx(
            2.7206990463513265, abs=1e-12
        )

    def test_monte_carlo_cross_check(self):
        rng = np.random.default_rng(7)
        for n in (2, 3):
            vol = mc_two_focus_volume(2.0, 1.0, n, 200_000, rng)
            assert lebesgue_measure(2.0, 1.0, n) == pytest.approx(vol, rel=0.02)

    def test_monotone_in_cost(self):
        cs = np.linspace(1.0, 4.0, 50)
        vals = [lebesgue_measure(c, 1.0, 3) for c in cs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_errors_and_infinity(self):
        with pytest.raises(ValueError):
            lebesgue_measure(0.9, 1.0, 2)
        assert lebesgue_measure(math.inf, 1.0, 2) == math.inf


class TestValidity:
    def test_empty_world(self):
        world = unit_world()
        assert is_state_valid(world, np.array([0.3, 0.8]))

    def test_obstacle_centroid(self):
        world = unit_world(([0.4, 0.4], [0.6, 0.6]))
        assert not is_state_valid(world, np.array([0.5, 0.5]))

    def test_obstacle_boundary_is_invalid(self):
        world = unit_world(([0.4, 0.4], [0.6, 0.6]))
        assert not is_state_valid(world, np.array([0.4, 0.5]))

    def test_out_of_bounds(self):
        world = unit_world()
        assert not is_state_valid(world, np.array([1.1, 0.5]))


class TestMotionValid:
    def test_trivial_point(self):
        world = unit_world()
        a = np.array([0.2, 0.2])
        assert is_motion_valid(world, a, a, 0.01)

    def test_crossing_slab(self):
        world = unit_world(([0.45, 0.0], [0.55, 1.0]))
        assert not is_motion_valid(
            world, np.array([0.1, 0.5]), np.array([0.9, 0.5]), 0.01
        )

    def test_fine_resolution_oracle(self):
        obstacles = [
            ((0.45, 0.0), (0.55, 0.45)),
            ((0.45, 0.55), (0.55, 1.0)),
            ((0.2, 0.2), (0.3, 0.35)),
        ]
        world = unit_world(*obstacles)
        res = default_motion_resolution(world)
        rng = np.random.default_rng(11)
        fixtures = [
            (np.array([0.1, 0.5]), np.array([0.9, 0.5])),
            (np.array([0.1, 0.44]), np.array([0.9, 0.56])),
            (np.array([0.44, 0.5]), np.array([0.56, 0.5])),
        ] + [
            (rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)) for _ in range(40)
        ]
        for a, b in fixtures:
            got = is_motion_valid(world, a, b, res)
            want = motion_valid_fine(
                obstacles, (0.0, 0.0), (1.0, 1.0), a, b, res / 10.0
            )
            assert got == want, (a, b)

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        world = unit_world(([0.4, 0.4], [0.6, 0.6]))
        a = rng.uniform(0, 1, 2)
        b = rng.uniform(0, 1, 2)
        assert is_motion_valid(world, a, b, 0.01) == is_motion_valid(
            world, b, a, 0.01
        )


class TestOrthonormalBasis:
    def test_axis_aligned(self):
        assert np.array_equal(orthonormal_basis(np.array([1.0, 0.0, 0.0])), np.eye(3))

    def test_first_column(self):
        q = orthonormal_basis(np.array([0.0, 3.0]))
        assert np.allclose(q[:, 0], [0.0, 1.0])
        assert np.max(np.abs(q.T @ q - np.eye(2))) < 1e-9

    def test_determinant_in_r8(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            q = orthonormal_basis(rng.standard_normal(8))
            assert abs(abs(np.linalg.det(q)) - 1.0) < 1e-9

    def test_zero_vector(self):
        assert np.array_equal(orthonormal_basis(np.zeros(4)), np.eye(4))


class TestWorldSerialization:
    def test_roundtrip(self, tmp_path):
        world = unit_world(([0.4, 0.4], [0.6, 0.6]), ([0.1, 0.1], [0.2, 0.9]))
        path = tmp_path / "w.json"
        save_world(world, path)
        loaded = load_world(path)
        assert world_to_dict(loaded) == world_to_dict(world)

    def test_dimension_mismatch_rejected(self):
        data = world_to_dict(unit_world())
        data["dimension"] = 3
        with pytest.raises(ValueError):
            world_from_dict(data)


class TestProblemInstance:
    def test_cmin(self):
        world = unit_world()
        prob = ProblemInstance(world, [0.05, 0.5], ([0.95, 0.5],))
        assert prob.c_min == pytest.approx(0.9, abs=1e-15)

    def test_invalid_start_rejected(self):
        world = unit_world(([0.0, 0.4], [0.1, 0.6]))
        with pytest.raises(ValueError):
            ProblemInstance(world, [0.05, 0.5], ([0.95, 0.5],))

    def test_start_equals_goal_rejected(self):
        world = unit_world()
        with pytest.raises(ValueError):
            ProblemInstance(world, [0.5, 0.5], ([0.5, 0.5],))


class TestUnitBallVolume:
    def test_known_values(self):
        assert unit_ball_volume(1) == pytest.approx(2.0)
        assert unit_ball_volume(2) == pytest.approx(math.pi)
        assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)
