import math

import numpy as np
import pytest

from maglab.errors import ArgumentError
from maglab.metric import (
    FiniteMetricSpace,
    is_positive_definite,
    load_point_file,
    magnitude,
    magnitude_sweep,
    similarity_matrix,
    weighting,
)


def test_two_point_closed_form():
    # M = 2 / (1 + e^{-d}) for a two-point space at distance d
    for d in (0.1, 1.0, math.log(3), 7.5):
        space = FiniteMetricSpace.from_coordinates([[0.0], [d]])
        assert magnitude(space, 1.0) == pytest.approx(2 / (1 + math.exp(-d)), abs=1e-12)


def test_two_point_log3_is_three_halves():
    space = FiniteMetricSpace.from_coordinates([[0.0], [math.log(3)]])
    assert magnitude(space, 1.0) == pytest.approx(1.5, abs=1e-12)


def test_single_point_magnitude_is_one():
    space = FiniteMetricSpace.from_coordinates([[0.0, 0.0]])
    assert magnitude(space, 2.0) == pytest.approx(1.0, abs=1e-14)


def test_scale_equals_rescaling_distances():
    rng = np.random.default_rng(5)
    space = FiniteMetricSpace.from_coordinates(rng.normal(size=(12, 3)))
    assert magnitude(space, 2.5) == pytest.approx(
        magnitude(space.rescaled(2.5), 1.0), rel=1e-12
    )


def test_weighting_residual_recorded():
    rng = np.random.default_rng(11)
    space = FiniteMetricSpace.from_coordinates(rng.normal(size=(40, 2)))
    w = weighting(space, 1.0)
    assert w.residual <= 1e-10 * len(space)
    z = similarity_matrix(space, 1.0)
    assert np.abs(z @ w.weights - 1).max() == pytest.approx(w.residual, abs=1e-15)


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    coords = rng.normal(size=(25, 3))
    perm = rng.permutation(25)
    a = magnitude(FiniteMetricSpace.from_coordinates(coords), 1.7)
    b = magnitude(FiniteMetricSpace.from_coordinates(coords[perm]), 1.7)
    assert a == pytest.approx(b, abs=1e-12)


def test_isometry_invariance():
    rng = np.random.default_rng(4)
    coords = rng.normal(size=(20, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = coords @ q.T + np.array([5.0, -2.0, 0.25])
    a = magnitude(FiniteMetricSpace.from_coordinates(coords), 0.9)
    b = magnitude(FiniteMetricSpace.from_coordinates(moved), 0.9)
    assert a == pytest.approx(b, abs=1e-12)


def test_positive_definite_on_euclidean_points():
    rng = np.random.default_rng(8)
    space = FiniteMetricSpace.from_coordinates(rng.normal(size=(30, 4)))
    flag, lam_min = is_positive_definite(space, 1.0)
    assert flag and lam_min > 0


def test_magnitude_increases_with_scale():
    # growing a Euclidean set (positive definite Z) cannot shrink its magnitude
    rng = np.random.default_rng(9)
    space = FiniteMetricSpace.from_coordinates(rng.normal(size=(15, 2)))
    values = magnitude_sweep(space, [0.5, 1.0, 2.0, 4.0])
    assert np.all(np.diff(values) > 0)


def test_magnitude_limits():
    space = FiniteMetricSpace.from_coordinates([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert magnitude(space, 50.0) == pytest.approx(3.0, abs=1e-6)
    assert magnitude(space, 1e-4) == pytest.approx(1.0, abs=1e-3)


def test_validation_rejects_bad_matrices():
    with pytest.raises(ArgumentError):
        FiniteMetricSpace([0, 1], [[0.0, 1.0], [2.0, 0.0]])  # asymmetric
    with pytest.raises(ArgumentError):
        FiniteMetricSpace([0, 1], [[0.5, 1.0], [1.0, 0.0]])  # nonzero diagonal
    with pytest.raises(ArgumentError):
        FiniteMetricSpace([0, 1], [[0.0, 0.0], [0.0, 0.0]])  # duplicate points
    with pytest.raises(ArgumentError):
        # 10 > 1 + 1: triangle inequality fails
        FiniteMetricSpace(
            [0, 1, 2],
            [[0.0, 1.0, 10.0], [1.0, 0.0, 1.0], [10.0, 1.0, 0.0]],
        )


def test_scale_must_be_positive():
    space = FiniteMetricSpace.from_coordinates([[0.0], [1.0]])
    with pytest.raises(ArgumentError):
        magnitude(space, 0.0)
    with pytest.raises(ArgumentError):
        magnitude(space, -1.0)


def test_load_point_file_coordinates(tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("# a comment\n0 0\n1, 0\n0 1\n")
    space = load_point_file(str(path))
    assert len(space) == 3
    assert space.dist[0, 1] == pytest.approx(1.0)


def test_load_point_file_matrix_block():
    space = load_point_file(["matrix 2", "0 1.5", "1.5 0"])
    assert len(space) == 2
    assert space.dist[0, 1] == 1.5


def test_load_point_file_empty_is_error():
    with pytest.raises(ArgumentError):
        load_point_file(["# nothing"])
