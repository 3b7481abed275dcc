import numpy as np
import pytest

from crackeval.distance import distance_transform, squared_distance_transform

import oracles


def test_three_four_five():
    m = np.zeros((6, 6), bool)
    m[0, 0] = True
    assert distance_transform(m)[3, 4] == 5.0


def test_all_foreground_is_zero():
    assert not distance_transform(np.ones((5, 7), bool)).any()


def test_empty_mask_is_infinite():
    assert np.isinf(distance_transform(np.zeros((3, 4), bool))).all()


def test_zero_exactly_on_foreground():
    m = np.random.default_rng(3).random((40, 30)) < 0.1
    d = distance_transform(m)
    assert np.array_equal(d == 0, m)


def test_squared_values_are_integers():
    m = np.random.default_rng(4).random((50, 70)) < 0.01
    m[0, 0] = True
    sq = squared_distance_transform(m)
    assert np.array_equal(sq, np.round(sq))
    assert np.array_equal(np.sqrt(sq), distance_transform(m))


def test_bounded_by_diagonal():
    m = np.zeros((30, 50), bool)
    m[29, 49] = True
    assert distance_transform(m).max() <= np.hypot(29, 49)


@pytest.mark.parametrize("shape", [(1, 1), (1, 17), (17, 1), (2, 3)])
def test_degenerate_shapes(shape):
    rng = np.random.default_rng(sum(shape))
    m = rng.random(shape) < 0.4
    m.flat[0] = True
    assert np.abs(distance_transform(m) - oracles.distance_field(m)).max() < 1e-9


def test_matches_naive_oracle_on_200_masks():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        m = rng.random((64, 64)) < rng.uniform(0.0005, 0.08)
        if not m.any():
            m[rng.integers(64), rng.integers(64)] = True
        worst = max(worst, np.abs(distance_transform(m) - oracles.distance_field(m)).max())
    assert worst < 1e-6


def test_collinear_foreground_rows():
    # many foreground pixels in one column exercise the envelope's tie handling
    m = np.zeros((41, 41), bool)
    m[:, 20] = True
    m[::7, 3] = True
    assert np.abs(distance_transform(m) - oracles.distance_field(m)).max() < 1e-9
