import math

import numpy as np
import pytest

from rotrack.consistency import (
    ConsistencyParams,
    MotionState,
    angle_consistency,
    apply_displacement,
    conventional_update,
    displacement_consistency,
    distance_consistency,
    fuse_response_maps,
    gaussian_scale_weights,
    scale_consistency,
    scale_factors,
)
from rotrack.correlation import ResponseMap
from rotrack.geometry.angles import circular_distance
from rotrack.geometry.types import Point2


@pytest.fixture
def default_params():
    return ConsistencyParams()


def _run(predictions: list[Point2], params: ConsistencyParams) -> list[Point2]:
    state = MotionState(predictions[0])
    corrected = [predictions[0]]
    for predicted in predictions[1:]:
        centroid, state = displacement_consistency(state, predicted, params)
        corrected.append(centroid)
    return corrected


def test_conventional_update():
    prev, predicted = Point2(0, 0), Point2(10, 10)
    assert conventional_update(prev, predicted, 0.0) == predicted
    assert conventional_update(prev, predicted, 1.0) == prev
    assert conventional_update(prev, predicted, 0.5) == Point2(5, 5)
    with pytest.raises(ValueError):
        conventional_update(prev, predicted, 1.1)


@pytest.mark.parametrize(
    "theta0, theta1, w_theta, expected",
    [
        (30.0, 30.0, 0.01, 30.0),
        (0.0, 100.0, 0.01, 99.0),
        (179.0, -179.0, 0.01, -179.02),
        (0.0, 100.0, 1.0, 0.0),
        (-170.0, 170.0, 0.5, 180.0),
    ],
)
def test_angle_consistency(theta0, theta1, w_theta, expected):
    assert angle_consistency(theta0, theta1, w_theta) == pytest.approx(expected, abs=1e-9)


def test_angle_consistency_stays_on_the_shorter_arc():
    rng = np.random.default_rng(0)
    for theta0, theta1, w_theta in zip(rng.uniform(-180, 180, 500), rng.uniform(-180, 180, 500), rng.random(500)):
        blended = angle_consistency(theta0, theta1, w_theta)
        span = circular_distance(theta0, theta1)
        assert circular_distance(blended, theta0) <= span + 1e-9
        assert circular_distance(blended, theta1) <= span + 1e-9


@pytest.mark.parametrize(
    "d0, d1, w_d, expected",
    [(10.0, 10.0, 0.01, 10.0), (0.0, 5.0, 0.01, 4.95), (3.0, 7.0, 1.0, 3.0)],
)
def test_distance_consistency(d0, d1, w_d, expected):
    assert distance_consistency(d0, d1, w_d) == pytest.approx(expected)


def test_distance_consistency_rejects_negative_distances():
    with pytest.raises(ValueError):
        distance_consistency(-1.0, 2.0, 0.5)


@pytest.mark.parametrize(
    "d, theta, expected",
    [(1.0, 0.0, (1.0, 0.0)), (1.0, 90.0, (0.0, 1.0)), (0.0, 37.0, (0.0, 0.0)), (2.0, 180.0, (-2.0, 0.0))],
)
def test_apply_displacement(d, theta, expected):
    moved = apply_displacement(Point2(0, 0), d, theta)
    assert moved.x == pytest.approx(expected[0], abs=1e-12)
    assert moved.y == pytest.approx(expected[1], abs=1e-12)


def test_displacement_consistency_worked_example(default_params):
    state = MotionState(Point2(0, 0), prev_distance=10.0, prev_angle=0.0, initialized=True)
    corrected, updated = displacement_consistency(state, Point2(0, 10), default_params)
    assert updated.prev_angle == pytest.approx(89.1)
    assert updated.prev_distance == pytest.approx(10.0)
    assert corrected.x == pytest.approx(0.157, abs=1e-3)
    assert corrected.y == pytest.approx(9.999, abs=1e-3)
    assert updated.prev_centroid == corrected


def test_displacement_consistency_seeds_the_memory_on_the_first_call(default_params):
    corrected, state = displacement_consistency(MotionState(Point2(0, 0)), Point2(3, 4), default_params)
    assert corrected == Point2(3, 4)
    assert state.initialized
    assert state.prev_distance == 5.0
    assert state.prev_angle == pytest.approx(math.degrees(math.atan2(4, 3)))


def test_uniform_motion_is_a_fixed_point(default_params):
    predictions = [Point2(5 + 2.0 * k, 7 - 1.5 * k) for k in range(30)]
    for corrected, predicted in zip(_run(predictions, default_params), predictions):
        assert corrected.distance_to(predicted) < 1e-9


def test_zero_displacement_keeps_the_direction(default_params):
    state = MotionState(Point2(4, 4), prev_distance=2.0, prev_angle=45.0, initialized=True)
    corrected, updated = displacement_consistency(state, Point2(4, 4), default_params)
    assert updated.prev_angle == 45.0
    assert updated.prev_distance == pytest.approx(0.02)
    assert corrected.distance_to(Point2(4, 4)) == pytest.approx(0.02)


def test_zero_weights_recover_the_predictions():
    params = ConsistencyParams(centroid_weight=0.0, angle_weight=0.0, distance_weight=0.0)
    rng = np.random.default_rng(1)
    predictions = [Point2(*point) for point in rng.uniform(0, 100, size=(50, 2))]
    assert _run(predictions, params) == predictions


def test_corrected_centroid_stays_within_the_blended_reach():
    params = ConsistencyParams(angle_weight=0.3, distance_weight=0.3)
    rng = np.random.default_rng(2)
    state = MotionState(Point2(50, 50))
    for point in rng.uniform(0, 100, size=(100, 2)):
        predicted = Point2(*point)
        corrected, updated = displacement_consistency(state, predicted, params)
        reach = max(state.prev_distance, state.prev_centroid.distance_to(predicted))
        assert corrected.distance_to(state.prev_centroid) <= reach + 1e-9
        state = updated


def test_smoothing_reduces_error_on_a_noisy_straight_line():
    params = ConsistencyParams()
    improved = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        truth = [Point2(10 + 3.0 * k, 20 + 1.0 * k) for k in range(100)]
        noise = rng.normal(scale=1.0, size=(100, 2))
        predictions = [Point2(p.x + n[0], p.y + n[1]) for p, n in zip(truth, noise)]
        raw_error = np.mean([p.distance_to(t) for p, t in zip(predictions, truth)])
        smoothed_error = np.mean([c.distance_to(t) for c, t in zip(_run(predictions, params), truth)])
        improved += smoothed_error <= raw_error
    assert improved >= 9


def test_gaussian_scale_weights():
    np.testing.assert_allclose(gaussian_scale_weights(1, 1, 1.0), [1.0])
    np.testing.assert_allclose(gaussian_scale_weights(3, 2, 1.0), [0.2119, 0.5761, 0.2119], atol=1e-3)
    weights = gaussian_scale_weights(7, 3, 1.5)
    assert weights.sum() == pytest.approx(1.0)
    assert int(np.argmax(weights)) == 2
    assert weights[1] == pytest.approx(weights[3])
    assert weights[3] > weights[4] > weights[5] > weights[6]


@pytest.mark.parametrize("num_bins, mu, sigma", [(3, 0, 1.0), (3, 4, 1.0), (3, 2, 0.0), (0, 1, 1.0)])
def test_gaussian_scale_weights_rejects_invalid_arguments(num_bins, mu, sigma):
    with pytest.raises(ValueError):
        gaussian_scale_weights(num_bins, mu, sigma)


def test_fuse_response_maps():
    rng = np.random.default_rng(3)
    a = ResponseMap(rng.normal(size=(5, 5)), scale_index=0)
    b = ResponseMap(rng.normal(size=(5, 5)), scale_index=1, rotation_index=7)
    assert np.array_equal(fuse_response_maps([a], [1.0]).scores, a.scores)
    np.testing.assert_allclose(fuse_response_maps([a, a], [0.3, 0.7]).scores, a.scores, atol=1e-12)
    fused = fuse_response_maps([a, b], [0.25, 0.75])
    np.testing.assert_allclose(fused.scores, 0.25 * a.scores + 0.75 * b.scores, atol=1e-12)
    assert (fused.scale_index, fused.rotation_index) == (1, 7)


@pytest.mark.parametrize("factor", [0.01, 3.0, 250.0])
def test_fused_peak_ignores_a_common_weight_factor(factor):
    rng = np.random.default_rng(11)
    maps = [ResponseMap(rng.normal(size=(9, 9)), scale_index=i) for i in range(3)]
    raw = np.array([0.2, 1.3, 0.6])
    scaled = factor * raw
    reference = fuse_response_maps(maps, raw / raw.sum())
    fused = fuse_response_maps(maps, scaled / scaled.sum())
    assert fused.peak_location == reference.peak_location
    assert fused.scale_index == reference.scale_index == 1


def test_fuse_response_maps_rejects_invalid_input():
    a, b = ResponseMap(np.zeros((3, 3))), ResponseMap(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        fuse_response_maps([a, b], [0.5, 0.5])
    with pytest.raises(ValueError):
        fuse_response_maps([a, a], [0.5, 0.6])
    with pytest.raises(ValueError):
        fuse_response_maps([a], [0.5, 0.5])
    with pytest.raises(ValueError):
        fuse_response_maps([], [])


def test_scale_factors():
    assert scale_factors(1, 1.05) == [1.0]
    assert scale_factors(3, 1.05) == pytest.approx([1 / 1.05, 1.0, 1.05])


def _pyramid(winner: int, size: int = 3) -> list[ResponseMap]:
    maps = []
    for index in range(size):
        scores = np.zeros((4, 4))
        scores[1, 2] = 2.0 if index == winner else 1.0
        maps.append(ResponseMap(scores, scale_index=index))
    return maps


def test_scale_consistency_grows_with_the_largest_scale():
    fused, size = scale_consistency(_pyramid(2), (100.0, 50.0), sigma=1.0, damping=1.0, step=1.05)
    assert size == pytest.approx((105.0, 52.5))
    assert fused.scale_index == 2


def test_scale_consistency_keeps_the_size_when_the_center_wins():
    _, size = scale_consistency(_pyramid(1), (40.0, 30.0), sigma=1.0, damping=0.59, step=1.0375)
    assert size == (40.0, 30.0)


def test_scale_consistency_damps_the_change():
    _, size = scale_consistency(_pyramid(0), (100.0, 100.0), sigma=1.0, damping=0.5, step=1.25)
    assert size == pytest.approx((90.0, 90.0))


def test_scale_consistency_of_a_single_map():
    single = _pyramid(0, size=1)
    fused, size = scale_consistency(single, (12.0, 8.0), sigma=1.0, damping=0.59, step=1.0375)
    assert np.array_equal(fused.scores, single[0].scores)
    assert size == (12.0, 8.0)


def test_scale_consistency_rejects_an_empty_pyramid():
    with pytest.raises(ValueError):
        scale_consistency([], (1.0, 1.0), sigma=1.0, damping=0.5, step=1.05)


@pytest.mark.parametrize(
    "overrides",
    [{"angle_weight": -0.1}, {"distance_weight": 2.0}, {"scale_sigma": 0.0}, {"scale_step": 1.0}, {"num_scales": 0}],
)
def test_consistency_params_are_validated(overrides):
    with pytest.raises(ValueError):
        ConsistencyParams(**overrides)
