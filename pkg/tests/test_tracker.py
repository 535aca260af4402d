import numpy as np
import pytest

from rotrack.benchmark.synth import preset_params, render_frames
from rotrack.config import FLAGS_BY_VARIANT, TrackerConfig
from rotrack.correlation import FeatureMap, feature_transform, xcorr_fft
from rotrack.geometry.angles import circular_distance
from rotrack.geometry.types import Point2, RotatedBBox
from rotrack.imaging.types import Image, Patch
from rotrack.imaging.utils import crop_and_resize
from rotrack.rotation_bank import TemplateBank
from rotrack.tracker import (
    CropGeometry,
    FixedTemplateTracker,
    UpdatingTemplateTracker,
    create_tracker,
    init,
    track_frame,
)

MODES = ["fixed_template", "updating_template"]


@pytest.fixture(scope="module")
def static_sequence():
    return render_frames(preset_params("translate", frames=2, velocity=(0.0, 0.0), noise=0.0), seed=0)


@pytest.fixture(scope="module")
def translate_sequence():
    return render_frames(preset_params("translate", frames=10, noise=0.0), seed=1)


def _track(config: TrackerConfig, frames: list[Image], first_box: RotatedBBox) -> list[RotatedBBox]:
    state = init(frames[0], first_box, config)
    boxes = [first_box]
    for frame in frames[1:]:
        box, state = track_frame(state, frame)
        boxes.append(box)
    return boxes


def test_create_tracker_picks_the_mode():
    assert isinstance(create_tracker(TrackerConfig()), FixedTemplateTracker)
    assert isinstance(create_tracker(TrackerConfig(mode="updating_template")), UpdatingTemplateTracker)


def test_crop_geometry_keeps_the_pixel_pitch():
    config = TrackerConfig(exemplar_size=64, search_size=128, context_factor=2.0)
    geometry = CropGeometry.from_box(config, RotatedBBox(Point2(0, 0), 50, 32))
    assert geometry.exemplar_side == pytest.approx(80.0)
    assert geometry.search_side == pytest.approx(160.0)
    moved = geometry.to_image(Point2(100, 50), Point2(34, 30), 1.0, 32.0)
    assert moved.x == pytest.approx(102.5)
    assert moved.y == pytest.approx(47.5)


def test_init_without_rotation_builds_a_single_template(static_sequence):
    frames, boxes = static_sequence
    state = init(frames[0], boxes[0], TrackerConfig())
    assert isinstance(state.model, FeatureMap)
    assert state.model.size == (64, 64)
    assert state.angle == 0.0
    assert state.frame_index == 0
    assert not state.motion.initialized


def test_init_with_rotation_builds_a_19_entry_bank(static_sequence):
    frames, boxes = static_sequence
    state = init(frames[0], boxes[0], TrackerConfig().with_variant("DSR"))
    assert isinstance(state.model, TemplateBank)
    assert len(state.model) == 19


def test_init_of_the_updating_tracker_keeps_a_search_sized_patch(static_sequence):
    frames, boxes = static_sequence
    state = init(frames[0], boxes[0], TrackerConfig(mode="updating_template"))
    assert isinstance(state.model, Patch)
    assert state.model.shape == (128, 128)


def test_init_rejects_a_box_outside_the_frame(static_sequence):
    frames, _ = static_sequence
    with pytest.raises(ValueError):
        init(frames[0], RotatedBBox(Point2(-5, 20), 10, 10), TrackerConfig())


def test_track_frame_rejects_a_different_frame_size(static_sequence):
    frames, boxes = static_sequence
    state = init(frames[0], boxes[0], TrackerConfig())
    with pytest.raises(ValueError):
        track_frame(state, Image(np.zeros((10, 10))))


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("variant", list(FLAGS_BY_VARIANT))
def test_static_frame_keeps_the_center(static_sequence, mode, variant):
    frames, boxes = static_sequence
    config = TrackerConfig(mode=mode).with_variant(variant)
    state = init(frames[0], boxes[0], config)
    box, state = track_frame(state, frames[0])
    assert box.center.distance_to(boxes[0].center) <= 1.0
    assert state.frame_index == 1
    assert state.diagnostics is not None


def test_baseline_follows_a_pure_translation(translate_sequence):
    frames, boxes = translate_sequence
    predictions = _track(TrackerConfig(), frames, boxes[0])
    for prediction, truth in zip(predictions, boxes):
        assert prediction.center.distance_to(truth.center) <= 1.0
        assert (prediction.width, prediction.height) == (truth.width, truth.height)


@pytest.mark.parametrize("subpixel", [True, False])
def test_baseline_is_the_raw_correlation_peak(translate_sequence, subpixel):
    frames, boxes = translate_sequence
    config = TrackerConfig(subpixel=subpixel)
    box, _ = track_frame(init(frames[0], boxes[0], config), frames[1])

    geometry = CropGeometry.from_box(config, boxes[0])
    exemplar = crop_and_resize(frames[0], boxes[0].center, geometry.exemplar_side, config.exemplar_size)
    search = crop_and_resize(frames[1], boxes[0].center, geometry.search_side, config.search_size)
    response = xcorr_fft(feature_transform(exemplar, windowed=True), feature_transform(search))
    zero = (config.search_size - config.exemplar_size) / 2
    peak = response.subpixel_peak() if subpixel else response.peak_location
    expected = geometry.to_image(boxes[0].center, peak, 1.0, zero)
    assert box == RotatedBBox(expected, boxes[0].width, boxes[0].height, 0.0)


def test_zero_weight_displacement_smoothing_is_the_baseline(translate_sequence):
    frames, boxes = translate_sequence
    smoothed = TrackerConfig(displacement=True, centroid_weight=0.0, angle_weight=0.0, distance_weight=0.0)
    assert _track(smoothed, frames, boxes[0]) == _track(TrackerConfig(), frames, boxes[0])


@pytest.mark.parametrize("mode", MODES)
def test_tracking_is_deterministic(translate_sequence, mode):
    frames, boxes = translate_sequence
    config = TrackerConfig(mode=mode).with_variant("DSR")
    assert _track(config, frames[:5], boxes[0]) == _track(config, frames[:5], boxes[0])


def test_interleaved_states_do_not_interfere(translate_sequence, static_sequence):
    config = TrackerConfig(mode="updating_template").with_variant("DS")
    moving_frames, moving_boxes = translate_sequence
    still_frames, still_boxes = static_sequence
    still_frames = [still_frames[0], still_frames[1], still_frames[0], still_frames[1]]
    expected_moving = _track(config, moving_frames[:4], moving_boxes[0])
    expected_still = _track(config, still_frames, still_boxes[0])

    tracker = create_tracker(config)
    moving_state = tracker.init(moving_frames[0], moving_boxes[0])
    still_state = tracker.init(still_frames[0], still_boxes[0])
    moving, still = [moving_boxes[0]], [still_boxes[0]]
    for moving_frame, still_frame in zip(moving_frames[1:4], still_frames[1:]):
        box, moving_state = tracker.track_frame(moving_state, moving_frame)
        moving.append(box)
        box, still_state = tracker.track_frame(still_state, still_frame)
        still.append(box)
    assert moving == expected_moving
    assert still == expected_still


def test_size_changes_stay_within_the_pyramid(translate_sequence):
    frames, boxes = translate_sequence
    config = TrackerConfig().with_variant("DS")
    predictions = _track(config, frames[:6], boxes[0])
    low, high = min(config.scale_factors()), max(config.scale_factors())
    for previous, current in zip(predictions, predictions[1:]):
        assert low - 1e-9 <= current.width / previous.width <= high + 1e-9
        assert current.width / previous.width == pytest.approx(current.height / previous.height)


def test_fixed_mode_angle_changes_are_bounded():
    frames, boxes = render_frames(preset_params("rotate", frames=8, noise=0.0), seed=2)
    config = TrackerConfig().with_variant("DSR")
    predictions = _track(config, frames, boxes[0])
    for previous, current in zip(predictions, predictions[1:]):
        assert circular_distance(previous.angle, current.angle) <= 2 * config.bank_step + 1e-9
        assert current.angle % config.bank_step == 0.0


def test_updating_mode_angle_moves_in_zeta_steps():
    frames, boxes = render_frames(preset_params("rotate", frames=8, noise=0.0), seed=3)
    config = TrackerConfig(mode="updating_template", zeta=8.0).with_variant("DSR")
    predictions = _track(config, frames, boxes[0])
    for previous, current in zip(predictions, predictions[1:]):
        assert circular_distance(previous.angle, current.angle) == pytest.approx(0.0, abs=1e-9) or (
            circular_distance(previous.angle, current.angle) == pytest.approx(8.0)
        )


def test_diagnostics_record_the_winning_hypothesis(static_sequence):
    frames, boxes = static_sequence
    state = init(frames[0], boxes[0], TrackerConfig().with_variant("DSR"))
    _, state = track_frame(state, frames[1])
    diagnostics = state.diagnostics
    assert 0 <= diagnostics.rotation_index < 19
    assert 0 <= diagnostics.scale_index < 3
    assert diagnostics.confidence > 0


def test_updating_mode_keeps_the_unrotated_filter_without_spin():
    config = TrackerConfig(mode="updating_template", rotation=True)
    kept, total = 0, 0
    for seed in range(3):
        frames, boxes = render_frames(preset_params("rotate", omega=0.0, frames=30), seed)
        state = init(frames[0], boxes[0], config)
        for frame in frames[1:]:
            _, state = track_frame(state, frame)
            kept += state.diagnostics.rotation_index == 1
            total += 1
    assert kept >= 0.9 * total
