import numpy as np
import pytest

from rotrack.geometry.types import Point2
from rotrack.imaging.types import Image, Patch
from rotrack.imaging.utils import cosine_window, crop_and_resize, extract_patch, warp_rotate_scale


@pytest.fixture
def smooth_patch():
    rows, cols = np.mgrid[0:64, 0:64].astype(np.float64)
    pixels = 100 + 50 * np.sin(cols / 5) + 40 * np.cos(rows / 7)
    return Patch(pixels, center=Point2(31.5, 31.5), source_size=64.0)


@pytest.fixture
def random_patch():
    rng = np.random.default_rng(3)
    return Patch(rng.integers(0, 256, size=(9, 9)).astype(np.float64), center=Point2(4, 4), source_size=9.0)


def test_image_is_read_only():
    image = Image([[1.0, 2.0]])
    with pytest.raises(ValueError):
        image.pixels[0, 0] = 5.0


@pytest.mark.parametrize("pixels", [[], [[1.0, np.nan]], [1.0, 2.0]])
def test_image_rejects_invalid_pixels(pixels):
    with pytest.raises(ValueError):
        Image(pixels)


def test_extract_patch_inside_the_image():
    image = Image(np.arange(36, dtype=np.float64).reshape(6, 6))
    patch = extract_patch(image, Point2(2, 3), 3)
    np.testing.assert_array_equal(patch.pixels, image.pixels[2:5, 1:4])
    assert patch.center == Point2(2, 3)
    assert patch.source_size == 3.0


def test_extract_patch_pads_outside_samples():
    image = Image(np.ones((4, 4)))
    patch = extract_patch(image, Point2(0, 0), 3, pad_value=-1.0)
    assert np.count_nonzero(patch.pixels == -1.0) == 5
    assert np.count_nonzero(patch.pixels == 1.0) == 4


def test_extract_patch_defaults_to_the_image_mean():
    image = Image([[0.0, 4.0], [8.0, 12.0]])
    patch = extract_patch(image, Point2(50, 50), 2)
    np.testing.assert_array_equal(patch.pixels, np.full((2, 2), 6.0))


def test_extract_patch_rejects_empty_size():
    with pytest.raises(ValueError):
        extract_patch(Image([[0.0]]), Point2(0, 0), 0)


def test_crop_and_resize_at_unit_step_matches_extract_patch():
    image = Image(np.arange(400, dtype=np.float64).reshape(20, 20))
    resized = crop_and_resize(image, Point2(10, 10), 5.0, 5)
    np.testing.assert_allclose(resized.pixels, extract_patch(image, Point2(10, 10), 5).pixels, atol=1e-9)


def test_crop_and_resize_downsamples_a_linear_ramp():
    image = Image(np.tile(np.arange(40, dtype=np.float64), (40, 1)))
    resized = crop_and_resize(image, Point2(19.5, 19.5), 20.0, 10)
    # Samples are 2 pixels apart, centered on 19.5.
    np.testing.assert_allclose(resized.pixels[0], 19.5 + 2.0 * (np.arange(10) - 4.5), atol=1e-9)


@pytest.mark.parametrize("angle", [0.0, 360.0, -360.0])
def test_warp_full_turn_is_identity(random_patch, angle):
    warped = warp_rotate_scale(random_patch, angle, 1.0)
    np.testing.assert_allclose(warped.pixels, random_patch.pixels, atol=1e-9)


def test_warp_quarter_turn_permutes_pixels(random_patch):
    warped = warp_rotate_scale(random_patch, 90.0, 1.0)
    np.testing.assert_allclose(warped.pixels, np.rot90(random_patch.pixels, k=-1), atol=1e-9)
    assert warped.rotation == 90.0


def test_warp_records_provenance(random_patch):
    warped = warp_rotate_scale(warp_rotate_scale(random_patch, 170.0, 2.0), 30.0, 0.5)
    assert warped.rotation == pytest.approx(-160.0)
    assert warped.scale == pytest.approx(1.0)
    assert warped.center == random_patch.center


def test_warp_inverse_restores_the_center(smooth_patch):
    warped = warp_rotate_scale(smooth_patch, 30.0, 1.2)
    restored = warp_rotate_scale(warped, -30.0, 1 / 1.2)
    np.testing.assert_allclose(restored.pixels[16:48, 16:48], smooth_patch.pixels[16:48, 16:48], atol=2.0)


def test_warp_stays_within_the_input_range(random_patch):
    for angle, scale in [(17.0, 1.0), (-123.0, 0.7), (45.0, 3.0)]:
        warped = warp_rotate_scale(random_patch, angle, scale)
        assert warped.pixels.min() >= random_patch.pixels.min() - 1e-9
        assert warped.pixels.max() <= random_patch.pixels.max() + 1e-9


@pytest.mark.parametrize("scale", [0.05, 10.5])
def test_warp_rejects_scale_out_of_range(random_patch, scale):
    with pytest.raises(ValueError):
        warp_rotate_scale(random_patch, 0.0, scale)


def test_cosine_window():
    window = cosine_window(5, 3)
    assert window.shape == (3, 5)
    assert window[1, 2] == pytest.approx(1.0)
    assert window[0].max() == 0.0
    np.testing.assert_allclose(window, window[::-1, ::-1])
