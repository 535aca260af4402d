import math

import numpy as np
from scipy import ndimage

from rotrack.geometry.angles import wrap_angle
from rotrack.geometry.types import Point2
from rotrack.imaging.constants import COORD_DECIMALS, MAX_WARP_SCALE, MIN_WARP_SCALE
from rotrack.imaging.types import Image, Patch


def extract_patch(image: Image, center: Point2, size: int, pad_value: float | None = None) -> Patch:
    """Crops a square patch around a center, aligned to the nearest pixel.

    Args:
        image: Source image.
        center: Patch center in image coordinates.
        size: Side of the patch in pixels.
        pad_value: Value for samples outside the image. Defaults to the image mean.

    Returns:
        The cropped patch. A patch lying fully outside the image is filled with ``pad_value``.

    Raises:
        ValueError: If size is not positive.
    """
    if size <= 0:
        raise ValueError(f"size must be positive. Got: {size}")
    fill = image.mean if pad_value is None else float(pad_value)
    left = math.floor(center.x - (size - 1) / 2 + 0.5)
    top = math.floor(center.y - (size - 1) / 2 + 0.5)
    rows, cols = np.arange(top, top + size), np.arange(left, left + size)
    valid_rows = (rows >= 0) & (rows < image.height)
    valid_cols = (cols >= 0) & (cols < image.width)
    pixels = np.full((size, size), fill, dtype=np.float64)
    pixels[np.ix_(valid_rows, valid_cols)] = image.pixels[np.ix_(rows[valid_rows], cols[valid_cols])]
    return Patch(pixels, center=center, source_size=float(size))


def crop_and_resize(
    image: Image, center: Point2, source_size: float, out_size: int, pad_value: float | None = None
) -> Patch:
    """Bilinearly resamples a square region of side ``source_size`` into an ``out_size`` grid.

    Output pixel i samples the source at ``center + (i - (out_size - 1) / 2) * source_size / out_size``
    along each axis. Samples outside the image take ``pad_value`` (default: image mean).
    """
    if out_size <= 0 or source_size <= 0:
        raise ValueError(f"Sizes must be positive. Got: source {source_size}, out {out_size}")
    fill = image.mean if pad_value is None else float(pad_value)
    step = source_size / out_size
    offsets = (np.arange(out_size) - (out_size - 1) / 2) * step
    rows, cols = np.meshgrid(center.y + offsets, center.x + offsets, indexing="ij")
    pixels = _bilinear(image.pixels, rows, cols, fill)
    return Patch(pixels, center=center, source_size=float(source_size))


def warp_rotate_scale(patch: Patch, angle: float, scale: float) -> Patch:
    """Rotates and scales a patch about its center, keeping its dimensions.

    Each output pixel is bilinearly sampled at the inverse-mapped input location. Samples that
    fall outside the input take the patch mean.

    Args:
        patch: The patch to warp.
        angle: Rotation of the content in degrees, same convention as ``RotatedBBox.angle``.
        scale: Magnification of the content, in [0.1, 10].

    Returns:
        The warped patch, with its rotation and scale provenance updated.

    Raises:
        ValueError: If scale is outside [0.1, 10].
    """
    if not MIN_WARP_SCALE <= scale <= MAX_WARP_SCALE:
        raise ValueError(f"scale must be in [{MIN_WARP_SCALE}, {MAX_WARP_SCALE}]. Got: {scale}")
    center_y, center_x = (patch.height - 1) / 2, (patch.width - 1) / 2
    rows, cols = np.mgrid[0 : patch.height, 0 : patch.width].astype(np.float64)
    dx, dy = cols - center_x, rows - center_y
    theta = math.radians(angle)
    cos, sin = math.cos(theta), math.sin(theta)
    source_cols = center_x + (cos * dx + sin * dy) / scale
    source_rows = center_y + (-sin * dx + cos * dy) / scale
    pixels = _bilinear(patch.pixels, source_rows, source_cols, patch.mean)
    return Patch(
        pixels,
        center=patch.center,
        source_size=patch.source_size,
        rotation=wrap_angle(patch.rotation + angle),
        scale=patch.scale * scale,
    )


def _bilinear(pixels: np.ndarray, rows: np.ndarray, cols: np.ndarray, fill: float) -> np.ndarray:
    coordinates = np.round(np.stack([rows, cols]), COORD_DECIMALS)
    return ndimage.map_coordinates(pixels, coordinates, order=1, mode="constant", cval=fill)


def cosine_window(width: int, height: int) -> np.ndarray:
    """Separable Hann window of shape (height, width).

    Examples:
        >>> np.round(cosine_window(4, 1), 6).tolist()
        [[0.0, 0.75, 0.75, 0.0]]

        >>> cosine_window(1, 1).tolist()
        [[1.0]]
    """
    if width < 1 or height < 1:
        raise ValueError(f"Window size must be at least 1. Got: {width}x{height}")
    return np.outer(np.hanning(height), np.hanning(width))
